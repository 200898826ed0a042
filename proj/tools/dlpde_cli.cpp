// dlpde command-line front end. Every subcommand reads and writes the
// library's plain-text formats, so stages can be run one at a time or all
// at once through `run`.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dlpde/experiment.hpp"

using namespace dlpde;

namespace {

ExperimentConfig base_config(const std::string& config_path, const std::string& benchmark) {
    ExperimentConfig c = config_path.empty() ? default_config(parse_benchmark(benchmark.empty() ? "burgers" : benchmark))
                                             : load_config(config_path);
    if (!config_path.empty() && !benchmark.empty() && parse_benchmark(benchmark) != c.benchmark)
        throw UsageError("--benchmark disagrees with the config file");
    return c;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw UsageError("bad value '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void print_outcome(const RunOutcome& o) {
    std::cout << "run directory: " << o.directory << "\n";
    std::ifstream report(std::filesystem::path(o.directory) / "report.txt");
    std::cout << report.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DL-PDE: PDE discovery from sparse, noisy samples via neural networks and STRidge"};
    app.require_subcommand(1);

    std::string config_path, benchmark, root = "runs", manifest, out, in;

    auto* run_cmd = app.add_subcommand("run", "execute a full experiment from a config file or manifest");
    run_cmd->add_option("config", config_path, "INI config")->check(CLI::ExistingFile);
    run_cmd->add_option("--manifest", manifest, "rerun from a previous run's manifest.json")->check(CLI::ExistingFile);
    run_cmd->add_option("--root", root, "directory receiving run directories");

    auto* gen = app.add_subcommand("generate", "solve a benchmark PDE to a grid field");
    gen->add_option("--config", config_path)->check(CLI::ExistingFile);
    gen->add_option("--benchmark", benchmark);
    gen->add_option("--out", out, "output grid file")->required();
    bool gen_rescale = false;
    gen->add_flag("--rescale", gen_rescale, "groundwater: write starred variables");

    auto* smp = app.add_subcommand("sample", "draw observations from a grid field");
    std::string mode = "random", preset;
    long n = 3000;
    std::uint64_t seed = 1, noise_seed = 2;
    double delta = 0.0;
    int stride = 1;
    bool as_grid = false;
    smp->add_option("--field", in, "input grid field")->required()->check(CLI::ExistingFile);
    smp->add_option("--mode", mode, "random | full | lines | decimate");
    smp->add_option("--n", n);
    smp->add_option("--preset", preset, "line preset");
    smp->add_option("--stride", stride, "decimation stride in x and t");
    smp->add_option("--seed", seed);
    smp->add_option("--noise", delta, "relative noise level");
    smp->add_option("--noise-seed", noise_seed);
    smp->add_flag("--grid", as_grid, "write a grid field (full/decimate) for direct STRidge");
    smp->add_option("--out", out)->required();

    auto* trn = app.add_subcommand("train", "fit a network to samples");
    std::string loss_out;
    trn->add_option("--samples", in)->required()->check(CLI::ExistingFile);
    trn->add_option("--config", config_path)->check(CLI::ExistingFile);
    trn->add_option("--benchmark", benchmark);
    trn->add_option("--out", out, "network json")->required();
    trn->add_option("--loss", loss_out, "loss history tsv");

    auto* dis = app.add_subcommand("discover", "jets + STRidge from a network or (direct STRidge) a grid field");
    std::string net_path, field_path, samples_path, jets_out;
    dis->add_option("--net", net_path)->check(CLI::ExistingFile);
    dis->add_option("--field", field_path, "grid field for finite-difference jets")->check(CLI::ExistingFile);
    dis->add_option("--at-samples", samples_path, "evaluate jets at these samples only")->check(CLI::ExistingFile);
    dis->add_option("--config", config_path)->check(CLI::ExistingFile);
    dis->add_option("--benchmark", benchmark);
    dis->add_option("--jets-out", jets_out);
    dis->add_option("--out", out, "result file")->required();

    auto* ev = app.add_subcommand("evaluate", "re-solve a discovered PDE and compute relative error");
    std::string result_path;
    ev->add_option("--result", result_path)->required()->check(CLI::ExistingFile);
    ev->add_option("--truth", field_path, "truth grid field")->required()->check(CLI::ExistingFile);
    ev->add_option("--config", config_path)->check(CLI::ExistingFile);
    ev->add_option("--benchmark", benchmark);
    ev->add_option("--out", out, "error field output");

    auto* sw = app.add_subcommand("sweep", "one run per value along an axis, tabulated");
    std::string axis, values;
    int workers = 0;
    sw->add_option("config", config_path)->required()->check(CLI::ExistingFile);
    sw->add_option("--axis", axis, "data_volume | noise_level | decimation")->required();
    sw->add_option("--values", values, "comma-separated values")->required();
    sw->add_option("--root", root);
    sw->add_option("--workers", workers);
    sw->add_option("--out", out, "table file")->required();

    auto* rep = app.add_subcommand("report", "print a run directory's report");
    rep->add_option("run", in, "run directory or result file")->required()->check(CLI::ExistingPath);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            if (config_path.empty() == manifest.empty()) throw UsageError("give either a config file or --manifest");
            const ExperimentConfig c = manifest.empty() ? load_config(config_path) : load_manifest_config(manifest);
            const RunOutcome o = run(c, root);
            print_outcome(o);
            return o.ok ? 0 : 1;
        }
        if (*gen) {
            const ExperimentConfig c = base_config(config_path, benchmark).resolved();
            GridField f = solve(benchmark_spec(c), benchmark_grid(c.benchmark));
            if (gen_rescale) f = rescale_groundwater(f);
            save_grid_field(out, f);
            return 0;
        }
        if (*smp) {
            const GridField f = load_grid_field(in);
            const NoiseSpec noise{delta, noise_seed};
            const SamplingMode m = parse_sampling_mode(mode);
            if (as_grid) {
                GridField g = m == SamplingMode::Full ? f
                              : m == SamplingMode::Decimate
                                  ? decimate(f, stride, stride)
                                  : throw UsageError("--grid needs mode full or decimate");
                if (delta > 0.0) g = add_noise(g, noise);
                save_grid_field(out, g);
                return 0;
            }
            SampleSet s;
            switch (m) {
                case SamplingMode::Random: s = random_subsample(f, n, seed); break;
                case SamplingMode::Full: s = full_samples(f); break;
                case SamplingMode::Lines: {
                    const LinePreset p = line_preset(preset, f.spec);
                    s = line_sample(f, p.axis, p.positions);
                    break;
                }
                case SamplingMode::Decimate:
                    s = full_samples(decimate(f, stride, stride));
                    s.provenance = Provenance::Decimated;
                    break;
            }
            if (delta > 0.0) s = add_noise(s, noise);
            save_sample_set(out, s);
            return 0;
        }
        if (*trn) {
            const ExperimentConfig c = base_config(config_path, benchmark).resolved();
            const SampleSet s = load_sample_set(in);
            const TrainResult r = train(init_preset(c.net_preset, c.init_seed, c.first_layer_frequency), s, c.train);
            save_network(out, r.params);
            if (!loss_out.empty()) {
                std::ofstream os(loss_out);
                os << "step\tloss\n";
                for (const auto& h : r.history) os << h.step << "\t" << format_double(h.loss) << "\n";
            }
            std::cerr << "trained " << r.iterations_run << " iterations, final loss "
                      << (r.history.empty() ? 0.0 : r.history.back().loss) << "\n";
            return 0;
        }
        if (*dis) {
            const ExperimentConfig c = base_config(config_path, benchmark).resolved();
            if (net_path.empty() == field_path.empty()) throw UsageError("give exactly one of --net and --field");
            std::vector<DerivativeJet> jets;
            if (!field_path.empty()) {
                jets = fd_jets(load_grid_field(field_path), c.fd);
            } else {
                const NetworkParams p = load_network(net_path);
                if (!samples_path.empty()) {
                    jets = sample_jets(p, load_sample_set(samples_path));
                } else {
                    std::vector<std::string> warnings;
                    jets = generate_metadata(p, *c.metadata, DomainPolicy::Warn, &warnings);
                    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
                }
            }
            if (!jets_out.empty()) save_jets(jets_out, jets);
            const DiscoveryResult r = discover(assemble(jets, catalog_by_name(c.catalog)), c.stridge);
            save_result(out, r);
            std::cout << r.equation << "\n";
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            return 0;
        }
        if (*ev) {
            const ExperimentConfig c = base_config(config_path, benchmark).resolved();
            const DiscoveryResult r = load_result(result_path);
            const GridField truth = load_grid_field(field_path);
            const ErrorField e = evaluate_learned(r, benchmark_spec(c), truth);
            const Score s = score(r, truth_coefficients(c));
            if (!out.empty() && !e.diverged) save_grid_field(out, e.as_grid_field());
            std::cout << "support_exact " << (s.support_exact ? 1 : 0) << "\n"
                      << "max_coeff_rel_error " << format_double(s.max_coeff_rel_error) << "\n"
                      << "relative_error " << e.summary() << "\n";
            return 0;
        }
        if (*sw) {
            ExperimentConfig c = load_config(config_path);
            if (workers > 0) c.workers = workers;
            const auto outcomes = sweep(c, parse_sweep_axis(axis), parse_values(values), root, out);
            std::ifstream table(out);
            std::cout << table.rdbuf();
            for (const auto& o : outcomes)
                if (!o.ok) return 1;
            return 0;
        }
        if (*rep) {
            namespace fs = std::filesystem;
            if (fs::is_directory(in)) {
                std::ifstream report(fs::path(in) / "report.txt");
                if (!report) throw FormatError("no report.txt in " + in);
                std::cout << report.rdbuf();
                std::ifstream m(fs::path(in) / "manifest.json");
                std::stringstream ms;
                ms << m.rdbuf();
                return ms.str().find("\"status\": \"ok\"") != std::string::npos ? 0 : 1;
            }
            const DiscoveryResult r = load_result(in);
            std::cout << "equation " << r.equation << "\n";
            for (const auto& w : r.warnings) std::cout << "warning " << w << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
