#include "dlpde/experiment.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace dlpde {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Benchmark b) {
    switch (b) {
        case Benchmark::Groundwater: return "groundwater";
        case Benchmark::ConvectionDiffusion: return "convection_diffusion";
        case Benchmark::Burgers: return "burgers";
        case Benchmark::KdV: return "kdv";
    }
    return "?";
}

std::string to_string(Pipeline p) {
    switch (p) {
        case Pipeline::DlPde: return "dlpde";
        case Pipeline::DlPdeNoMetadata: return "dlpde_no_metadata";
        case Pipeline::DirectStridge: return "direct_stridge";
    }
    return "?";
}

std::string to_string(SamplingMode m) {
    switch (m) {
        case SamplingMode::Random: return "random";
        case SamplingMode::Full: return "full";
        case SamplingMode::Lines: return "lines";
        case SamplingMode::Decimate: return "decimate";
    }
    return "?";
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::DataVolume: return "data_volume";
        case SweepAxis::NoiseLevel: return "noise_level";
        case SweepAxis::Decimation: return "decimation";
    }
    return "?";
}

Benchmark parse_benchmark(const std::string& s) {
    for (auto b : {Benchmark::Groundwater, Benchmark::ConvectionDiffusion, Benchmark::Burgers, Benchmark::KdV})
        if (to_string(b) == s) return b;
    throw ConfigurationError("unknown benchmark '" + s + "'");
}

Pipeline parse_pipeline(const std::string& s) {
    for (auto p : {Pipeline::DlPde, Pipeline::DlPdeNoMetadata, Pipeline::DirectStridge})
        if (to_string(p) == s) return p;
    throw ConfigurationError("unknown pipeline '" + s + "'");
}

SamplingMode parse_sampling_mode(const std::string& s) {
    for (auto m : {SamplingMode::Random, SamplingMode::Full, SamplingMode::Lines, SamplingMode::Decimate})
        if (to_string(m) == s) return m;
    throw ConfigurationError("unknown sampling mode '" + s + "'");
}

SweepAxis parse_sweep_axis(const std::string& s) {
    for (auto a : {SweepAxis::DataVolume, SweepAxis::NoiseLevel, SweepAxis::Decimation})
        if (to_string(a) == s) return a;
    throw ConfigurationError("unknown sweep axis '" + s + "'");
}

namespace {

std::string to_string(FdScheme s) { return s == FdScheme::Central2 ? "central2" : "central4"; }
std::string to_string(FdBoundary b) { return b == FdBoundary::OneSided ? "one_sided" : "drop"; }
std::string to_string(TolMode m) { return m == TolMode::Relative ? "relative" : "absolute"; }
std::string to_string(InputScaling s) { return s == InputScaling::UnitBox ? "unit_box" : "none"; }

FdScheme parse_fd_scheme(const std::string& s) {
    if (s == "central2") return FdScheme::Central2;
    if (s == "central4") return FdScheme::Central4;
    throw ConfigurationError("unknown finite-difference scheme '" + s + "'");
}
FdBoundary parse_fd_boundary(const std::string& s) {
    if (s == "one_sided") return FdBoundary::OneSided;
    if (s == "drop") return FdBoundary::Drop;
    throw ConfigurationError("unknown boundary policy '" + s + "'");
}
TolMode parse_tol_mode(const std::string& s) {
    if (s == "relative") return TolMode::Relative;
    if (s == "absolute") return TolMode::Absolute;
    throw ConfigurationError("unknown tolerance mode '" + s + "'");
}
InputScaling parse_input_scaling(const std::string& s) {
    if (s == "unit_box") return InputScaling::UnitBox;
    if (s == "none") return InputScaling::None;
    throw ConfigurationError("unknown input scaling '" + s + "'");
}

PdeSpec base_spec(Benchmark b) {
    switch (b) {
        case Benchmark::Groundwater: return groundwater_spec();
        case Benchmark::ConvectionDiffusion: return convection_diffusion_spec();
        case Benchmark::Burgers: return burgers_spec();
        case Benchmark::KdV: return kdv_spec();
    }
    throw ConfigurationError("unknown benchmark");
}

}  // namespace

GridSpec benchmark_grid(Benchmark b) {
    switch (b) {
        case Benchmark::Groundwater: return groundwater_grid();
        case Benchmark::ConvectionDiffusion: return convection_diffusion_grid();
        case Benchmark::Burgers: return burgers_grid();
        case Benchmark::KdV: return kdv_grid();
    }
    throw ConfigurationError("unknown benchmark");
}

TermCatalog catalog_by_name(const std::string& name) {
    if (name == "default") return default_catalog();
    if (name == "extended") return extended_catalog();
    throw ConfigurationError("unknown catalog '" + name + "'");
}

ExperimentConfig default_config(Benchmark b) {
    ExperimentConfig c;
    c.benchmark = b;
    c.train.iterations = 20000;
    c.train.lr_decay_every = 5000;
    c.train.lr_decay_factor = 0.5;
    // tol chosen per run from 13 log-spaced values in [1e-3, 1].
    for (int k = 0; k <= 12; ++k) c.stridge.tol_sweep.push_back(std::pow(10.0, -3.0 + 0.25 * k));
    switch (b) {
        case Benchmark::Groundwater: c.sampling.n = 2500; break;
        case Benchmark::ConvectionDiffusion: c.sampling.n = 500; break;
        case Benchmark::Burgers: c.sampling.n = 3000; break;
        case Benchmark::KdV: c.sampling.n = 25000; break;
    }
    return c;
}

ExperimentConfig ExperimentConfig::resolved() const {
    ExperimentConfig c = *this;
    const PdeSpec spec = base_spec(c.benchmark);
    for (const auto& [k, v] : spec.params) c.pde.emplace(k, v);
    for (const auto& [k, v] : c.pde)
        if (!spec.params.count(k)) throw ConfigurationError("unknown PDE parameter '" + k + "' for " + to_string(c.benchmark));
    if (c.sampling.seed == 0) c.sampling.seed = mix_seed(c.seed, 1);
    if (c.noise.seed == 0) c.noise.seed = mix_seed(c.seed, 2);
    if (c.init_seed == 0) c.init_seed = mix_seed(c.seed, 3);
    if (c.train.seed == 0) c.train.seed = mix_seed(c.seed, 4);
    if (c.stridge.split_seed == 0) c.stridge.split_seed = mix_seed(c.seed, 5);
    if (c.net_preset.empty()) c.net_preset = c.benchmark == Benchmark::KdV ? "kdv" : "standard";
    if (c.metadata_preset.empty()) c.metadata_preset = to_string(c.benchmark);
    if (!c.metadata) c.metadata = dlpde::metadata_preset(c.metadata_preset);
    if (c.sampling.mode == SamplingMode::Lines && c.sampling.preset.empty())
        throw ConfigurationError("line sampling needs a preset");
    if (c.workers < 1) throw ConfigurationError("workers must be >= 1");
    c.train.validate();
    c.stridge.validate();
    c.fd.validate();
    c.metadata->validate();
    catalog_by_name(c.catalog);
    return c;
}

// ---------------------------------------------------------------- INI input

namespace {

using boost::property_tree::ptree;

struct Section {
    const ptree* tree = nullptr;
    std::string name;

    template <typename T>
    void get(const std::string& key, T& out) const {
        if (!tree) return;
        if (auto v = tree->get_optional<std::string>(key)) {
            std::istringstream is(*v);
            T value{};
            if constexpr (std::is_same_v<T, bool>) {
                std::string s;
                is >> s;
                if (s == "true" || s == "1" || s == "yes") value = true;
                else if (s == "false" || s == "0" || s == "no") value = false;
                else throw ConfigurationError("[" + name + "] " + key + ": expected a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                value = *v;
            } else {
                if (!(is >> value)) throw ConfigurationError("[" + name + "] " + key + ": malformed value '" + *v + "'");
            }
            out = value;
        }
    }
    std::optional<std::string> text(const std::string& key) const {
        if (!tree) return std::nullopt;
        if (auto v = tree->get_optional<std::string>(key)) return *v;
        return std::nullopt;
    }
    void only(std::initializer_list<const char*> keys) const {
        if (!tree) return;
        for (const auto& [k, v] : *tree) {
            bool ok = false;
            for (const char* allowed : keys) ok = ok || k == allowed;
            if (!ok) throw ConfigurationError("[" + name + "] unknown key '" + k + "'");
        }
    }
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        std::istringstream vs(item);
        double v;
        if (!(vs >> v)) throw ConfigurationError("malformed list entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& ini_text) {
    ptree pt;
    std::istringstream is(ini_text);
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }
    for (const auto& [k, v] : pt) {
        static const char* sections[] = {"experiment", "pde", "sampling", "noise", "net",
                                         "train", "metadata", "stridge", "baseline"};
        if (std::find(std::begin(sections), std::end(sections), k) == std::end(sections))
            throw ConfigurationError("config: unknown section [" + k + "]");
    }
    auto section = [&](const char* name) {
        auto child = pt.get_child_optional(name);
        return Section{child ? &*child : nullptr, name};
    };

    const Section ex = section("experiment");
    ex.only({"benchmark", "pipeline", "seed", "evaluate", "write_jets", "workers"});
    std::string bench = "burgers";
    ex.get("benchmark", bench);
    ExperimentConfig c = default_config(parse_benchmark(bench));
    if (auto p = ex.text("pipeline")) c.pipeline = parse_pipeline(*p);
    ex.get("seed", c.seed);
    ex.get("evaluate", c.evaluate);
    ex.get("write_jets", c.write_jets);
    ex.get("workers", c.workers);

    if (auto pde = pt.get_child_optional("pde"))
        for (const auto& [k, v] : *pde) {
            double value;
            Section{&*pde, "pde"}.get(k, value);
            c.pde[k] = value;
        }

    const Section sa = section("sampling");
    sa.only({"mode", "n", "preset", "stride", "stride_x", "stride_t", "seed"});
    if (auto m = sa.text("mode")) c.sampling.mode = parse_sampling_mode(*m);
    sa.get("n", c.sampling.n);
    sa.get("preset", c.sampling.preset);
    int stride = 0;
    sa.get("stride", stride);
    if (stride > 0) c.sampling.stride_x = c.sampling.stride_t = stride;
    sa.get("stride_x", c.sampling.stride_x);
    sa.get("stride_t", c.sampling.stride_t);
    sa.get("seed", c.sampling.seed);

    const Section no = section("noise");
    no.only({"delta", "seed"});
    no.get("delta", c.noise.delta);
    no.get("seed", c.noise.seed);

    const Section ne = section("net");
    ne.only({"preset", "first_layer_frequency", "seed"});
    ne.get("preset", c.net_preset);
    ne.get("first_layer_frequency", c.first_layer_frequency);
    ne.get("seed", c.init_seed);

    const Section tr = section("train");
    tr.only({"learning_rate", "adam_beta1", "adam_beta2", "adam_eps", "iterations", "batch", "full_batch_limit",
             "minibatch_size", "seed", "input_scaling", "output_scaling", "history_every", "early_stop_window",
             "early_stop_tol", "lr_decay_every", "lr_decay_factor", "validation_fraction", "patience", "refit_full"});
    auto& t = c.train;
    tr.get("learning_rate", t.learning_rate);
    tr.get("adam_beta1", t.adam_beta1);
    tr.get("adam_beta2", t.adam_beta2);
    tr.get("adam_eps", t.adam_eps);
    tr.get("iterations", t.iterations);
    tr.get("batch", t.batch);
    tr.get("full_batch_limit", t.full_batch_limit);
    tr.get("minibatch_size", t.minibatch_size);
    tr.get("seed", t.seed);
    if (auto s = tr.text("input_scaling")) t.input_scaling = parse_input_scaling(*s);
    tr.get("output_scaling", t.output_scaling);
    tr.get("history_every", t.history_every);
    tr.get("early_stop_window", t.early_stop_window);
    tr.get("early_stop_tol", t.early_stop_tol);
    tr.get("lr_decay_every", t.lr_decay_every);
    tr.get("lr_decay_factor", t.lr_decay_factor);
    tr.get("validation_fraction", t.validation_fraction);
    tr.get("patience", t.patience);
    tr.get("refit_full", t.refit_full);

    const Section me = section("metadata");
    me.only({"preset", "x_lo", "x_hi", "nx", "t_lo", "t_hi", "nt", "x_half_open"});
    me.get("preset", c.metadata_preset);
    if (me.tree && me.tree->size() > (me.text("preset") ? 1u : 0u)) {
        MetaDataSpec m = metadata_preset(c.metadata_preset.empty() ? to_string(c.benchmark) : c.metadata_preset);
        me.get("x_lo", m.x_lo);
        me.get("x_hi", m.x_hi);
        me.get("nx", m.nx);
        me.get("t_lo", m.t_lo);
        me.get("t_hi", m.t_hi);
        me.get("nt", m.nt);
        me.get("x_half_open", m.x_half_open);
        c.metadata = m;
    }

    const Section st = section("stridge");
    st.only({"catalog", "lambda", "tol", "tol_mode", "max_iter", "final_refit", "normalize", "tol_sweep",
             "validation_fraction", "split_seed", "complexity_penalty"});
    auto& s = c.stridge;
    st.get("catalog", c.catalog);
    st.get("lambda", s.lambda);
    st.get("tol", s.tol);
    if (auto m = st.text("tol_mode")) s.tol_mode = parse_tol_mode(*m);
    st.get("max_iter", s.max_iter);
    st.get("final_refit", s.final_refit);
    st.get("normalize", s.normalize);
    if (auto l = st.text("tol_sweep")) s.tol_sweep = *l == "none" ? std::vector<double>{} : parse_list(*l);
    st.get("validation_fraction", s.validation_fraction);
    st.get("split_seed", s.split_seed);
    st.get("complexity_penalty", s.complexity_penalty);

    const Section ba = section("baseline");
    ba.only({"scheme", "boundary", "smooth", "degree", "window"});
    if (auto v = ba.text("scheme")) c.fd.scheme = parse_fd_scheme(*v);
    if (auto v = ba.text("boundary")) c.fd.boundary = parse_fd_boundary(*v);
    bool smooth = false;
    ba.get("smooth", smooth);
    if (smooth) {
        Smoothing sm;
        ba.get("degree", sm.degree);
        ba.get("window", sm.window);
        c.fd.smooth = sm;
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigurationError("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------- JSON form

std::string config_to_json(const ExperimentConfig& config) {
    const ExperimentConfig c = config.resolved();
    json j;
    j["benchmark"] = to_string(c.benchmark);
    j["pipeline"] = to_string(c.pipeline);
    j["seed"] = c.seed;
    j["pde"] = c.pde;
    j["sampling"] = {{"mode", to_string(c.sampling.mode)}, {"n", c.sampling.n},
                     {"preset", c.sampling.preset},       {"stride_x", c.sampling.stride_x},
                     {"stride_t", c.sampling.stride_t},   {"seed", c.sampling.seed}};
    j["noise"] = {{"delta", c.noise.delta}, {"seed", c.noise.seed}};
    j["net"] = {{"preset", c.net_preset}, {"first_layer_frequency", c.first_layer_frequency}, {"seed", c.init_seed}};
    const auto& t = c.train;
    j["train"] = {{"learning_rate", t.learning_rate},
                  {"adam_beta1", t.adam_beta1},
                  {"adam_beta2", t.adam_beta2},
                  {"adam_eps", t.adam_eps},
                  {"iterations", t.iterations},
                  {"batch", t.batch},
                  {"full_batch_limit", t.full_batch_limit},
                  {"minibatch_size", t.minibatch_size},
                  {"seed", t.seed},
                  {"input_scaling", to_string(t.input_scaling)},
                  {"output_scaling", t.output_scaling},
                  {"history_every", t.history_every},
                  {"early_stop_window", t.early_stop_window},
                  {"early_stop_tol", t.early_stop_tol},
                  {"lr_decay_every", t.lr_decay_every},
                  {"lr_decay_factor", t.lr_decay_factor},
                  {"validation_fraction", t.validation_fraction},
                  {"patience", t.patience},
                  {"refit_full", t.refit_full}};
    const auto& m = *c.metadata;
    j["metadata"] = {{"preset", c.metadata_preset}, {"x_lo", m.x_lo}, {"x_hi", m.x_hi}, {"nx", m.nx},
                     {"t_lo", m.t_lo},              {"t_hi", m.t_hi}, {"nt", m.nt}, {"x_half_open", m.x_half_open}};
    const auto& s = c.stridge;
    j["stridge"] = {{"catalog", c.catalog},
                    {"lambda", s.lambda},
                    {"tol", s.tol},
                    {"tol_mode", to_string(s.tol_mode)},
                    {"max_iter", s.max_iter},
                    {"final_refit", s.final_refit},
                    {"normalize", s.normalize},
                    {"tol_sweep", s.tol_sweep},
                    {"validation_fraction", s.validation_fraction},
                    {"split_seed", s.split_seed},
                    {"complexity_penalty", s.complexity_penalty}};
    j["baseline"] = {{"scheme", to_string(c.fd.scheme)}, {"boundary", to_string(c.fd.boundary)},
                     {"smooth", c.fd.smooth.has_value()},
                     {"degree", c.fd.smooth ? c.fd.smooth->degree : Smoothing{}.degree},
                     {"window", c.fd.smooth ? c.fd.smooth->window : Smoothing{}.window}};
    j["evaluate"] = c.evaluate;
    j["write_jets"] = c.write_jets;
    j["workers"] = c.workers;
    return j.dump(2);
}

namespace {

ExperimentConfig config_from(const json& j) {
    try {
        ExperimentConfig c;
        c.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
        c.pipeline = parse_pipeline(j.at("pipeline").get<std::string>());
        c.seed = j.at("seed").get<std::uint64_t>();
        c.pde = j.at("pde").get<std::map<std::string, double>>();
        const auto& sa = j.at("sampling");
        c.sampling.mode = parse_sampling_mode(sa.at("mode").get<std::string>());
        c.sampling.n = sa.at("n").get<long>();
        c.sampling.preset = sa.at("preset").get<std::string>();
        c.sampling.stride_x = sa.at("stride_x").get<int>();
        c.sampling.stride_t = sa.at("stride_t").get<int>();
        c.sampling.seed = sa.at("seed").get<std::uint64_t>();
        c.noise.delta = j.at("noise").at("delta").get<double>();
        c.noise.seed = j.at("noise").at("seed").get<std::uint64_t>();
        c.net_preset = j.at("net").at("preset").get<std::string>();
        c.first_layer_frequency = j.at("net").at("first_layer_frequency").get<double>();
        c.init_seed = j.at("net").at("seed").get<std::uint64_t>();
        const auto& t = j.at("train");
        c.train.learning_rate = t.at("learning_rate").get<double>();
        c.train.adam_beta1 = t.at("adam_beta1").get<double>();
        c.train.adam_beta2 = t.at("adam_beta2").get<double>();
        c.train.adam_eps = t.at("adam_eps").get<double>();
        c.train.iterations = t.at("iterations").get<long>();
        c.train.batch = t.at("batch").get<long>();
        c.train.full_batch_limit = t.at("full_batch_limit").get<long>();
        c.train.minibatch_size = t.at("minibatch_size").get<long>();
        c.train.seed = t.at("seed").get<std::uint64_t>();
        c.train.input_scaling = parse_input_scaling(t.at("input_scaling").get<std::string>());
        c.train.output_scaling = t.at("output_scaling").get<bool>();
        c.train.history_every = t.at("history_every").get<long>();
        c.train.early_stop_window = t.at("early_stop_window").get<long>();
        c.train.early_stop_tol = t.at("early_stop_tol").get<double>();
        c.train.lr_decay_every = t.at("lr_decay_every").get<long>();
        c.train.lr_decay_factor = t.at("lr_decay_factor").get<double>();
        c.train.validation_fraction = t.at("validation_fraction").get<double>();
        c.train.patience = t.at("patience").get<long>();
        c.train.refit_full = t.at("refit_full").get<bool>();
        const auto& m = j.at("metadata");
        c.metadata_preset = m.at("preset").get<std::string>();
        c.metadata = MetaDataSpec{m.at("x_lo").get<double>(), m.at("x_hi").get<double>(), m.at("nx").get<int>(),
                                  m.at("t_lo").get<double>(), m.at("t_hi").get<double>(), m.at("nt").get<int>(),
                                  m.at("x_half_open").get<bool>()};
        const auto& s = j.at("stridge");
        c.catalog = s.at("catalog").get<std::string>();
        c.stridge.lambda = s.at("lambda").get<double>();
        c.stridge.tol = s.at("tol").get<double>();
        c.stridge.tol_mode = parse_tol_mode(s.at("tol_mode").get<std::string>());
        c.stridge.max_iter = s.at("max_iter").get<int>();
        c.stridge.final_refit = s.at("final_refit").get<bool>();
        c.stridge.normalize = s.at("normalize").get<bool>();
        c.stridge.tol_sweep = s.at("tol_sweep").get<std::vector<double>>();
        c.stridge.validation_fraction = s.at("validation_fraction").get<double>();
        c.stridge.split_seed = s.at("split_seed").get<std::uint64_t>();
        c.stridge.complexity_penalty = s.at("complexity_penalty").get<double>();
        const auto& b = j.at("baseline");
        c.fd.scheme = parse_fd_scheme(b.at("scheme").get<std::string>());
        c.fd.boundary = parse_fd_boundary(b.at("boundary").get<std::string>());
        if (b.at("smooth").get<bool>()) c.fd.smooth = Smoothing{b.at("degree").get<int>(), b.at("window").get<int>()};
        c.evaluate = j.at("evaluate").get<bool>();
        c.write_jets = j.at("write_jets").get<bool>();
        c.workers = j.at("workers").get<int>();
        return c;
    } catch (const json::exception& e) {
        throw FormatError(std::string("config json: ") + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config json: ") + e.what());
    }
    return config_from(j);
}

ExperimentConfig load_manifest_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open manifest " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    if (!j.contains("config")) throw FormatError("manifest has no config block");
    return config_from(j["config"]);
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : config_to_json(config)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PdeSpec benchmark_spec(const ExperimentConfig& config) {
    PdeSpec spec = base_spec(config.benchmark);
    for (const auto& [k, v] : config.pde) {
        if (!spec.params.count(k)) throw ConfigurationError("unknown PDE parameter '" + k + "'");
        spec.params[k] = v;
    }
    return spec;
}

std::map<std::string, double> truth_coefficients(const ExperimentConfig& config) {
    const PdeSpec s = benchmark_spec(config);
    switch (config.benchmark) {
        case Benchmark::Groundwater:
            return {{"u_xx", rescaled_diffusivity(s.param("K"), s.param("S_s"), groundwater_grid().dx)}};
        case Benchmark::ConvectionDiffusion: return {{"u_x", -s.param("v_x")}, {"u_xx", s.param("D_L")}};
        case Benchmark::Burgers: return {{"u*u_x", -1.0}, {"u_xx", s.param("a")}};
        case Benchmark::KdV: return {{"u*u_x", -1.0}, {"u_xxx", -s.param("b")}};
    }
    return {};
}

// ---------------------------------------------------------------- run

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << text;
}

std::string symbol_for(Benchmark b) {
    switch (b) {
        case Benchmark::Groundwater: return "h";
        case Benchmark::ConvectionDiffusion: return "C";
        default: return "u";
    }
}

}  // namespace

RunOutcome run(const ExperimentConfig& config, const std::string& root) {
    const ExperimentConfig c = config.resolved();
    const std::string config_json = config_to_json(c);
    RunOutcome out;
    const fs::path dir = fs::path(root) / (to_string(c.benchmark) + "-" + to_string(c.pipeline) + "-" + config_hash(c));
    fs::create_directories(dir);
    out.directory = dir.string();

    std::vector<std::string> warnings;
    auto stage = [&](const std::string& name, auto&& body) {
        if (!out.ok) return;
        StageRecord rec{name, true, ""};
        try {
            body();
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.message = e.what();
            out.ok = false;
        }
        out.stages.push_back(rec);
    };

    const PdeSpec spec = benchmark_spec(c);
    const bool rescale = c.benchmark == Benchmark::Groundwater;
    GridField truth, work, grid_data;
    SampleSet samples;
    NetworkParams net;
    std::vector<DerivativeJet> jets;

    stage("generate", [&] {
        truth = solve(spec, benchmark_grid(c.benchmark));
        save_grid_field((dir / "field.grid").string(), truth);
        work = rescale ? rescale_groundwater(truth) : truth;
    });

    stage("sample", [&] {
        const auto& s = c.sampling;
        if (c.pipeline == Pipeline::DirectStridge) {
            if (s.mode == SamplingMode::Full) grid_data = work;
            else if (s.mode == SamplingMode::Decimate) grid_data = decimate(work, s.stride_x, s.stride_t);
            else throw ConfigurationError("direct STRidge needs gridded data (sampling mode full or decimate)");
            if (c.noise.delta > 0.0) grid_data = add_noise(grid_data, c.noise);
            save_grid_field((dir / "samples.grid").string(), grid_data);
            return;
        }
        switch (s.mode) {
            case SamplingMode::Random: samples = random_subsample(work, s.n, s.seed); break;
            case SamplingMode::Full: samples = full_samples(work); break;
            case SamplingMode::Lines: {
                const LinePreset p = line_preset(s.preset, work.spec);
                samples = line_sample(work, p.axis, p.positions);
                break;
            }
            case SamplingMode::Decimate:
                samples = full_samples(decimate(work, s.stride_x, s.stride_t));
                samples.provenance = Provenance::Decimated;
                break;
        }
        if (c.noise.delta > 0.0) samples = add_noise(samples, c.noise);
        save_sample_set((dir / "samples.txt").string(), samples);
    });

    if (c.pipeline != Pipeline::DirectStridge) {
        stage("train", [&] {
            const NetworkParams init = init_preset(c.net_preset, c.init_seed, c.first_layer_frequency);
            const TrainResult tr = train(init, samples, c.train);
            net = tr.params;
            save_network((dir / "net.json").string(), net);
            std::ostringstream loss;
            loss << "step\tloss\n";
            for (const auto& r : tr.history) loss << r.step << "\t" << format_double(r.loss) << "\n";
            write_text(dir / "loss.tsv", loss.str());
        });
    }

    stage("jets", [&] {
        switch (c.pipeline) {
            case Pipeline::DlPde: jets = generate_metadata(net, *c.metadata, DomainPolicy::Warn, &warnings); break;
            case Pipeline::DlPdeNoMetadata: jets = sample_jets(net, samples); break;
            case Pipeline::DirectStridge: jets = fd_jets(grid_data, c.fd); break;
        }
        if (c.write_jets) save_jets((dir / "jets.txt").string(), jets, to_string(c.pipeline));
    });

    stage("discover", [&] {
        out.result = discover(assemble(jets, catalog_by_name(c.catalog)), c.stridge);
        save_result((dir / "result.txt").string(), *out.result);
        for (const auto& w : out.result->warnings) warnings.push_back(w);
    });

    if (c.evaluate) {
        stage("evaluate", [&] {
            out.score = score(*out.result, truth_coefficients(c));
            try {
                const GridField learned = solve_learned(*out.result, spec, truth.spec);
                save_grid_field((dir / "learned.grid").string(), learned);
                out.error = relative_error(truth, learned);
                save_grid_field((dir / "error.grid").string(), out.error->as_grid_field());
            } catch (const DivergenceError& e) {
                out.error = diverged_error(truth.spec, e.time());
            }
        });
    }

    std::ostringstream report;
    if (out.result) {
        report << "equation " << render_equation(out.result->catalog, out.result->support,
                                                 out.result->coefficients, symbol_for(c.benchmark))
               << "\n";
        if (rescale) report << "variables starred (x* = x/dx, h* = dx h)\n";
    }
    if (out.score)
        report << "support_exact " << (out.score->support_exact ? 1 : 0) << "\n"
               << "max_coeff_rel_error " << format_double(out.score->max_coeff_rel_error) << "\n";
    if (out.error) report << "relative_error " << out.error->summary() << "\n";
    for (const auto& st : out.stages)
        if (!st.ok) report << "failed " << st.name << ": " << st.message << "\n";
    write_text(dir / "report.txt", report.str());

    json manifest;
    manifest["config"] = json::parse(config_json);
    manifest["hash"] = config_hash(c);
    manifest["status"] = out.ok ? "ok" : "error";
    json stages = json::array();
    for (const auto& st : out.stages) stages.push_back({{"stage", st.name}, {"ok", st.ok}, {"message", st.message}});
    manifest["stages"] = stages;
    manifest["warnings"] = warnings;
    if (out.result) manifest["equation"] = out.result->equation;
    if (out.score) {
        manifest["support_exact"] = out.score->support_exact;
        manifest["max_coeff_rel_error"] = format_double(out.score->max_coeff_rel_error);
    }
    if (out.error) {
        manifest["max_relative_error"] = format_double(out.error->max_error);
        manifest["mean_relative_error"] = format_double(out.error->mean_error);
        manifest["diverged"] = out.error->diverged;
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------- sweep

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
    ExperimentConfig c = base;
    switch (axis) {
        case SweepAxis::DataVolume:
            if (!(value >= 1.0)) throw ConfigurationError("data_volume values must be >= 1");
            c.sampling.mode = SamplingMode::Random;
            c.sampling.n = static_cast<long>(std::llround(value));
            break;
        case SweepAxis::NoiseLevel:
            if (!(value >= 0.0)) throw ConfigurationError("noise_level values must be >= 0");
            c.noise.delta = value;
            break;
        case SweepAxis::Decimation:
            if (!(value >= 1.0)) throw ConfigurationError("decimation values must be >= 1");
            c.sampling.mode = SamplingMode::Decimate;
            c.sampling.stride_x = c.sampling.stride_t = static_cast<int>(std::llround(value));
            break;
    }
    return c;
}

std::string sweep_header() {
    return "value\tstatus\tsupport\tcoefficients\tsupport_exact\tmax_coeff_rel_error\tmax_relative_error\tequation";
}

std::string sweep_row(double value, const RunOutcome& o) {
    std::ostringstream os;
    os << format_double(value) << "\t";
    if (!o.ok) {
        for (const auto& st : o.stages)
            if (!st.ok) os << "error(" << st.name << ": " << st.message << ")";
    } else {
        os << "ok";
    }
    os << "\t";
    if (o.result) {
        const auto labels = o.result->support_labels();
        for (std::size_t k = 0; k < labels.size(); ++k) os << (k ? "," : "") << labels[k];
        os << "\t";
        for (std::size_t k = 0; k < labels.size(); ++k)
            os << (k ? "," : "") << labels[k] << "=" << format_coefficient(o.result->coefficients[k]);
    } else {
        os << "\t";
    }
    os << "\t";
    if (o.score) os << (o.score->support_exact ? 1 : 0) << "\t" << format_double(o.score->max_coeff_rel_error);
    else os << "\t";
    os << "\t";
    if (o.error) os << (o.error->diverged ? std::string("diverged") : format_double(o.error->max_error));
    os << "\t";
    if (o.result) os << o.result->equation;
    return os.str();
}

std::vector<RunOutcome> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values,
                              const std::string& root, const std::string& table_path) {
    std::vector<RunOutcome> outcomes(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            try {
                outcomes[k] = run(with_axis_value(base, axis, values[k]), root);
            } catch (const std::exception& e) {
                outcomes[k].ok = false;
                outcomes[k].stages.push_back({"config", false, e.what()});
            }
        }
    };
    const int workers = std::max(1, std::min<int>(base.workers, static_cast<int>(values.size())));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::ostringstream table;
    table << sweep_header() << "\n";
    for (std::size_t k = 0; k < values.size(); ++k) table << sweep_row(values[k], outcomes[k]) << "\n";
    if (!table_path.empty()) write_text(table_path, table.str());
    return outcomes;
}

}  // namespace dlpde
