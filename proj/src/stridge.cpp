#include "dlpde/stridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dlpde/grid.hpp"

namespace dlpde {

void StridgeConfig::validate() const {
    if (!(lambda >= 0.0)) throw ParameterError("stridge: lambda must be >= 0");
    if (!(tol > 0.0)) throw ParameterError("stridge: tol must be positive");
    if (max_iter < 1) throw ParameterError("stridge: max_iter must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ParameterError("stridge: validation_fraction must lie in (0, 1)");
}

double DiscoveryResult::coefficient(const std::string& label) const {
    for (std::size_t k = 0; k < support.size(); ++k)
        if (catalog[static_cast<std::size_t>(support[k])].label() == label) return coefficients[k];
    return 0.0;
}

Eigen::VectorXd DiscoveryResult::dense() const {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog.size()));
    for (std::size_t k = 0; k < support.size(); ++k) xi(support[k]) = coefficients[k];
    return xi;
}

std::vector<std::string> DiscoveryResult::support_labels() const {
    std::vector<std::string> out;
    for (int j : support) out.push_back(catalog[static_cast<std::size_t>(j)].label());
    return out;
}

std::string format_coefficient(double c) {
    char buf[48];
    if (c != 0.0 && std::abs(c) < 0.01)
        std::snprintf(buf, sizeof buf, "%.3g", c);
    else
        std::snprintf(buf, sizeof buf, "%.3f", c);
    return buf;
}

namespace {

std::string with_symbol(const std::string& label, const std::string& symbol) {
    if (symbol == "u") return label;
    std::string out;
    for (char ch : label) {
        if (ch == 'u') out += symbol;
        else out += ch;
    }
    return out;
}

}  // namespace

std::string render_equation(const TermCatalog& catalog, const std::vector<int>& support,
                            const std::vector<double>& coefficients, const std::string& symbol) {
    std::string eq = symbol + "_t =";
    if (support.empty()) return eq + " 0";
    for (std::size_t k = 0; k < support.size(); ++k) {
        const double c = coefficients[k];
        const std::string mag = format_coefficient(std::abs(c));
        const std::string sign = c < 0 ? "-" : "+";
        if (k == 0) eq += c < 0 ? " -" : " ";
        else eq += " " + sign + " ";
        const auto& term = catalog[static_cast<std::size_t>(support[k])];
        eq += mag;
        if (!(term.u_power == 0 && term.derivative_order == 0)) eq += "*" + with_symbol(term.label(), symbol);
    }
    return eq;
}

DiscoveryResult stridge(const FeatureSystem& system, const StridgeConfig& config) {
    config.validate();
    const FeatureSystem work = config.normalize ? normalize(system) : system;
    const Eigen::Index m = work.cols();

    DiscoveryResult result;
    result.catalog = system.catalog;
    std::vector<int> support(static_cast<std::size_t>(m));
    std::iota(support.begin(), support.end(), 0);
    Eigen::VectorXd coef;
    bool converged = false;

    auto columns = [&](const std::vector<int>& s) {
        Eigen::MatrixXd sub(work.rows(), static_cast<Eigen::Index>(s.size()));
        for (std::size_t k = 0; k < s.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = work.theta.col(s[k]);
        return sub;
    };

    while (result.iterations_used < config.max_iter) {
        coef = ridge(columns(support), work.ut, config.lambda);
        ++result.iterations_used;
        const double threshold =
            config.tol_mode == TolMode::Relative ? config.tol * coef.cwiseAbs().maxCoeff() : config.tol;
        std::vector<int> keep;
        Eigen::VectorXd kept_coef(coef.size());
        for (std::size_t k = 0; k < support.size(); ++k)
            if (std::abs(coef(static_cast<Eigen::Index>(k))) >= threshold) {
                kept_coef(static_cast<Eigen::Index>(keep.size())) = coef(static_cast<Eigen::Index>(k));
                keep.push_back(support[k]);
            }
        if (keep.size() == support.size()) {
            converged = true;
            break;
        }
        support = std::move(keep);
        coef = kept_coef.head(static_cast<Eigen::Index>(support.size())).eval();
        if (support.empty()) {
            converged = true;
            break;
        }
    }
    result.converged = converged;
    if (!converged)
        result.warnings.push_back("support did not stabilize within " + std::to_string(config.max_iter) +
                                  " iterations");

    if (!support.empty() && config.final_refit) {
        try {
            coef = ridge(columns(support), work.ut, 0.0);
        } catch (const RankError&) {
            result.warnings.push_back("final least-squares refit is rank deficient; keeping ridge coefficients");
        }
    }

    result.support = support;
    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(work.rows());
    if (!support.empty()) fitted = columns(support) * coef;
    for (std::size_t k = 0; k < support.size(); ++k)
        result.coefficients.push_back(coef(static_cast<Eigen::Index>(k)) / work.column_scales(support[k]));
    result.residual_rms = work.rows() > 0 ? std::sqrt((fitted - work.ut).squaredNorm() / work.rows()) : 0.0;
    if (support.empty()) result.warnings.push_back("no PDE found: every term was thresholded away");
    result.equation = render_equation(result.catalog, result.support, result.coefficients);
    return result;
}

DiscoveryResult sweep_tol(const FeatureSystem& system, const StridgeConfig& config) {
    config.validate();
    if (config.tol_sweep.empty()) throw ParameterError("sweep_tol: empty tolerance list");
    auto with_tol = [&](double tol) {
        StridgeConfig c = config;
        c.tol = tol;
        c.tol_sweep.clear();
        return c;
    };
    if (config.tol_sweep.size() == 1) return stridge(system, with_tol(config.tol_sweep.front()));

    const Eigen::Index n = system.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(config.split_seed);
    for (Eigen::Index k = n - 1; k > 0; --k)
        std::swap(order[static_cast<std::size_t>(k)], order[rng.below(static_cast<std::uint64_t>(k + 1))]);
    const auto n_val = std::clamp<Eigen::Index>(
        static_cast<Eigen::Index>(std::llround(config.validation_fraction * static_cast<double>(n))), 1, n - 1);
    std::vector<Eigen::Index> val_rows(order.begin(), order.begin() + n_val);
    std::vector<Eigen::Index> fit_rows(order.begin() + n_val, order.end());
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(fit_rows.begin(), fit_rows.end());
    const FeatureSystem fit = select_rows(system, fit_rows);
    const FeatureSystem val = select_rows(system, val_rows);

    auto val_rms = [&](const Eigen::VectorXd& xi) {
        const Eigen::VectorXd pred = val.theta * xi.cwiseProduct(system.column_scales);
        return std::sqrt((pred - val.ut).squaredNorm() / static_cast<double>(val.rows()));
    };

    double kappa = config.complexity_penalty;
    if (kappa < 0.0) {
        double best_single = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < system.cols(); ++j) {
            const double norm2 = fit.theta.col(j).squaredNorm();
            if (!(norm2 > 0.0)) continue;
            Eigen::VectorXd xi = Eigen::VectorXd::Zero(system.cols());
            xi(j) = fit.theta.col(j).dot(fit.ut) / norm2 / system.column_scales(j);
            best_single = std::min(best_single, val_rms(xi));
        }
        kappa = std::isfinite(best_single) ? best_single / static_cast<double>(system.cols()) : 0.0;
    }

    double best_score = std::numeric_limits<double>::infinity();
    double best_tol = 0.0;
    for (double tol : config.tol_sweep) {
        const DiscoveryResult r = stridge(fit, with_tol(tol));
        if (!r.found()) continue;
        const double score = val_rms(r.dense()) + kappa * static_cast<double>(r.support.size());
        if (score < best_score) {
            best_score = score;
            best_tol = tol;
        }
    }
    if (!std::isfinite(best_score)) {
        DiscoveryResult none;
        none.catalog = system.catalog;
        none.warnings.push_back("no PDE found for any tolerance in the sweep");
        none.equation = render_equation(none.catalog, none.support, none.coefficients);
        return none;
    }
    DiscoveryResult chosen = stridge(system, with_tol(best_tol));
    chosen.warnings.push_back("tolerance selected by sweep: " + format_double(best_tol));
    return chosen;
}

DiscoveryResult discover(const FeatureSystem& system, const StridgeConfig& config) {
    return config.tol_sweep.empty() ? stridge(system, config) : sweep_tol(system, config);
}

void write_result(std::ostream& os, const DiscoveryResult& r) {
    os << "# discovery result\n";
    os << "catalog";
    for (const auto& label : r.catalog.labels()) os << " " << label;
    os << "\nsupport";
    for (int j : r.support) os << " " << j;
    os << "\nsupport_labels";
    for (const auto& label : r.support_labels()) os << " " << label;
    os << "\ncoefficients";
    for (double c : r.coefficients) os << " " << format_double(c);
    os << "\niterations " << r.iterations_used << "\n"
       << "residual_rms " << format_double(r.residual_rms) << "\n"
       << "converged " << (r.converged ? 1 : 0) << "\n"
       << "warnings " << r.warnings.size() << "\n";
    for (const auto& w : r.warnings) os << "warning " << w << "\n";
    os << "equation " << r.equation << "\n";
}

DiscoveryResult read_result(std::istream& is) {
    DiscoveryResult r;
    std::string line;
    bool have_catalog = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "catalog") {
            std::string label;
            while (ls >> label) r.catalog.terms.push_back(parse_term_label(label));
            have_catalog = true;
        } else if (key == "support") {
            int j;
            while (ls >> j) r.support.push_back(j);
        } else if (key == "coefficients") {
            double c;
            while (ls >> c) r.coefficients.push_back(c);
        } else if (key == "iterations") {
            ls >> r.iterations_used;
        } else if (key == "residual_rms") {
            ls >> r.residual_rms;
        } else if (key == "converged") {
            int c = 1;
            ls >> c;
            r.converged = c != 0;
        } else if (key == "warning") {
            std::string rest;
            std::getline(ls >> std::ws, rest);
            r.warnings.push_back(rest);
        } else if (key == "equation") {
            std::getline(ls >> std::ws, r.equation);
        }
    }
    if (!have_catalog) throw FormatError("result: missing catalog line");
    if (r.support.size() != r.coefficients.size()) throw FormatError("result: support/coefficient mismatch");
    for (int j : r.support)
        if (j < 0 || j >= static_cast<int>(r.catalog.size())) throw FormatError("result: support index out of range");
    return r;
}

void save_result(const std::string& path, const DiscoveryResult& result) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_result(os, result);
}

DiscoveryResult load_result(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_result(is);
}

}  // namespace dlpde
