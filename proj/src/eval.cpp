#include "dlpde/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dlpde {

std::string ErrorField::summary() const {
    if (diverged) return "diverged at t=" + format_double(divergence_time);
    char buf[96];
    std::snprintf(buf, sizeof buf, "max %.4g%% mean %.4g%%", max_error, mean_error);
    return buf;
}

ErrorField relative_error(const GridField& truth, const GridField& learned) {
    if (!same_grid(truth.spec, learned.spec) || truth.values.rows() != learned.values.rows() ||
        truth.values.cols() != learned.values.cols())
        throw GridError("relative_error: fields live on different grids");
    const double range = truth.values.maxCoeff() - truth.values.minCoeff();
    if (!(range > 0.0)) throw DomainError("relative_error: truth field is constant, range undefined");
    ErrorField e;
    e.spec = truth.spec;
    e.values = (100.0 / range) * (truth.values - learned.values).cwiseAbs();
    e.max_error = e.values.maxCoeff();
    e.mean_error = e.values.mean();
    if (!std::isfinite(e.max_error)) {
        e.max_error = std::numeric_limits<double>::infinity();
        e.mean_error = std::numeric_limits<double>::infinity();
    }
    return e;
}

ErrorField diverged_error(const GridSpec& spec, double t) {
    ErrorField e;
    e.spec = spec;
    e.values = Eigen::MatrixXd::Constant(spec.nx, spec.nt, std::numeric_limits<double>::infinity());
    e.max_error = e.mean_error = std::numeric_limits<double>::infinity();
    e.diverged = true;
    e.divergence_time = t;
    return e;
}

Score score(const DiscoveryResult& result, const std::map<std::string, double>& truth) {
    Score s;
    std::vector<std::string> truth_support;
    for (const auto& [label, c] : truth)
        if (c != 0.0) truth_support.push_back(label);
    auto found = result.support_labels();
    std::sort(found.begin(), found.end());
    s.support_exact = found == truth_support;  // std::map keys are already sorted

    bool shared = false;
    double worst = 0.0;
    for (const auto& label : truth_support) {
        if (std::find(found.begin(), found.end(), label) == found.end()) continue;
        shared = true;
        const double c = truth.at(label);
        worst = std::max(worst, std::abs(result.coefficient(label) - c) / std::abs(c));
    }
    s.max_coeff_rel_error = shared ? worst : std::numeric_limits<double>::infinity();
    return s;
}

namespace {

bool support_within(const DiscoveryResult& r, std::initializer_list<const char*> allowed) {
    for (const auto& label : r.support_labels()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || label == a;
        if (!ok) return false;
    }
    return true;
}

}  // namespace

GridField solve_learned(const DiscoveryResult& result, const PdeSpec& truth_spec, const GridSpec& grid,
                        const SpectralOptions& options) {
    switch (truth_spec.kind) {
        case PdeKind::GroundwaterFlow: {
            if (!support_within(result, {"u_xx"}) || !(result.coefficient("u_xx") > 0.0))
                throw UsageError("learned groundwater PDE is not a forward diffusion equation");
            PdeSpec s = truth_spec;
            const double ss = s.param("S_s");
            s.params["K"] = result.coefficient("u_xx") * grid.dx * grid.dx * ss;
            return solve_groundwater(s, grid);
        }
        case PdeKind::ConvectionDiffusion: {
            if (!support_within(result, {"u_x", "u_xx"}) || !(result.coefficient("u_xx") > 0.0))
                throw UsageError("learned convection-diffusion PDE has no closed-form solution");
            // same initial plume: keep its variance 2 D t_off and its centre at t = 0
            PdeSpec s = truth_spec;
            const double v = truth_spec.param("v_x"), d = truth_spec.param("D_L");
            const double t_off = truth_spec.param("t_off");
            const double centre0 = truth_spec.param("x_src") + v * t_off;
            const double v_new = -result.coefficient("u_x"), d_new = result.coefficient("u_xx");
            s.params["v_x"] = v_new;
            s.params["D_L"] = d_new;
            s.params["t_off"] = d * t_off / d_new;
            s.params["x_src"] = centre0 - v_new * s.params["t_off"];
            return solve_convection_diffusion(s, grid);
        }
        case PdeKind::Burgers:
        case PdeKind::KdV: {
            const auto ic = truth_spec.ic ? truth_spec.ic
                                          : (truth_spec.kind == PdeKind::Burgers ? std::function<double(double)>(burgers_default_ic)
                                                                                 : std::function<double(double)>(kdv_default_ic));
            SpectralOptions opts = options;
            if (truth_spec.params.count("substeps")) opts.substeps = static_cast<int>(truth_spec.param("substeps"));
            return solve_generic(result.dense(), result.catalog, grid, ic, opts);
        }
        default:
            throw UsageError("solve_learned: unsupported benchmark kind");
    }
}

ErrorField evaluate_learned(const DiscoveryResult& result, const PdeSpec& truth_spec, const GridField& truth,
                            const SpectralOptions& options) {
    try {
        return relative_error(truth, solve_learned(result, truth_spec, truth.spec, options));
    } catch (const DivergenceError& e) {
        return diverged_error(truth.spec, e.time());
    }
}

}  // namespace dlpde
