#pragma once

#include <map>
#include <string>

#include "dlpde/grid.hpp"
#include "dlpde/solvers.hpp"
#include "dlpde/stridge.hpp"

namespace dlpde {

/// Pointwise relative error in percent of the truth field's range.
/// A diverged learned solution carries max_error = mean_error = infinity.
struct ErrorField {
    GridSpec spec;
    Eigen::MatrixXd values;
    double max_error = 0.0;
    double mean_error = 0.0;
    bool diverged = false;
    double divergence_time = 0.0;

    GridField as_grid_field() const { return GridField(spec, values); }
    std::string summary() const;
};

/// 100 * |truth - learned| / (max truth - min truth). Throws GridError on
/// mismatched grids and DomainError when the truth is constant.
ErrorField relative_error(const GridField& truth, const GridField& learned);

/// Sentinel for a learned PDE that blew up at time t.
ErrorField diverged_error(const GridSpec& spec, double t);

struct Score {
    bool support_exact = false;
    /// Max relative coefficient error over terms in both supports
    /// (infinity when they share none).
    double max_coeff_rel_error = 0.0;
};

/// truth maps term labels to their true coefficients.
Score score(const DiscoveryResult& result, const std::map<std::string, double>& truth);

/// Solves the discovered PDE with the benchmark's initial and boundary
/// conditions on `grid`. Groundwater coefficients are in starred variables:
/// the h_xx coefficient is K / (S_s dx^2) with dx = grid.dx. Throws
/// DivergenceError if the learned PDE blows up, UsageError if the support
/// falls outside what the benchmark's solver can integrate. Spectral
/// substeps come from the benchmark spec when it sets them.
GridField solve_learned(const DiscoveryResult& result, const PdeSpec& truth_spec, const GridSpec& grid,
                        const SpectralOptions& options = {});

/// solve_learned followed by relative_error; divergence becomes the sentinel.
ErrorField evaluate_learned(const DiscoveryResult& result, const PdeSpec& truth_spec, const GridField& truth,
                            const SpectralOptions& options = {});

}  // namespace dlpde
