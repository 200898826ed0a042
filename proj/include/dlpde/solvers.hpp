#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "dlpde/grid.hpp"
#include "dlpde/library.hpp"

namespace dlpde {

enum class PdeKind { GroundwaterFlow, ConvectionDiffusion, Burgers, KdV, GenericLibraryRhs };

std::string to_string(PdeKind kind);

/// Dirichlet values for the groundwater solver. Missing values are taken
/// from the initial condition at the end nodes.
struct DirichletBc {
    std::optional<double> left;
    std::optional<double> right;
};

/// A benchmark problem. Coefficients live in `params` by name:
///   GroundwaterFlow     K, S_s, refine_x, refine_t
///   ConvectionDiffusion v_x, D_L, m, x_src, t_off
///   Burgers             a, substeps
///   KdV                 b, substeps
/// An empty `ic` selects the benchmark's default initial condition.
struct PdeSpec {
    PdeKind kind = PdeKind::Burgers;
    std::map<std::string, double> params;
    std::function<double(double)> ic;
    DirichletBc bc;

    double param(const std::string& name) const;
};

PdeSpec groundwater_spec(double K = 1.0, double S_s = 0.01);
PdeSpec convection_diffusion_spec(double v_x = 1.0, double D_L = 0.25);
PdeSpec burgers_spec(double a = 0.1);
PdeSpec kdv_spec(double b = 0.0025);

/// Benchmark data grids.
GridSpec groundwater_grid();           // x in [0, 1000], dx = 10, nx = 101; t in [0, 200], nt = 100
GridSpec convection_diffusion_grid();  // x in [0, 29.75], dx = 0.25; t in [0, 14.9], dt = 0.1
GridSpec burgers_grid();               // x in [-8, 8), nx = 256; t in [0, 10], nt = 201
GridSpec kdv_grid();                   // x in [-1, 1), nx = 512; t in [0, 1], nt = 201

/// Default initial conditions.
double groundwater_default_ic(double x);
double burgers_default_ic(double x);
double kdv_default_ic(double x);

/// Implicit Crank-Nicolson solve of K h_xx = S_s h_t with Dirichlet ends.
/// The integration runs on a grid refined by (refine_x, refine_t) and is
/// sampled back onto the requested nodes.
GridField solve_groundwater(const PdeSpec& spec, const GridSpec& grid);

/// Closed-form translating Gaussian plume.
GridField solve_convection_diffusion(const PdeSpec& spec, const GridSpec& grid);

GridField solve_burgers(const PdeSpec& spec, const GridSpec& grid);
GridField solve_kdv(const PdeSpec& spec, const GridSpec& grid);

/// Dispatches on spec.kind (not GenericLibraryRhs).
GridField solve(const PdeSpec& spec, const GridSpec& grid);

struct SpectralOptions {
    /// Internal time steps per output interval dt.
    int substeps = 50;
    /// Divergence threshold on |u|.
    double blowup = 1e6;
};

/// Integrates u_t = sum_j coeffs(j) * term_j(u) on a periodic grid with
/// Fourier derivatives and integrating-factor RK4 in time. Terms that are
/// linear in u are integrated exactly through the integrating factor; terms
/// of the form u^p u_x are evaluated in conservation form
/// d/dx(u^(p+1))/(p+1). Throws DivergenceError on blow-up.
GridField solve_generic(const Eigen::VectorXd& coeffs, const TermCatalog& catalog,
                        const GridSpec& grid, const Eigen::VectorXd& initial,
                        const SpectralOptions& options = {});

/// Same, with the initial condition given as a function of x.
GridField solve_generic(const Eigen::VectorXd& coeffs, const TermCatalog& catalog,
                        const GridSpec& grid, const std::function<double(double)>& ic,
                        const SpectralOptions& options = {});

/// Trapezoidal integral over x of time slice j (periodic grids wrap).
double integrate_x(const GridField& field, int j);
/// Same for u^2.
double integrate_x_squared(const GridField& field, int j);

}  // namespace dlpde
