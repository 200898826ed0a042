#include "dlpde/solvers.hpp"

#include <Eigen/Sparse>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace dlpde {

std::string to_string(PdeKind kind) {
    switch (kind) {
        case PdeKind::GroundwaterFlow: return "groundwater";
        case PdeKind::ConvectionDiffusion: return "convection_diffusion";
        case PdeKind::Burgers: return "burgers";
        case PdeKind::KdV: return "kdv";
        case PdeKind::GenericLibraryRhs: return "generic";
    }
    return "unknown";
}

double PdeSpec::param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw ParameterError("missing PDE parameter '" + name + "'");
    if (!std::isfinite(it->second)) throw ParameterError("PDE parameter '" + name + "' is not finite");
    return it->second;
}

PdeSpec groundwater_spec(double K, double S_s) {
    return {PdeKind::GroundwaterFlow, {{"K", K}, {"S_s", S_s}, {"refine_x", 4}, {"refine_t", 16}}, {}, {}};
}

PdeSpec convection_diffusion_spec(double v_x, double D_L) {
    return {PdeKind::ConvectionDiffusion,
            {{"v_x", v_x}, {"D_L", D_L}, {"m", 1.0}, {"x_src", -8.0}, {"t_off", 10.0}}, {}, {}};
}

PdeSpec burgers_spec(double a) { return {PdeKind::Burgers, {{"a", a}, {"substeps", 50}}, {}, {}}; }

PdeSpec kdv_spec(double b) { return {PdeKind::KdV, {{"b", b}, {"substeps", 200}}, {}, {}}; }

GridSpec groundwater_grid() { return {0.0, 10.0, 101, 0.0, 200.0 / 99.0, 100, false}; }
GridSpec convection_diffusion_grid() { return {0.0, 0.25, 120, 0.0, 0.1, 150, false}; }
GridSpec burgers_grid() { return {-8.0, 16.0 / 256.0, 256, 0.0, 0.05, 201, true}; }
GridSpec kdv_grid() { return {-1.0, 2.0 / 512.0, 512, 0.0, 0.005, 201, true}; }

double groundwater_default_ic(double x) {
    // Ramp from 1 m at x = 0 to 0 m at x = 1000 m with a 1 m deep drawdown
    // cone at 500 m. Centring the cone where the ramp is half height keeps
    // h*h_xx far from parallel to h_xx; a mound on top of the ramp makes the
    // two library columns nearly collinear.
    const double ramp = 1.0 - x / 1000.0;
    const double cone = std::exp(-0.5 * std::pow((x - 500.0) / 100.0, 2));
    return ramp - cone;
}

double burgers_default_ic(double x) { return std::exp(-(x + 2.0) * (x + 2.0)); }

double kdv_default_ic(double x) { return std::cos(std::numbers::pi * x); }

namespace {

Eigen::VectorXd sample_ic(const std::function<double(double)>& ic, const GridSpec& grid) {
    Eigen::VectorXd u(grid.nx);
    for (int i = 0; i < grid.nx; ++i) u(i) = ic(grid.x(i));
    return u;
}

int positive_count(const PdeSpec& spec, const std::string& name) {
    const double v = spec.param(name);
    if (v < 1.0 || v != std::floor(v)) throw ParameterError(name + " must be a positive integer");
    return static_cast<int>(v);
}

}  // namespace

GridField solve_groundwater(const PdeSpec& spec, const GridSpec& grid) {
    if (spec.kind != PdeKind::GroundwaterFlow) throw ParameterError("solve_groundwater: wrong PDE kind");
    grid.validate();
    const double K = spec.param("K");
    const double S_s = spec.param("S_s");
    if (!(K > 0.0) || !(S_s > 0.0)) throw ParameterError("groundwater: K and S_s must be positive");
    const int rx = spec.params.count("refine_x") ? positive_count(spec, "refine_x") : 1;
    const int rt = spec.params.count("refine_t") ? positive_count(spec, "refine_t") : 1;
    const auto ic = spec.ic ? spec.ic : std::function<double(double)>(groundwater_default_ic);

    const int nf = (grid.nx - 1) * rx + 1;
    const double dxf = grid.dx / rx;
    const double dtf = grid.dt / rt;
    const double r = (K / S_s) * dtf / (dxf * dxf);

    Eigen::VectorXd h(nf);
    for (int i = 0; i < nf; ++i) h(i) = ic(grid.x0 + i * dxf);
    const double left = spec.bc.left.value_or(h(0));
    const double right = spec.bc.right.value_or(h(nf - 1));
    h(0) = left;
    h(nf - 1) = right;

    // (I - r/2 A) h^{n+1} = (I + r/2 A) h^n for the interior, A = tridiag(1, -2, 1).
    const int m = nf - 2;
    Eigen::SparseMatrix<double> lhs(m, m);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(3 * m);
    for (int k = 0; k < m; ++k) {
        entries.emplace_back(k, k, 1.0 + r);
        if (k > 0) entries.emplace_back(k, k - 1, -0.5 * r);
        if (k + 1 < m) entries.emplace_back(k, k + 1, -0.5 * r);
    }
    lhs.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
    if (solver.info() != Eigen::Success) throw ParameterError("groundwater: factorization failed");

    GridField out(grid);
    auto store = [&](int j) {
        for (int i = 0; i < grid.nx; ++i) out(i, j) = h(i * rx);
    };
    store(0);
    Eigen::VectorXd rhs(m);
    for (int j = 1; j < grid.nt; ++j) {
        for (int s = 0; s < rt; ++s) {
            for (int k = 0; k < m; ++k)
                rhs(k) = (1.0 - r) * h(k + 1) + 0.5 * r * (h(k) + h(k + 2));
            rhs(0) += 0.5 * r * left;
            rhs(m - 1) += 0.5 * r * right;
            h.segment(1, m) = solver.solve(rhs);
        }
        store(j);
    }
    return out;
}

GridField solve_convection_diffusion(const PdeSpec& spec, const GridSpec& grid) {
    if (spec.kind != PdeKind::ConvectionDiffusion)
        throw ParameterError("solve_convection_diffusion: wrong PDE kind");
    grid.validate();
    const double v = spec.param("v_x");
    const double D = spec.param("D_L");
    const double m = spec.param("m");
    const double x_src = spec.param("x_src");
    const double t_off = spec.param("t_off");
    if (!(D > 0.0)) throw ParameterError("convection-diffusion: D_L must be positive");
    if (!(t_off > 0.0)) throw ParameterError("convection-diffusion: t_off must be positive");

    GridField out(grid);
    for (int j = 0; j < grid.nt; ++j) {
        const double tau = grid.t(j) + t_off;
        if (!(tau > 0.0)) throw ParameterError("convection-diffusion: grid reaches t <= -t_off");
        const double peak = m / std::sqrt(4.0 * std::numbers::pi * D * tau);
        const double centre = x_src + v * tau;
        for (int i = 0; i < grid.nx; ++i) {
            const double d = grid.x(i) - centre;
            out(i, j) = peak * std::exp(-d * d / (4.0 * D * tau));
        }
    }
    return out;
}

namespace {

using Complex = std::complex<double>;
using Spectrum = Eigen::ArrayXcd;

/// Right-hand side of u_t = L u + N(u) in Fourier space.
class SpectralRhs {
public:
    SpectralRhs(const Eigen::VectorXd& coeffs, const TermCatalog& catalog, const GridSpec& grid)
        : n_(grid.nx), wave_(grid.nx), linear_(Spectrum::Zero(grid.nx)) {
        const double L = grid.length();
        for (int j = 0; j < n_; ++j) {
            const int k = j <= n_ / 2 ? j : j - n_;
            wave_(j) = 2.0 * std::numbers::pi * k / L;
        }
        for (std::size_t j = 0; j < catalog.size(); ++j) {
            const double c = coeffs(static_cast<Eigen::Index>(j));
            if (c == 0.0) continue;
            const auto& term = catalog[j];
            const int p = term.u_power;
            const int q = term.derivative_order;
            if (p == 0 && q == 0) {
                constant_ += c;
            } else if ((p == 0 && q >= 1) || (p == 1 && q == 0)) {
                linear_ += c * derivative_factor(q);
            } else if (q == 1) {
                conservative_.push_back({p, c});
            } else {
                pointwise_.push_back({term, c});
                max_order_ = std::max(max_order_, q);
            }
        }
    }

    const Spectrum& linear() const { return linear_; }

    /// Evaluates N(u_hat). `u_real` receives the physical-space solution.
    Spectrum operator()(const Spectrum& u_hat, Eigen::VectorXd& u_real) {
        u_real = inverse(u_hat);
        Spectrum result = Spectrum::Zero(n_);
        if (!pointwise_.empty() || constant_ != 0.0) {
            Eigen::VectorXd sum = Eigen::VectorXd::Constant(n_, constant_);
            std::vector<Eigen::VectorXd> derivs(4);
            derivs[0] = u_real;
            for (int q = 2; q <= max_order_; ++q) derivs[q] = inverse(u_hat * derivative_factor(q));
            for (const auto& [term, c] : pointwise_) {
                const auto& d = derivs[term.derivative_order == 0 ? 0 : term.derivative_order];
                for (int i = 0; i < n_; ++i)
                    sum(i) += c * evaluate_term<double>(term, u_real(i), d(i));
            }
            result += forward(sum);
        }
        if (!conservative_.empty()) {
            Eigen::VectorXd flux = Eigen::VectorXd::Zero(n_);
            for (const auto& [p, c] : conservative_)
                flux.array() += (c / (p + 1)) * u_real.array().pow(p + 1);
            result += forward(flux) * derivative_factor(1);
        }
        return result;
    }

    Spectrum forward(const Eigen::VectorXd& u) {
        buffer_in_.assign(u.data(), u.data() + n_);
        fft_.fwd(buffer_out_, buffer_in_);
        return Eigen::Map<const Spectrum>(buffer_out_.data(), n_);
    }

    Eigen::VectorXd inverse(const Spectrum& u_hat) {
        buffer_out_.assign(u_hat.data(), u_hat.data() + n_);
        fft_.inv(buffer_in_, buffer_out_);
        Eigen::VectorXd u(n_);
        for (int i = 0; i < n_; ++i) u(i) = buffer_in_[static_cast<std::size_t>(i)].real();
        return u;
    }

private:
    /// (i k)^q with the Nyquist mode removed from odd derivatives.
    Spectrum derivative_factor(int q) const {
        Spectrum f(n_);
        for (int j = 0; j < n_; ++j) {
            const bool nyquist = (n_ % 2 == 0) && j == n_ / 2;
            f(j) = (nyquist && q % 2 == 1) ? Complex(0.0) : std::pow(Complex(0.0, wave_(j)), q);
        }
        return f;
    }

    struct Pointwise {
        TermSpec term;
        double coeff;
    };
    struct Conservative {
        int power;
        double coeff;
    };

    int n_;
    Eigen::ArrayXd wave_;
    Spectrum linear_;
    double constant_ = 0.0;
    std::vector<Conservative> conservative_;
    std::vector<Pointwise> pointwise_;
    int max_order_ = 0;
    Eigen::FFT<double> fft_;
    std::vector<Complex> buffer_in_;
    std::vector<Complex> buffer_out_;
};

void check_blowup(const Eigen::VectorXd& u, double limit, double time) {
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (!std::isfinite(u(i)) || std::abs(u(i)) > limit)
            throw DivergenceError("solution diverged at t = " + format_double(time), time);
}

}  // namespace

GridField solve_generic(const Eigen::VectorXd& coeffs, const TermCatalog& catalog,
                        const GridSpec& grid, const Eigen::VectorXd& initial,
                        const SpectralOptions& options) {
    grid.validate();
    catalog.validate();
    if (!grid.periodic_x) throw ConfigurationError("spectral solver requires a periodic grid");
    if (coeffs.size() != static_cast<Eigen::Index>(catalog.size()))
        throw ParameterError("coefficient vector length " + std::to_string(coeffs.size()) +
                             " does not match catalog size " + std::to_string(catalog.size()));
    if (initial.size() != grid.nx) throw ParameterError("initial condition length does not match nx");
    if (!coeffs.allFinite()) throw ParameterError("non-finite PDE coefficient");
    if (options.substeps < 1) throw ParameterError("substeps must be >= 1");

    SpectralRhs rhs(coeffs, catalog, grid);
    const double h = grid.dt / options.substeps;
    const Spectrum e_half = (rhs.linear() * (0.5 * h)).exp();
    const Spectrum e_full = e_half * e_half;

    GridField out(grid);
    out.values.col(0) = initial;
    Spectrum u_hat = rhs.forward(initial);
    Eigen::VectorXd u_real(grid.nx);
    double time = grid.t0;
    for (int j = 1; j < grid.nt; ++j) {
        for (int s = 0; s < options.substeps; ++s) {
            const Spectrum k1 = h * rhs(u_hat, u_real);
            check_blowup(u_real, options.blowup, time);
            const Spectrum k2 = h * rhs(e_half * (u_hat + 0.5 * k1), u_real);
            const Spectrum k3 = h * rhs(e_half * u_hat + 0.5 * k2, u_real);
            const Spectrum k4 = h * rhs(e_full * u_hat + e_half * k3, u_real);
            u_hat = e_full * u_hat + (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4) / 6.0;
            time += h;
        }
        Eigen::VectorXd u = rhs.inverse(u_hat);
        check_blowup(u, options.blowup, grid.t(j));
        out.values.col(j) = u;
    }
    return out;
}

GridField solve_generic(const Eigen::VectorXd& coeffs, const TermCatalog& catalog,
                        const GridSpec& grid, const std::function<double(double)>& ic,
                        const SpectralOptions& options) {
    return solve_generic(coeffs, catalog, grid, sample_ic(ic, grid), options);
}

namespace {

GridField solve_spectral_benchmark(const PdeSpec& spec, const GridSpec& grid,
                                   const std::vector<std::pair<std::string, double>>& terms,
                                   const std::function<double(double)>& default_ic) {
    if (!grid.periodic_x) throw ConfigurationError(to_string(spec.kind) + " requires a periodic grid");
    const auto catalog = default_catalog();
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog.size()));
    for (const auto& [label, c] : terms) coeffs(catalog.index_of(label)) = c;
    SpectralOptions options;
    if (spec.params.count("substeps")) options.substeps = positive_count(spec, "substeps");
    return solve_generic(coeffs, catalog, grid, spec.ic ? spec.ic : default_ic, options);
}

}  // namespace

GridField solve_burgers(const PdeSpec& spec, const GridSpec& grid) {
    if (spec.kind != PdeKind::Burgers) throw ParameterError("solve_burgers: wrong PDE kind");
    const double a = spec.param("a");
    if (!(a > 0.0)) throw ParameterError("burgers: a must be positive");
    return solve_spectral_benchmark(spec, grid, {{"u*u_x", -1.0}, {"u_xx", a}}, burgers_default_ic);
}

GridField solve_kdv(const PdeSpec& spec, const GridSpec& grid) {
    if (spec.kind != PdeKind::KdV) throw ParameterError("solve_kdv: wrong PDE kind");
    const double b = spec.param("b");
    return solve_spectral_benchmark(spec, grid, {{"u*u_x", -1.0}, {"u_xxx", -b}}, kdv_default_ic);
}

GridField solve(const PdeSpec& spec, const GridSpec& grid) {
    switch (spec.kind) {
        case PdeKind::GroundwaterFlow: return solve_groundwater(spec, grid);
        case PdeKind::ConvectionDiffusion: return solve_convection_diffusion(spec, grid);
        case PdeKind::Burgers: return solve_burgers(spec, grid);
        case PdeKind::KdV: return solve_kdv(spec, grid);
        case PdeKind::GenericLibraryRhs: break;
    }
    throw ParameterError("solve: use solve_generic for library right-hand sides");
}

namespace {

double trapezoid(const Eigen::VectorXd& col, const GridSpec& spec) {
    if (spec.periodic_x) return spec.dx * col.sum();
    return spec.dx * (col.sum() - 0.5 * (col(0) + col(col.size() - 1)));
}

}  // namespace

double integrate_x(const GridField& field, int j) { return trapezoid(field.values.col(j), field.spec); }

double integrate_x_squared(const GridField& field, int j) {
    return trapezoid(field.values.col(j).array().square().matrix(), field.spec);
}

}  // namespace dlpde
