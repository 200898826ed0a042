#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dlpde/library.hpp"
#include "dlpde/net.hpp"

namespace dlpde {

/// Truncated Taylor expansion in x to third order, c[k] = (1/k!) d^k f/dx^k,
/// carried together with the first derivative in t. Mixed x-t terms are
/// dropped; nothing downstream needs them.
template <typename Scalar>
struct SpaceTimeJet {
    std::array<Scalar, 4> c{};
    Scalar dt{};

    SpaceTimeJet() = default;
    explicit SpaceTimeJet(Scalar value) : c{value, Scalar(0), Scalar(0), Scalar(0)}, dt(Scalar(0)) {}

    static SpaceTimeJet x_variable(Scalar x) {
        SpaceTimeJet j(x);
        j.c[1] = Scalar(1);
        return j;
    }
    static SpaceTimeJet t_variable(Scalar t) {
        SpaceTimeJet j(t);
        j.dt = Scalar(1);
        return j;
    }

    Scalar value() const { return c[0]; }
    Scalar d_x() const { return c[1]; }
    Scalar d_xx() const { return Scalar(2) * c[2]; }
    Scalar d_xxx() const { return Scalar(6) * c[3]; }
    Scalar d_t() const { return dt; }

    friend SpaceTimeJet operator+(const SpaceTimeJet& a, const SpaceTimeJet& b) {
        SpaceTimeJet r;
        for (int k = 0; k < 4; ++k) r.c[k] = a.c[k] + b.c[k];
        r.dt = a.dt + b.dt;
        return r;
    }
    friend SpaceTimeJet operator-(const SpaceTimeJet& a, const SpaceTimeJet& b) {
        SpaceTimeJet r;
        for (int k = 0; k < 4; ++k) r.c[k] = a.c[k] - b.c[k];
        r.dt = a.dt - b.dt;
        return r;
    }
    friend SpaceTimeJet operator*(const SpaceTimeJet& a, const SpaceTimeJet& b) {
        SpaceTimeJet r;
        r.c[0] = a.c[0] * b.c[0];
        r.c[1] = a.c[0] * b.c[1] + a.c[1] * b.c[0];
        r.c[2] = a.c[0] * b.c[2] + a.c[1] * b.c[1] + a.c[2] * b.c[0];
        r.c[3] = a.c[0] * b.c[3] + a.c[1] * b.c[2] + a.c[2] * b.c[1] + a.c[3] * b.c[0];
        r.dt = a.dt * b.c[0] + a.c[0] * b.dt;
        return r;
    }
};

/// f(a) given f and its first three derivatives at a.c[0].
template <typename Scalar>
SpaceTimeJet<Scalar> compose(const SpaceTimeJet<Scalar>& a, Scalar f0, Scalar f1, Scalar f2, Scalar f3) {
    SpaceTimeJet<Scalar> r;
    const auto& c = a.c;
    r.c[0] = f0;
    r.c[1] = f1 * c[1];
    r.c[2] = f1 * c[2] + Scalar(0.5) * f2 * c[1] * c[1];
    r.c[3] = f1 * c[3] + f2 * c[1] * c[2] + f3 * c[1] * c[1] * c[1] / Scalar(6);
    r.dt = f1 * a.dt;
    return r;
}

template <typename Scalar>
SpaceTimeJet<Scalar> tanh(const SpaceTimeJet<Scalar>& a) {
    using std::tanh;
    const Scalar t = tanh(a.c[0]);
    const Scalar d1 = Scalar(1) - t * t;
    const Scalar d2 = Scalar(-2) * t * d1;
    const Scalar d3 = Scalar(-2) * d1 * d1 + Scalar(4) * t * t * d1;
    return compose(a, t, d1, d2, d3);
}

template <typename Scalar>
SpaceTimeJet<Scalar> sin(const SpaceTimeJet<Scalar>& a) {
    using std::cos;
    using std::sin;
    const Scalar s = sin(a.c[0]);
    const Scalar co = cos(a.c[0]);
    return compose(a, s, co, -s, -co);
}

/// Exact derivatives of the network at (x, t) in problem units.
DerivativeJet jet(const NetworkParams& params, double x, double t);

/// Batched jets at (xs(k), ts(k)); identical values to jet() up to rounding.
std::vector<DerivativeJet> jets(const NetworkParams& params, const Eigen::VectorXd& xs,
                                const Eigen::VectorXd& ts);

/// Regular meta-data grid. x nodes span [x_lo, x_hi] inclusive, or
/// [x_lo, x_hi) when x_half_open (periodic domains).
struct MetaDataSpec {
    double x_lo = 0.0, x_hi = 1.0;
    int nx = 2;
    double t_lo = 0.0, t_hi = 1.0;
    int nt = 2;
    bool x_half_open = false;

    long size() const { return static_cast<long>(nx) * nt; }
    double x(int i) const;
    double t(int j) const;
    void validate() const;
};

/// groundwater, convection_diffusion, burgers, kdv.
MetaDataSpec metadata_preset(const std::string& benchmark);

enum class DomainPolicy { Warn, Error };

/// Jets on the meta-grid, x-fastest. Meta-grids reaching outside the network's
/// training domain produce a warning (or DomainError under DomainPolicy::Error).
std::vector<DerivativeJet> generate_metadata(const NetworkParams& params, const MetaDataSpec& spec,
                                             DomainPolicy policy = DomainPolicy::Warn,
                                             std::vector<std::string>* warnings = nullptr);

/// Jets at the given sample coordinates (the no-meta-data ablation).
std::vector<DerivativeJet> sample_jets(const NetworkParams& params, const SampleSet& samples);

void write_jets(std::ostream& os, const std::vector<DerivativeJet>& jets, const std::string& header = "");
std::vector<DerivativeJet> read_jets(std::istream& is);
void save_jets(const std::string& path, const std::vector<DerivativeJet>& jets, const std::string& header = "");
std::vector<DerivativeJet> load_jets(const std::string& path);

}  // namespace dlpde
