#include "dlpde/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dlpde {

void FdConfig::validate() const {
    if (smooth) {
        if (smooth->degree < 0) throw ParameterError("smoothing degree must be >= 0");
        if (smooth->window % 2 == 0) throw ParameterError("smoothing window must be odd");
        if (smooth->window <= smooth->degree) throw ParameterError("smoothing window must exceed the degree");
    }
}

std::vector<double> fd_weights(const std::vector<double>& offsets, int q) {
    const int n = static_cast<int>(offsets.size());
    if (q < 0 || n <= q) throw ParameterError("fd_weights: need more nodes than the derivative order");
    // C(i, k): weight of node i for derivative k.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, q + 1);
    double c1 = 1.0;
    double c4 = offsets[0];
    C(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, q);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            const double c3 = offsets[static_cast<std::size_t>(i)] - offsets[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
                C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
            C(j, 0) = c4 * C(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = C(i, q);
    return w;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

long factorial(int q) {
    long f = 1;
    for (int k = 2; k <= q; ++k) f *= k;
    return f;
}

/// Derivative of order q along one line by finite differences with the
/// given accuracy order. NaN where the boundary policy drops the node.
Eigen::VectorXd fd_line(const Eigen::VectorXd& v, double h, bool periodic, int q, int accuracy,
                        FdBoundary boundary) {
    const int n = static_cast<int>(v.size());
    const int half = (q + 1) / 2 + accuracy / 2 - 1;
    std::vector<double> central;
    for (int k = -half; k <= half; ++k) central.push_back(k);
    const std::vector<double> wc = fd_weights(central, q);
    const double scale = std::pow(h, -q);
    const int one_sided = std::min(accuracy + q, n);

    Eigen::VectorXd out(n);
    std::map<int, std::vector<double>> cache;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        if (periodic || (i - half >= 0 && i + half < n)) {
            for (int k = -half; k <= half; ++k) acc += wc[static_cast<std::size_t>(k + half)] * v(((i + k) % n + n) % n);
        } else if (boundary == FdBoundary::Drop) {
            out(i) = kNaN;
            continue;
        } else {
            const int start = i < half ? 0 : n - one_sided;
            auto it = cache.find(start - i);
            if (it == cache.end()) {
                std::vector<double> offs;
                for (int k = 0; k < one_sided; ++k) offs.push_back(start + k - i);
                it = cache.emplace(start - i, fd_weights(offs, q)).first;
            }
            for (int k = 0; k < one_sided; ++k) acc += it->second[static_cast<std::size_t>(k)] * v(start + k);
        }
        out(i) = acc * scale;
    }
    return out;
}

/// Value and derivatives 0..qmax along one line from a local least-squares
/// polynomial. Row q of the result holds the q-th derivative.
Eigen::MatrixXd smooth_line(const Eigen::VectorXd& v, double h, bool periodic, const Smoothing& s, int qmax,
                            FdBoundary boundary) {
    const int n = static_cast<int>(v.size());
    const int w = s.window;
    const int half = w / 2;
    if (w > n) throw GridError("smoothing window is longer than the grid line");
    std::map<int, Eigen::MatrixXd> cache;  // shift -> projection onto coefficients
    auto projection = [&](int shift) -> const Eigen::MatrixXd& {
        auto it = cache.find(shift);
        if (it != cache.end()) return it->second;
        Eigen::MatrixXd V(w, s.degree + 1);
        for (int k = 0; k < w; ++k) {
            const double o = shift + k;
            double p = 1.0;
            for (int m = 0; m <= s.degree; ++m, p *= o) V(k, m) = p;
        }
        Eigen::MatrixXd P = V.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(w, w));
        return cache.emplace(shift, std::move(P)).first->second;
    };

    Eigen::MatrixXd out(qmax + 1, n);
    Eigen::VectorXd window(w);
    for (int i = 0; i < n; ++i) {
        int start;
        if (periodic || (i - half >= 0 && i + half < n)) {
            start = i - half;
        } else if (boundary == FdBoundary::Drop) {
            out.col(i).setConstant(kNaN);
            continue;
        } else {
            start = std::clamp(i - half, 0, n - w);
        }
        for (int k = 0; k < w; ++k) window(k) = v(((start + k) % n + n) % n);
        const Eigen::VectorXd coef = projection(start - i) * window;
        for (int q = 0; q <= qmax; ++q)
            out(q, i) = q <= s.degree ? static_cast<double>(factorial(q)) * coef(q) * std::pow(h, -q) : 0.0;
    }
    return out;
}

}  // namespace

std::vector<DerivativeJet> fd_jets(const GridField& field, const FdConfig& config) {
    config.validate();
    const GridSpec& g = field.spec;
    g.validate();
    if (g.nx < 7) throw GridError("fd_jets: third derivatives need at least 7 x nodes");
    if (g.nt < 3) throw GridError("fd_jets: time derivatives need at least 3 t nodes");
    const int accuracy = config.scheme == FdScheme::Central2 ? 2 : 4;
    if (!config.smooth && config.scheme == FdScheme::Central4 && g.nt < 5)
        throw GridError("fd_jets: fourth-order time differences need at least 5 t nodes");

    // Derivative planes, each nx x nt.
    Eigen::MatrixXd u = field.values;
    Eigen::MatrixXd ut(g.nx, g.nt), ux(g.nx, g.nt), uxx(g.nx, g.nt), uxxx(g.nx, g.nt);

    for (int j = 0; j < g.nt; ++j) {
        const Eigen::VectorXd line = field.values.col(j);
        if (config.smooth) {
            const Eigen::MatrixXd d = smooth_line(line, g.dx, g.periodic_x, *config.smooth, 3, config.boundary);
            u.col(j) = d.row(0).transpose();
            ux.col(j) = d.row(1).transpose();
            uxx.col(j) = d.row(2).transpose();
            uxxx.col(j) = d.row(3).transpose();
        } else {
            ux.col(j) = fd_line(line, g.dx, g.periodic_x, 1, accuracy, config.boundary);
            uxx.col(j) = fd_line(line, g.dx, g.periodic_x, 2, accuracy, config.boundary);
            uxxx.col(j) = fd_line(line, g.dx, g.periodic_x, 3, accuracy, config.boundary);
        }
    }
    for (int i = 0; i < g.nx; ++i) {
        const Eigen::VectorXd line = field.values.row(i).transpose();
        if (config.smooth)
            ut.row(i) = smooth_line(line, g.dt, false, *config.smooth, 1, config.boundary).row(1);
        else
            ut.row(i) = fd_line(line, g.dt, false, 1, accuracy, config.boundary).transpose();
    }

    std::vector<DerivativeJet> out;
    out.reserve(static_cast<std::size_t>(g.size()));
    for (int j = 0; j < g.nt; ++j)
        for (int i = 0; i < g.nx; ++i) {
            DerivativeJet jt{g.x(i), g.t(j), u(i, j), ut(i, j), ux(i, j), uxx(i, j), uxxx(i, j)};
            if (std::isnan(jt.u) || std::isnan(jt.u_t) || std::isnan(jt.u_x) || std::isnan(jt.u_xx) ||
                std::isnan(jt.u_xxx))
                continue;  // dropped boundary node
            out.push_back(jt);
        }
    return out;
}

DiscoveryResult direct_stridge(const GridField& field, const FdConfig& fd, const TermCatalog& catalog,
                               const StridgeConfig& config) {
    const std::vector<DerivativeJet> jets = fd_jets(field, fd);
    return discover(assemble(jets, catalog), config);
}

}  // namespace dlpde
