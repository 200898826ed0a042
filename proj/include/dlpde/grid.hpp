#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

#include "dlpde/core.hpp"

namespace dlpde {

/// Regular space-time grid. Spatial nodes are x0 + i*dx, temporal nodes
/// t0 + j*dt. A periodic grid covers [x0, x0 + nx*dx) with wraparound.
struct GridSpec {
    double x0 = 0.0;
    double dx = 1.0;
    int nx = 3;
    double t0 = 0.0;
    double dt = 1.0;
    int nt = 2;
    bool periodic_x = false;

    double x(int i) const { return x0 + i * dx; }
    double t(int j) const { return t0 + j * dt; }
    double x_last() const { return x(nx - 1); }
    double t_last() const { return t(nt - 1); }
    /// Spatial period (periodic grids) or span of the node set.
    double length() const { return periodic_x ? nx * dx : (nx - 1) * dx; }
    long size() const { return static_cast<long>(nx) * nt; }

    /// Throws GridError when the spec violates its minima.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// Node-coordinate equality with a relative tolerance on the spacings.
bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol = 1e-12);

/// Solution values on a grid; values(i, j) = u(x_i, t_j). Eigen's
/// column-major storage makes the flat data x-fastest.
struct GridField {
    GridSpec spec;
    Eigen::MatrixXd values;

    GridField() = default;
    explicit GridField(const GridSpec& s) : spec(s), values(Eigen::MatrixXd::Zero(s.nx, s.nt)) {}
    GridField(const GridSpec& s, Eigen::MatrixXd v);

    double operator()(int i, int j) const { return values(i, j); }
    double& operator()(int i, int j) { return values(i, j); }
};

void write_grid_field(std::ostream& os, const GridField& field);
GridField read_grid_field(std::istream& is);
void save_grid_field(const std::string& path, const GridField& field);
GridField load_grid_field(const std::string& path);

/// Full-precision text rendering used by every file format.
std::string format_double(double v);

}  // namespace dlpde
