#include "dlpde/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dlpde {

void GridSpec::validate() const {
    if (nx < 3) throw GridError("grid needs nx >= 3, got " + std::to_string(nx));
    if (nt < 2) throw GridError("grid needs nt >= 2, got " + std::to_string(nt));
    if (!(dx > 0.0) || !std::isfinite(dx)) throw GridError("grid spacing dx must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw GridError("grid spacing dt must be positive");
    if (!std::isfinite(x0) || !std::isfinite(t0)) throw GridError("grid origin must be finite");
}

bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol) {
    auto close = [rel_tol](double p, double q, double scale) {
        return std::abs(p - q) <= rel_tol * std::max(scale, 1.0);
    };
    return a.nx == b.nx && a.nt == b.nt && a.periodic_x == b.periodic_x &&
           close(a.dx, b.dx, a.dx) && close(a.dt, b.dt, a.dt) &&
           close(a.x0, b.x0, std::abs(a.x0) + a.dx) && close(a.t0, b.t0, std::abs(a.t0) + a.dt);
}

GridField::GridField(const GridSpec& s, Eigen::MatrixXd v) : spec(s), values(std::move(v)) {
    if (values.rows() != s.nx || values.cols() != s.nt)
        throw GridError("GridField values shape does not match its GridSpec");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_grid_field(std::ostream& os, const GridField& field) {
    const auto& s = field.spec;
    os << "# gridfield\n"
       << "nx " << s.nx << "\n"
       << "nt " << s.nt << "\n"
       << "x0 " << format_double(s.x0) << "\n"
       << "dx " << format_double(s.dx) << "\n"
       << "t0 " << format_double(s.t0) << "\n"
       << "dt " << format_double(s.dt) << "\n"
       << "periodic " << (s.periodic_x ? 1 : 0) << "\n";
    const double* data = field.values.data();
    for (long k = 0; k < s.size(); ++k) os << format_double(data[k]) << "\n";
}

namespace {

std::string next_content_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        return line;
    }
    throw FormatError("gridfield: unexpected end of input");
}

template <typename T>
T header_value(std::istream& is, const char* key) {
    std::istringstream ls(next_content_line(is));
    std::string name;
    T value{};
    if (!(ls >> name >> value) || name != key)
        throw FormatError(std::string("gridfield: expected header key '") + key + "'");
    return value;
}

}  // namespace

GridField read_grid_field(std::istream& is) {
    GridSpec s;
    s.nx = header_value<int>(is, "nx");
    s.nt = header_value<int>(is, "nt");
    s.x0 = header_value<double>(is, "x0");
    s.dx = header_value<double>(is, "dx");
    s.t0 = header_value<double>(is, "t0");
    s.dt = header_value<double>(is, "dt");
    s.periodic_x = header_value<int>(is, "periodic") != 0;
    s.validate();
    GridField field(s);
    double* data = field.values.data();
    for (long k = 0; k < s.size(); ++k) {
        std::istringstream ls(next_content_line(is));
        if (!(ls >> data[k])) throw FormatError("gridfield: bad value at index " + std::to_string(k));
    }
    return field;
}

void save_grid_field(const std::string& path, const GridField& field) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_grid_field(os, field);
}

GridField load_grid_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_grid_field(is);
}

}  // namespace dlpde
