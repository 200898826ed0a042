#include "dlpde/autodiff.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dlpde {

DerivativeJet jet(const NetworkParams& params, double x, double t) {
    params.validate();
    using J = SpaceTimeJet<double>;
    const J xj = J::x_variable(x);
    const J tj = J::t_variable(t);
    const J u = forward<J>(params, xj, tj);
    return {x, t, u.value(), u.d_t(), u.d_x(), u.d_xx(), u.d_xxx()};
}

namespace {

constexpr Eigen::Index kChunk = 2048;

/// Jets for one chunk. Each hidden layer carries five blocks of n columns:
/// Taylor coefficients c0..c3 in x and the t-tangent.
void jets_chunk(const NetworkParams& p, const Eigen::Ref<const Eigen::VectorXd>& xs,
                const Eigen::Ref<const Eigen::VectorXd>& ts, std::vector<DerivativeJet>& out) {
    const Eigen::Index n = xs.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2, 5 * n);
    S.block(0, 0, 1, n) = ((xs.array() - p.x_map.shift) * p.x_map.scale).matrix().transpose();
    S.block(1, 0, 1, n) = ((ts.array() - p.t_map.shift) * p.t_map.scale).matrix().transpose();
    S.block(0, n, 1, n).setConstant(p.x_map.scale);
    S.block(1, 4 * n, 1, n).setConstant(p.t_map.scale);

    const std::size_t L = p.layers();
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd Z = p.weights[l] * S;
        Z.leftCols(n).colwise() += p.biases[l];
        if (l + 1 == L) {
            S = std::move(Z);
            break;
        }
        S.resize(Z.rows(), 5 * n);
        const bool is_tanh = p.activation == Activation::Tanh;
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index r = 0; r < Z.rows(); ++r) {
                SpaceTimeJet<double> a;
                for (int o = 0; o < 4; ++o) a.c[static_cast<std::size_t>(o)] = Z(r, o * n + k);
                a.dt = Z(r, 4 * n + k);
                const auto f = is_tanh ? tanh(a) : sin(a);
                for (int o = 0; o < 4; ++o) S(r, o * n + k) = f.c[static_cast<std::size_t>(o)];
                S(r, 4 * n + k) = f.dt;
            }
    }
    const double s = p.output.scale;
    for (Eigen::Index k = 0; k < n; ++k) {
        DerivativeJet j;
        j.x = xs(k);
        j.t = ts(k);
        j.u = p.output.shift + s * S(0, k);
        j.u_x = s * S(0, n + k);
        j.u_xx = 2.0 * s * S(0, 2 * n + k);
        j.u_xxx = 6.0 * s * S(0, 3 * n + k);
        j.u_t = s * S(0, 4 * n + k);
        out.push_back(j);
    }
}

}  // namespace

std::vector<DerivativeJet> jets(const NetworkParams& params, const Eigen::VectorXd& xs, const Eigen::VectorXd& ts) {
    params.validate();
    if (xs.size() != ts.size()) throw ParameterError("jets: coordinate vectors differ in length");
    std::vector<DerivativeJet> out;
    out.reserve(static_cast<std::size_t>(xs.size()));
    for (Eigen::Index start = 0; start < xs.size(); start += kChunk) {
        const Eigen::Index len = std::min(kChunk, xs.size() - start);
        jets_chunk(params, xs.segment(start, len), ts.segment(start, len), out);
    }
    return out;
}

double MetaDataSpec::x(int i) const {
    const int intervals = x_half_open ? nx : nx - 1;
    return x_lo + (x_hi - x_lo) * i / intervals;
}

double MetaDataSpec::t(int j) const { return t_lo + (t_hi - t_lo) * j / (nt - 1); }

void MetaDataSpec::validate() const {
    if (nx < 2 || nt < 2) throw ParameterError("meta-data grid needs at least 2 nodes per axis");
    if (!(x_hi > x_lo) || !(t_hi > t_lo)) throw ParameterError("meta-data bounds must be increasing");
}

MetaDataSpec metadata_preset(const std::string& benchmark) {
    // Groundwater bounds are in starred (x / dx) units.
    if (benchmark == "groundwater") return {4.0, 96.0, 101, 0.0, 200.0, 1000, false};
    if (benchmark == "convection_diffusion") return {3.0, 15.0, 120, 0.0, 9.0, 900, false};
    if (benchmark == "burgers") return {-8.0, 8.0, 320, 0.0, 9.0, 180, true};
    if (benchmark == "kdv") return {-0.5, 0.5, 1000, 0.0, 1.0, 200, false};
    throw ParameterError("unknown meta-data preset '" + benchmark + "'");
}

std::vector<DerivativeJet> generate_metadata(const NetworkParams& params, const MetaDataSpec& spec,
                                             DomainPolicy policy, std::vector<std::string>* warnings) {
    spec.validate();
    if (params.domain.known) {
        const auto& d = params.domain;
        const double x_last = spec.x(spec.nx - 1);
        const double slack_x = 1e-9 * std::max(1.0, d.x_hi - d.x_lo);
        const double slack_t = 1e-9 * std::max(1.0, d.t_hi - d.t_lo);
        if (spec.x_lo < d.x_lo - slack_x || x_last > d.x_hi + slack_x || spec.t_lo < d.t_lo - slack_t ||
            spec.t_hi > d.t_hi + slack_t) {
            const std::string msg = "meta-data grid extends outside the training domain; derivatives there are extrapolated";
            if (policy == DomainPolicy::Error) throw DomainError(msg);
            if (warnings) warnings->push_back(msg);
        }
    }
    Eigen::VectorXd xs(spec.size()), ts(spec.size());
    for (int j = 0; j < spec.nt; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const long k = static_cast<long>(j) * spec.nx + i;
            xs(k) = spec.x(i);
            ts(k) = spec.t(j);
        }
    return jets(params, xs, ts);
}

std::vector<DerivativeJet> sample_jets(const NetworkParams& params, const SampleSet& samples) {
    Eigen::VectorXd xs(static_cast<Eigen::Index>(samples.size())), ts(xs.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        xs(static_cast<Eigen::Index>(k)) = samples.points[k].x;
        ts(static_cast<Eigen::Index>(k)) = samples.points[k].t;
    }
    return jets(params, xs, ts);
}

void write_jets(std::ostream& os, const std::vector<DerivativeJet>& jets, const std::string& header) {
    os << "# jets x t u u_t u_x u_xx u_xxx\n";
    if (!header.empty()) {
        std::istringstream hs(header);
        std::string line;
        while (std::getline(hs, line)) os << "# " << line << "\n";
    }
    os << "count " << jets.size() << "\n";
    for (const auto& j : jets)
        os << format_double(j.x) << " " << format_double(j.t) << " " << format_double(j.u) << " "
           << format_double(j.u_t) << " " << format_double(j.u_x) << " " << format_double(j.u_xx) << " "
           << format_double(j.u_xxx) << "\n";
}

std::vector<DerivativeJet> read_jets(std::istream& is) {
    std::string line;
    std::size_t count = 0;
    bool have_count = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key >> count) || key != "count") throw FormatError("jets: expected 'count'");
        have_count = true;
        break;
    }
    if (!have_count) throw FormatError("jets: missing count");
    std::vector<DerivativeJet> out(count);
    for (auto& j : out) {
        if (!std::getline(is, line)) throw FormatError("jets: truncated file");
        std::istringstream ls(line);
        if (!(ls >> j.x >> j.t >> j.u >> j.u_t >> j.u_x >> j.u_xx >> j.u_xxx))
            throw FormatError("jets: malformed line");
    }
    return out;
}

void save_jets(const std::string& path, const std::vector<DerivativeJet>& jets, const std::string& header) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_jets(os, jets, header);
}

std::vector<DerivativeJet> load_jets(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_jets(is);
}

}  // namespace dlpde
