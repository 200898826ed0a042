#include "dlpde/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace dlpde {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Random: return "random";
        case Provenance::FixedTemporalLines: return "fixed_temporal_lines";
        case Provenance::FixedSpatialLines: return "fixed_spatial_lines";
        case Provenance::Decimated: return "decimated";
        case Provenance::Full: return "full";
    }
    return "unknown";
}

Provenance parse_provenance(const std::string& name) {
    for (auto p : {Provenance::Random, Provenance::FixedTemporalLines, Provenance::FixedSpatialLines,
                   Provenance::Decimated, Provenance::Full})
        if (to_string(p) == name) return p;
    throw FormatError("unknown provenance '" + name + "'");
}

SampleSet random_subsample(const GridField& field, long n, std::uint64_t seed) {
    const auto& g = field.spec;
    const long total = g.size();
    if (n < 1 || n > total)
        throw ParameterError("random_subsample: n = " + std::to_string(n) + " outside [1, " +
                             std::to_string(total) + "]");
    std::vector<long> index(static_cast<std::size_t>(total));
    std::iota(index.begin(), index.end(), 0L);
    Rng rng(seed);
    // Partial Fisher-Yates: the first n slots end up a uniform n-subset.
    for (long k = 0; k < n; ++k) {
        const long pick = k + static_cast<long>(rng.below(static_cast<std::uint64_t>(total - k)));
        std::swap(index[static_cast<std::size_t>(k)], index[static_cast<std::size_t>(pick)]);
    }
    index.resize(static_cast<std::size_t>(n));
    std::sort(index.begin(), index.end());

    SampleSet out;
    out.provenance = n == total ? Provenance::Full : Provenance::Random;
    out.seed = seed;
    out.points.reserve(index.size());
    for (long flat : index) {
        const int i = static_cast<int>(flat % g.nx);
        const int j = static_cast<int>(flat / g.nx);
        out.points.push_back({g.x(i), g.t(j), field(i, j)});
    }
    return out;
}

SampleSet full_samples(const GridField& field) {
    SampleSet out;
    out.provenance = Provenance::Full;
    out.points.reserve(static_cast<std::size_t>(field.spec.size()));
    for (int j = 0; j < field.spec.nt; ++j)
        for (int i = 0; i < field.spec.nx; ++i)
            out.points.push_back({field.spec.x(i), field.spec.t(j), field(i, j)});
    return out;
}

namespace {

int grid_index(double position, double origin, double spacing, int count, const char* axis) {
    const double k = (position - origin) / spacing;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) > 1e-6 || rounded < 0 || rounded >= count)
        throw CoordinateError(std::string("position ") + format_double(position) + " is not a grid " +
                              axis + " coordinate");
    return static_cast<int>(rounded);
}

}  // namespace

SampleSet line_sample(const GridField& field, LineAxis axis, const std::vector<double>& positions) {
    const auto& g = field.spec;
    SampleSet out;
    out.provenance = axis == LineAxis::FixedT ? Provenance::FixedTemporalLines : Provenance::FixedSpatialLines;
    std::set<int> seen;
    for (double p : positions) {
        if (axis == LineAxis::FixedT) {
            const int j = grid_index(p, g.t0, g.dt, g.nt, "t");
            if (!seen.insert(j).second) throw CoordinateError("duplicate observation time " + format_double(p));
            for (int i = 0; i < g.nx; ++i) out.points.push_back({g.x(i), g.t(j), field(i, j)});
        } else {
            const int i = grid_index(p, g.x0, g.dx, g.nx, "x");
            if (!seen.insert(i).second) throw CoordinateError("duplicate observation position " + format_double(p));
            for (int j = 0; j < g.nt; ++j) out.points.push_back({g.x(i), g.t(j), field(i, j)});
        }
    }
    return out;
}

std::vector<double> snapped_uniform_positions(const GridSpec& grid, LineAxis axis, double first,
                                              double last, int count) {
    if (count < 1) throw ParameterError("line preset needs at least one position");
    const double origin = axis == LineAxis::FixedT ? grid.t0 : grid.x0;
    const double spacing = axis == LineAxis::FixedT ? grid.dt : grid.dx;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double p = count == 1 ? first : first + k * (last - first) / (count - 1);
        out.push_back(origin + std::round((p - origin) / spacing) * spacing);
    }
    return out;
}

LinePreset line_preset(const std::string& name, const GridSpec& grid) {
    if (name == "burgers-40t")
        return {LineAxis::FixedT, snapped_uniform_positions(grid, LineAxis::FixedT, 0.05, 9.95, 40)};
    if (name == "burgers-50x")
        return {LineAxis::FixedX, snapped_uniform_positions(grid, LineAxis::FixedX, -7.9375, 7.5625, 50)};
    // Interior midpoints of 15 equal time bins over [0, 15] and 12 equal bins over [0, 30].
    if (name == "cd-15t")
        return {LineAxis::FixedT, snapped_uniform_positions(grid, LineAxis::FixedT, 0.5, 14.5, 15)};
    if (name == "cd-12x")
        return {LineAxis::FixedX, snapped_uniform_positions(grid, LineAxis::FixedX, 1.25, 28.75, 12)};
    throw ParameterError("unknown line preset '" + name + "'");
}

GridField decimate(const GridField& field, int stride_x, int stride_t) {
    const auto& g = field.spec;
    if (stride_x < 1 || stride_t < 1) throw ParameterError("decimation strides must be >= 1");
    if (g.periodic_x && g.nx % stride_x != 0)
        throw GridError("periodic decimation stride must divide nx");
    GridSpec s = g;
    s.nx = (g.nx - 1) / stride_x + 1;
    if (g.periodic_x) s.nx = g.nx / stride_x;
    s.nt = (g.nt - 1) / stride_t + 1;
    s.dx = g.dx * stride_x;
    s.dt = g.dt * stride_t;
    if (s.nx < 3) throw GridError("decimation leaves fewer than 3 points in x");
    s.validate();
    GridField out(s);
    for (int j = 0; j < s.nt; ++j)
        for (int i = 0; i < s.nx; ++i) out(i, j) = field(i * stride_x, j * stride_t);
    return out;
}

SampleSet add_noise(const SampleSet& samples, const NoiseSpec& noise) {
    if (samples.noise_level != 0.0) throw UsageError("add_noise: sample set is already noisy");
    if (!(noise.delta >= 0.0) || !std::isfinite(noise.delta)) throw ParameterError("noise level must be >= 0");
    SampleSet out = samples;
    out.noise_level = noise.delta;
    if (noise.delta == 0.0) return out;
    Rng rng(noise.seed);
    for (auto& p : out.points) p.u *= 1.0 + noise.delta * rng.symmetric();
    return out;
}

GridField add_noise(const GridField& field, const NoiseSpec& noise) {
    if (!(noise.delta >= 0.0) || !std::isfinite(noise.delta)) throw ParameterError("noise level must be >= 0");
    GridField out = field;
    if (noise.delta == 0.0) return out;
    Rng rng(noise.seed);
    double* data = out.values.data();
    for (long k = 0; k < out.spec.size(); ++k) data[k] *= 1.0 + noise.delta * rng.symmetric();
    return out;
}

GridField rescale_groundwater(const GridField& field) {
    const double dx = field.spec.dx;
    GridSpec s = field.spec;
    s.x0 = field.spec.x0 / dx;
    s.dx = 1.0;
    return GridField(s, field.values * dx);
}

GridField unscale_groundwater(const GridField& rescaled, double dx) {
    if (!(dx > 0.0)) throw ParameterError("unscale_groundwater: dx must be positive");
    GridSpec s = rescaled.spec;
    s.x0 = rescaled.spec.x0 * dx;
    s.dx = rescaled.spec.dx * dx;
    return GridField(s, rescaled.values / dx);
}

double rescaled_diffusivity(double K, double S_s, double dx) {
    if (!(K > 0.0) || !(S_s > 0.0) || !(dx > 0.0)) throw ParameterError("K, S_s and dx must be positive");
    return K / (S_s * dx * dx);
}

void write_sample_set(std::ostream& os, const SampleSet& samples) {
    os << "# sampleset\n"
       << "count " << samples.points.size() << "\n"
       << "noise_level " << format_double(samples.noise_level) << "\n"
       << "seed " << samples.seed << "\n"
       << "provenance " << to_string(samples.provenance) << "\n";
    for (const auto& p : samples.points)
        os << format_double(p.x) << " " << format_double(p.t) << " " << format_double(p.u) << "\n";
}

namespace {

std::string content_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') return line;
    throw FormatError("sampleset: unexpected end of input");
}

template <typename T>
T keyed(std::istream& is, const char* key) {
    std::istringstream ls(content_line(is));
    std::string name;
    T v{};
    if (!(ls >> name >> v) || name != key)
        throw FormatError(std::string("sampleset: expected header key '") + key + "'");
    return v;
}

}  // namespace

SampleSet read_sample_set(std::istream& is) {
    SampleSet out;
    const auto count = keyed<std::size_t>(is, "count");
    out.noise_level = keyed<double>(is, "noise_level");
    out.seed = keyed<std::uint64_t>(is, "seed");
    out.provenance = parse_provenance(keyed<std::string>(is, "provenance"));
    out.points.resize(count);
    for (auto& p : out.points) {
        std::istringstream ls(content_line(is));
        if (!(ls >> p.x >> p.t >> p.u)) throw FormatError("sampleset: malformed point line");
    }
    return out;
}

void save_sample_set(const std::string& path, const SampleSet& samples) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_sample_set(os, samples);
}

SampleSet load_sample_set(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_sample_set(is);
}

}  // namespace dlpde
