#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlpde/grid.hpp"

namespace dlpde {

enum class Provenance { Random, FixedTemporalLines, FixedSpatialLines, Decimated, Full };

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& name);

struct Sample {
    double x = 0.0;
    double t = 0.0;
    double u = 0.0;
};

/// Scattered observations drawn from a grid.
struct SampleSet {
    std::vector<Sample> points;
    Provenance provenance = Provenance::Random;
    double noise_level = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
};

struct NoiseSpec {
    double delta = 0.0;
    std::uint64_t seed = 0;
};

enum class LineAxis { FixedT, FixedX };

/// n distinct grid nodes drawn uniformly without replacement. Output is
/// ordered by flat (x-fastest) grid index.
SampleSet random_subsample(const GridField& field, long n, std::uint64_t seed);

/// Every grid node, x-fastest.
SampleSet full_samples(const GridField& field);

/// All nodes along the selected lines. Positions must be grid coordinates
/// (times for FixedT, positions for FixedX).
SampleSet line_sample(const GridField& field, LineAxis axis, const std::vector<double>& positions);

/// Named observation presets; returns the axis and on-grid positions.
/// cd-15t, cd-12x, burgers-40t, burgers-50x.
struct LinePreset {
    LineAxis axis;
    std::vector<double> positions;
};
LinePreset line_preset(const std::string& name, const GridSpec& grid);

/// `count` positions spread uniformly from `first` to `last` and rounded to
/// the nearest grid node along the axis.
std::vector<double> snapped_uniform_positions(const GridSpec& grid, LineAxis axis, double first,
                                              double last, int count);

/// Regular sub-grid keeping every stride-th node in x and t.
GridField decimate(const GridField& field, int stride_x, int stride_t);

/// u <- u * (1 + delta * e), e uniform on [-1, 1).
SampleSet add_noise(const SampleSet& samples, const NoiseSpec& noise);
/// Same noise model applied to every node of a grid field.
GridField add_noise(const GridField& field, const NoiseSpec& noise);

/// x* = x / dx, t* = t, h* = dx * h.
GridField rescale_groundwater(const GridField& field);
/// Inverse of rescale_groundwater given the original spacing.
GridField unscale_groundwater(const GridField& rescaled, double dx);
/// lambda = K / (S_s dx^2), the diffusivity in starred variables.
double rescaled_diffusivity(double K, double S_s, double dx);

void write_sample_set(std::ostream& os, const SampleSet& samples);
SampleSet read_sample_set(std::istream& is);
void save_sample_set(const std::string& path, const SampleSet& samples);
SampleSet load_sample_set(const std::string& path);

}  // namespace dlpde
