#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlpde/autodiff.hpp"
#include "dlpde/baseline.hpp"
#include "dlpde/eval.hpp"
#include "dlpde/net.hpp"
#include "dlpde/sampling.hpp"
#include "dlpde/solvers.hpp"
#include "dlpde/stridge.hpp"

namespace dlpde {

enum class Benchmark { Groundwater, ConvectionDiffusion, Burgers, KdV };
enum class Pipeline { DlPde, DlPdeNoMetadata, DirectStridge };
enum class SamplingMode { Random, Full, Lines, Decimate };

std::string to_string(Benchmark b);
std::string to_string(Pipeline p);
std::string to_string(SamplingMode m);
Benchmark parse_benchmark(const std::string& name);
Pipeline parse_pipeline(const std::string& name);
SamplingMode parse_sampling_mode(const std::string& name);

struct SamplingConfig {
    SamplingMode mode = SamplingMode::Random;
    long n = 3000;
    /// Line preset name (cd-15t, cd-12x, burgers-40t, burgers-50x).
    std::string preset;
    int stride_x = 1;
    int stride_t = 1;
    std::uint64_t seed = 0;
};

/// Everything a run needs. Unset seeds are derived from `seed`, so after
/// resolve() the config is self-contained.
struct ExperimentConfig {
    Benchmark benchmark = Benchmark::Burgers;
    Pipeline pipeline = Pipeline::DlPde;
    std::uint64_t seed = 1;

    /// Truth PDE parameters; missing keys take the benchmark defaults.
    std::map<std::string, double> pde;
    SamplingConfig sampling;
    NoiseSpec noise;

    std::string net_preset;  // empty: benchmark default
    double first_layer_frequency = 1.0;
    std::uint64_t init_seed = 0;
    TrainConfig train;

    std::string metadata_preset;  // empty: benchmark name
    std::optional<MetaDataSpec> metadata;

    std::string catalog = "default";
    StridgeConfig stridge;
    FdConfig fd;

    bool evaluate = true;
    bool write_jets = true;
    /// Parallel runs in sweep().
    int workers = 1;

    /// Fills every derived default (seeds, presets, PDE parameters).
    ExperimentConfig resolved() const;
};

/// Benchmark defaults, then the INI file's values on top.
ExperimentConfig default_config(Benchmark b);
ExperimentConfig load_config(const std::string& ini_path);
ExperimentConfig parse_config(const std::string& ini_text);

/// Resolved config as JSON (the manifest's "config" block) and back.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& json_text);
/// Reads the config block out of a run manifest.
ExperimentConfig load_manifest_config(const std::string& manifest_path);

/// 16 hex digits of FNV-1a over the resolved config JSON.
std::string config_hash(const ExperimentConfig& config);

PdeSpec benchmark_spec(const ExperimentConfig& config);
GridSpec benchmark_grid(Benchmark b);
/// Label -> true coefficient, in the variables the regression sees.
std::map<std::string, double> truth_coefficients(const ExperimentConfig& config);
TermCatalog catalog_by_name(const std::string& name);

struct StageRecord {
    std::string name;
    bool ok = true;
    std::string message;
};

struct RunOutcome {
    std::string directory;
    bool ok = true;
    std::vector<StageRecord> stages;
    std::optional<DiscoveryResult> result;
    std::optional<Score> score;
    std::optional<ErrorField> error;
};

/// generate -> sample -> train -> jets -> stridge -> evaluate, writing every
/// artifact under root/<benchmark>-<pipeline>-<hash>/. Stage failures are
/// recorded in manifest.json and in the outcome; nothing is thrown for them.
RunOutcome run(const ExperimentConfig& config, const std::string& root);

enum class SweepAxis { DataVolume, NoiseLevel, Decimation };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

/// Applies one sweep value to a config.
ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value);

/// One run per value; writes a tab-separated table to table_path and
/// returns the outcomes in value order.
std::vector<RunOutcome> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values,
                              const std::string& root, const std::string& table_path);

std::string sweep_header();
std::string sweep_row(double value, const RunOutcome& outcome);

}  // namespace dlpde
