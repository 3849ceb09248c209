#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrfree/objectives.hpp"
#include "lrfree/optimizers.hpp"
#include "lrfree/run.hpp"
#include "lrfree/schedule.hpp"

namespace lrfree {

/// Invalid experiment configuration. `field` is the dotted path of the
/// offending key, e.g. "optimizer.kind".
class ConfigError : public UsageError {
public:
    ConfigError(std::string field, const std::string& message)
        : UsageError(field + ": " + message), field_(std::move(field)), message_(message) {}
    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

struct ObjectiveSpec {
    std::string kind = "quadratic";  // quadratic | l1 | logistic | mlp
    std::size_t dim = 10;
    double condition = 1e4;
    std::optional<ParamVec> diag;
    std::optional<ParamVec> w_star;  // default: seeded standard normal
    std::optional<ParamVec> w0;      // default: objective.initial_point()
    DatasetSpec dataset;
    std::size_t hidden = 8;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    std::string name = "run";
    ObjectiveSpec objective;
    OptimizerConfig optimizer;
    bool tune_lr = false;  // grid-search `optimizer.lr` (SGD / Adam)
    ScalingConfig scaling;
    Schedule schedule;
    std::size_t steps = 1000;
    std::size_t batch_size = 0;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;  // success: final loss <= f* + tolerance
    std::optional<std::string> output;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical form with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& doc, const std::string& path = "dataset");

/// FNV-1a over the canonical JSON of the run-determining fields (name and
/// output location excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

ObjectivePtr build_objective(const ObjectiveSpec& spec);

struct RunSummary {
    std::string config_hash;
    double final_loss = 0.0;
    double min_loss = 0.0;
    std::size_t steps = 0;
    bool success = false;
    std::optional<std::string> failure;
    std::optional<double> tuned_lr;
};

struct ExperimentResult {
    RunSummary summary;
    Trajectory trajectory;
};

/// Runs in memory, without touching the filesystem.
ExperimentResult execute_experiment(const ExperimentConfig& config);

/// Runs and writes `<out_dir>/<name>.csv` and `<out_dir>/<name>.summary.json`.
/// The trace is written even when the run fails part-way.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

inline constexpr const char* kTraceHeader = "step,loss,lr,d,grad_norm,alpha_min,alpha_max";
void write_trace_csv(std::ostream& os, std::span<const TraceRecord> records);
nlohmann::json to_json(const RunSummary& summary);

/// Half-decade grid 1e-4, 10^-3.5, ..., 1.
std::vector<double> default_lr_grid();

struct TuneResult {
    double lr = 0.0;
    double final_loss = 0.0;
};

/// Best learning rate by final loss; diverged runs are discarded.
TuneResult tune_learning_rate(const ExperimentConfig& base, std::span<const double> grid);

struct SweepRow {
    std::string name;
    std::string optimizer;
    double final_loss = 0.0;
    double min_loss = 0.0;
    bool success = false;
    std::string error;
};

struct SweepOptions {
    std::size_t threads = 1;
    std::optional<std::filesystem::path> out_dir;
};

/// One row per config, in input order. Per-run failures are recorded in the
/// row rather than thrown.
std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& configs,
                            const SweepOptions& options = {});

std::vector<ExperimentConfig> parse_sweep(const nlohmann::json& doc);

void print_table(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace lrfree
