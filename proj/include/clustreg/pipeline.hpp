#pragma once

#include "clustreg/clustering.hpp"
#include "clustreg/config.hpp"
#include "clustreg/panel.hpp"
#include "clustreg/regression.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clustreg {

// Per-year cluster totals x_i(t) and the grand total I(t) = sum_i x_i(t).
struct ClusterAggregates {
    std::vector<int> years;
    std::vector<std::vector<double>> regressors;  // [year][cluster]
    std::vector<double> target;
};

// Requires every entity to carry a cluster id (no noise labels).
ClusterAggregates aggregate_by_cluster(const EnergyPanel& panel, const ClusterAssignment& assignment);

struct ClusterProfile {
    int cluster_id = 0;
    std::vector<std::string> members;
    std::size_t count = 0;
    double sum = 0.0;
    double mean = 0.0;
    double variance = 0.0;  // sample variance, 0 for a single value
    double minimum = 0.0;
    double p25 = 0.0;
    double median = 0.0;
    double p75 = 0.0;
    double maximum = 0.0;

    bool operator==(const ClusterProfile&) const = default;
};

// Linear interpolation between order statistics at h = (n - 1) * q.
double quantile(std::vector<double> values, double q);

// Statistics over the pooled annual totals of member entities in `years`.
std::vector<ClusterProfile> profile_clusters(const EnergyPanel& panel, const ClusterAssignment& assignment,
                                             std::span<const int> years);

struct ForecastSummary {
    double mean_error = 0.0;
    double variance = 0.0;
};

// Arithmetic mean and sample variance (n - 1). Needs at least two values.
ForecastSummary summarize_forecast(std::span<const double> differences);

struct ForecastRow {
    int year = 0;
    double truth = 0.0;
    double predict = 0.0;
    double difference = 0.0;  // truth - predict

    bool operator==(const ForecastRow&) const = default;
};

struct ModelResult {
    PenaltyKind kind = PenaltyKind::ridge;
    LinearModel model;
    FitReport fit;
    std::vector<int> years;  // one per fitted row
    std::vector<CvRow> cv;
};

struct PipelineReport {
    std::vector<std::string> dropped_features;
    std::vector<std::string> dropped_entities;
    std::vector<std::string> entities;
    std::vector<std::string> features;
    NeighborhoodParams params;
    ClusteringQuality quality;
    ClusterAssignment assignment;  // as clustered, noise included
    ClusterAssignment promoted;    // noise promoted to singleton clusters
    std::vector<SweepSummary> ranking;
    std::vector<ClusterProfile> profiles;
    ClusterAggregates aggregates;
    std::vector<std::string> regressor_names;
    std::vector<int> train_years;
    std::vector<int> test_years;
    std::vector<std::string> epsilon_cells;  // "<year>:<column>" cells where ln(0) was guarded
    std::vector<ModelResult> models;        // ridge, lasso, elastic_net
    std::vector<PathReport> paths;          // ridge, lasso
    std::vector<ForecastRow> forecast;
    ForecastSummary forecast_summary;

    const ModelResult& model(PenaltyKind kind) const;
};

// Configured train/test split of the panel years. Without explicit ranges
// the last five years are test and the rest train.
struct YearSplit {
    std::vector<int> train;
    std::vector<int> test;
};
YearSplit split_years(const PipelineConfig& config, const std::vector<int>& years);

// Restricts analyze() to part of the pipeline.
struct AnalyzeOptions {
    // Reuse a stored clustering instead of sweeping. Entities must equal the
    // cleaned panel's entities in order.
    std::optional<ClusterAssignment> assignment;
    std::vector<std::string> assignment_entities;
    bool cluster_only = false;
    std::vector<PenaltyKind> kinds{PenaltyKind::ridge, PenaltyKind::lasso, PenaltyKind::elastic_net};
    bool forecast = true;  // needs elastic_net in kinds
};

// Analysis of an in-memory panel. Nothing is written.
PipelineReport analyze(const PipelineConfig& config, const EnergyPanel& panel, const AnalyzeOptions& options = {});

// Loads the configured data, runs analyze() and writes every artifact into
// config.output_dir. Failures are rethrown as StageError; any artifact
// already written by this run is removed first.
PipelineReport run_pipeline(const PipelineConfig& config);

// Names of the files run_pipeline writes.
std::vector<std::string> pipeline_artifacts();

void write_pipeline_artifacts(const PipelineReport& report, const std::filesystem::path& dir);

// Pieces of write_pipeline_artifacts used by the single-stage subcommands.
void write_cluster_artifacts(const PipelineReport& report, const std::filesystem::path& dir);
void write_model_artifacts(const PipelineReport& report, PenaltyKind kind, const std::filesystem::path& dir);
void write_forecast_csv(const PipelineReport& report, const std::filesystem::path& file);

// ln of a non-negative series where exact zeros map to ln(epsilon).
// Positions that were guarded are appended to `guarded`.
std::vector<double> guarded_log(std::span<const double> values, double epsilon,
                                std::vector<std::size_t>* guarded = nullptr);

}  // namespace clustreg
