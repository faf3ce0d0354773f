#pragma once

#include "clustreg/preprocess.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <vector>

namespace clustreg {

struct NeighborhoodParams {
    double eps = 0.0;   // radius in normalized-feature units
    int min_pts = 1;    // neighborhood size (self included) that makes a core point

    void validate() const;
    bool operator==(const NeighborhoodParams&) const = default;
};

struct ClusterAssignment {
    static constexpr int noise = -1;

    std::vector<int> labels;       // 0..num_clusters-1 or noise
    int num_clusters = 0;
    std::vector<bool> core_flags;

    std::size_t noise_count() const;
    bool operator==(const ClusterAssignment&) const = default;
};

struct SilhouetteReport {
    std::vector<double> per_point;  // s_i; noise points hold 0 and are not averaged
    std::vector<double> a;
    std::vector<double> b;
    std::vector<bool> scored;       // false for noise points
    double mean_sc = 0.0;
};

struct ClusteringQuality {
    double sc = 0.0;
    double sse = 0.0;
    int c = 0;
    std::vector<std::vector<double>> centroids;

    bool operator==(const ClusteringQuality&) const = default;
};

// Indices j (self included) within Euclidean distance eps of row `index`,
// ascending. Throws DomainError when index is out of range.
std::vector<std::size_t> region_query(const Eigen::MatrixXd& points, std::size_t index, double eps);

// Density-based clustering. A point is core when its eps-neighborhood,
// itself included, holds at least min_pts points. Cluster ids follow the
// order in which clusters are first reached scanning rows by index; a border
// point reachable from several clusters keeps the first one.
ClusterAssignment dbscan(const Eigen::MatrixXd& points, const NeighborhoodParams& params);

// Silhouette over non-noise points; singleton clusters score 0. Throws
// DomainError when fewer than two clusters exist.
SilhouetteReport silhouette(const Eigen::MatrixXd& points, const ClusterAssignment& assignment);

// Centroids and within-cluster sum of squared distances. Noise contributes
// nothing. Throws DomainError when there is no cluster. The returned sc is 0;
// callers combine it with silhouette().
ClusteringQuality sse(const Eigen::MatrixXd& points, const ClusterAssignment& assignment);

struct SweepEntry {
    NeighborhoodParams params;
    ClusteringQuality quality;
    ClusterAssignment assignment;
};

// Evaluates every (eps, min_pts) pair, drops degenerate results (fewer than
// two clusters, or only noise) and ranks by descending silhouette, then
// ascending SSE, then ascending cluster count; remaining ties keep grid order
// (eps ascending, then min_pts ascending). Throws DomainError
// ("no admissible clustering") when nothing survives.
std::vector<SweepEntry> sweep_params(const Eigen::MatrixXd& points, std::span<const double> eps_grid,
                                     std::span<const int> minpts_grid);

// One row of the sweep table.
struct SweepSummary {
    NeighborhoodParams params;
    int c = 0;
    double sc = 0.0;
    double sse = 0.0;

    bool operator==(const SweepSummary&) const = default;
};

std::vector<SweepSummary> summarize_sweep(std::span<const SweepEntry> ranking);

// Gives each noise point its own cluster id, numbered after the existing
// clusters in row order.
ClusterAssignment promote_noise(const ClusterAssignment& assignment);

// CSV exports: `entity,cluster_id,is_core` and `eps,min_pts,c,sc,sse`.
// Noise is written as cluster_id -1.
void save_assignment_csv(const ClusterAssignment& assignment, std::span<const std::string> entities,
                         const std::filesystem::path& file);
ClusterAssignment load_assignment_csv(const std::filesystem::path& file,
                                      std::vector<std::string>* entities = nullptr);
void save_quality_csv(std::span<const SweepSummary> ranking, const std::filesystem::path& file);

}  // namespace clustreg
