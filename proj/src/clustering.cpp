#include "clustreg/clustering.hpp"

#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

namespace clustreg {

void NeighborhoodParams::validate() const {
    if (!(eps >= 0)) throw DomainError("eps must be non-negative");
    if (min_pts < 1) throw DomainError("min_pts must be at least 1");
}

std::size_t ClusterAssignment::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), noise));
}

std::vector<std::size_t> region_query(const Eigen::MatrixXd& points, std::size_t index, double eps) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (index >= n) throw DomainError("region_query index out of range");
    if (!(eps >= 0)) throw DomainError("eps must be non-negative");
    std::vector<std::size_t> out;
    const double eps2 = eps * eps;
    for (std::size_t j = 0; j < n; ++j) {
        const double d2 = (points.row(static_cast<Eigen::Index>(j)) -
                           points.row(static_cast<Eigen::Index>(index)))
                              .squaredNorm();
        if (d2 <= eps2) out.push_back(j);
    }
    return out;
}

ClusterAssignment dbscan(const Eigen::MatrixXd& points, const NeighborhoodParams& params) {
    params.validate();
    const auto n = static_cast<std::size_t>(points.rows());
    ClusterAssignment out;
    out.labels.assign(n, ClusterAssignment::noise);
    out.core_flags.assign(n, false);
    if (n == 0) return out;

    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        neighbors[i] = region_query(points, i, params.eps);
        out.core_flags[i] = neighbors[i].size() >= static_cast<std::size_t>(params.min_pts);
    }

    std::vector<bool> visited(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i] || !out.core_flags[i]) continue;
        const int id = out.num_clusters++;
        std::deque<std::size_t> frontier{i};
        visited[i] = true;
        out.labels[i] = id;
        while (!frontier.empty()) {
            const std::size_t p = frontier.front();
            frontier.pop_front();
            for (std::size_t q : neighbors[p]) {
                if (out.labels[q] == ClusterAssignment::noise) out.labels[q] = id;
                if (out.core_flags[q] && !visited[q]) {
                    visited[q] = true;
                    frontier.push_back(q);
                }
            }
        }
    }
    return out;
}

SilhouetteReport silhouette(const Eigen::MatrixXd& points, const ClusterAssignment& assignment) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (assignment.labels.size() != n) throw DomainError("assignment size does not match points");
    if (assignment.num_clusters < 2) throw DomainError("silhouette undefined for fewer than 2 clusters");
    const auto c = static_cast<std::size_t>(assignment.num_clusters);

    std::vector<std::size_t> sizes(c, 0);
    for (int l : assignment.labels) {
        if (l != ClusterAssignment::noise) ++sizes[static_cast<std::size_t>(l)];
    }

    SilhouetteReport rep;
    rep.per_point.assign(n, 0.0);
    rep.a.assign(n, 0.0);
    rep.b.assign(n, 0.0);
    rep.scored.assign(n, false);
    double total = 0.0;
    std::size_t scored = 0;
    std::vector<double> dist_sum(c);
    for (std::size_t i = 0; i < n; ++i) {
        const int li = assignment.labels[i];
        if (li == ClusterAssignment::noise) continue;
        std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const int lj = assignment.labels[j];
            if (j == i || lj == ClusterAssignment::noise) continue;
            dist_sum[static_cast<std::size_t>(lj)] +=
                (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
        }
        const auto own = static_cast<std::size_t>(li);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) {
            if (k != own && sizes[k] > 0) b = std::min(b, dist_sum[k] / static_cast<double>(sizes[k]));
        }
        double s = 0.0;
        double a = 0.0;
        if (sizes[own] > 1) {
            a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
            const double denom = std::max(a, b);
            s = denom > 0 ? (b - a) / denom : 0.0;
        }
        rep.a[i] = a;
        rep.b[i] = b;
        rep.per_point[i] = s;
        rep.scored[i] = true;
        total += s;
        ++scored;
    }
    rep.mean_sc = scored ? total / static_cast<double>(scored) : 0.0;
    return rep;
}

ClusteringQuality sse(const Eigen::MatrixXd& points, const ClusterAssignment& assignment) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (assignment.labels.size() != n) throw DomainError("assignment size does not match points");
    if (assignment.num_clusters < 1) throw DomainError("SSE needs at least one cluster");
    const auto c = static_cast<Eigen::Index>(assignment.num_clusters);
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(c, points.cols());
    std::vector<double> counts(static_cast<std::size_t>(c), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int l = assignment.labels[i];
        if (l == ClusterAssignment::noise) continue;
        centroids.row(l) += points.row(static_cast<Eigen::Index>(i));
        counts[static_cast<std::size_t>(l)] += 1.0;
    }
    for (Eigen::Index k = 0; k < c; ++k) {
        if (counts[static_cast<std::size_t>(k)] > 0) centroids.row(k) /= counts[static_cast<std::size_t>(k)];
    }
    ClusteringQuality q;
    q.c = assignment.num_clusters;
    for (std::size_t i = 0; i < n; ++i) {
        const int l = assignment.labels[i];
        if (l == ClusterAssignment::noise) continue;
        q.sse += (points.row(static_cast<Eigen::Index>(i)) - centroids.row(l)).squaredNorm();
    }
    for (Eigen::Index k = 0; k < c; ++k) {
        q.centroids.emplace_back(centroids.row(k).begin(), centroids.row(k).end());
    }
    return q;
}

std::vector<SweepEntry> sweep_params(const Eigen::MatrixXd& points, std::span<const double> eps_grid,
                                     std::span<const int> minpts_grid) {
    if (eps_grid.empty() || minpts_grid.empty()) throw DomainError("sweep grids must be non-empty");
    std::vector<SweepEntry> admissible;
    for (double eps : eps_grid) {
        for (int min_pts : minpts_grid) {
            NeighborhoodParams params{eps, min_pts};
            auto assignment = dbscan(points, params);
            if (assignment.num_clusters < 2 || assignment.noise_count() == assignment.labels.size()) continue;
            auto quality = sse(points, assignment);
            quality.sc = silhouette(points, assignment).mean_sc;
            admissible.push_back({params, std::move(quality), std::move(assignment)});
        }
    }
    if (admissible.empty()) throw DomainError("no admissible clustering");
    std::stable_sort(admissible.begin(), admissible.end(), [](const SweepEntry& x, const SweepEntry& y) {
        if (x.quality.sc != y.quality.sc) return x.quality.sc > y.quality.sc;
        if (x.quality.sse != y.quality.sse) return x.quality.sse < y.quality.sse;
        return x.quality.c < y.quality.c;
    });
    return admissible;
}

ClusterAssignment promote_noise(const ClusterAssignment& assignment) {
    ClusterAssignment out = assignment;
    for (auto& l : out.labels) {
        if (l == ClusterAssignment::noise) l = out.num_clusters++;
    }
    return out;
}

void save_assignment_csv(const ClusterAssignment& assignment, std::span<const std::string> entities,
                         const std::filesystem::path& file) {
    if (entities.size() != assignment.labels.size()) throw DomainError("entity count does not match assignment");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    csv::write_row(out, {"entity", "cluster_id", "is_core"});
    for (std::size_t i = 0; i < entities.size(); ++i) {
        csv::write_row(out, {entities[i], std::to_string(assignment.labels[i]),
                             assignment.core_flags[i] ? "1" : "0"});
    }
    if (!out) throw IoError("write failure on '" + file.string() + "'");
}

ClusterAssignment load_assignment_csv(const std::filesystem::path& file, std::vector<std::string>* entities) {
    auto records = csv::read_file(file.string());
    if (records.empty() || records.front().fields != csv::Row{"entity", "cluster_id", "is_core"}) {
        throw FormatError(file.string() + ": header must be 'entity,cluster_id,is_core'");
    }
    ClusterAssignment a;
    if (entities) entities->clear();
    int max_id = -1;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& f = records[r].fields;
        long long id = 0, core = 0;
        if (f.size() != 3 || !csv::parse_int(f[1], id) || !csv::parse_int(f[2], core)) {
            throw FormatError(file.string() + ":" + std::to_string(records[r].line) + ": malformed row");
        }
        if (entities) entities->push_back(f[0]);
        a.labels.push_back(static_cast<int>(id));
        a.core_flags.push_back(core != 0);
        max_id = std::max(max_id, static_cast<int>(id));
    }
    a.num_clusters = max_id + 1;
    return a;
}

std::vector<SweepSummary> summarize_sweep(std::span<const SweepEntry> ranking) {
    std::vector<SweepSummary> out;
    for (const auto& e : ranking) out.push_back({e.params, e.quality.c, e.quality.sc, e.quality.sse});
    return out;
}

void save_quality_csv(std::span<const SweepSummary> ranking, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    csv::write_row(out, {"eps", "min_pts", "c", "sc", "sse"});
    for (const auto& e : ranking) {
        csv::write_row(out, {csv::format_double(e.params.eps), std::to_string(e.params.min_pts),
                             std::to_string(e.c), csv::format_double(e.sc), csv::format_double(e.sse)});
    }
    if (!out) throw IoError("write failure on '" + file.string() + "'");
}

}  // namespace clustreg
