#include "clustreg/preprocess.hpp"

#include "clustreg/error.hpp"

#include <cmath>

namespace clustreg {

FeatureMatrix make_feature_matrix(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw DomainError("ragged feature matrix rows");
        for (std::size_t j = 0; j < cols; ++j) m.values(i, j) = rows[i][j];
        m.entities.push_back("e" + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) m.features.push_back("f" + std::to_string(j));
    return m;
}

CleanedPanel drop_zero_series(const EnergyPanel& panel) {
    const std::size_t ny = panel.num_years(), ne = panel.num_entities(), nf = panel.num_features();
    std::vector<bool> feature_used(nf, false), entity_used(ne, false);
    for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t f = 0; f < nf; ++f) {
                if (panel(y, e, f) != 0.0) {
                    feature_used[f] = true;
                    entity_used[e] = true;
                }
            }
        }
    }
    CleanedPanel out;
    std::vector<std::size_t> keep_e, keep_f;
    std::vector<std::string> entities, features;
    for (std::size_t e = 0; e < ne; ++e) {
        if (entity_used[e]) {
            keep_e.push_back(e);
            entities.push_back(panel.entities()[e]);
        } else {
            out.dropped_entities.push_back(panel.entities()[e]);
        }
    }
    for (std::size_t f = 0; f < nf; ++f) {
        if (feature_used[f]) {
            keep_f.push_back(f);
            features.push_back(panel.features()[f]);
        } else {
            out.dropped_features.push_back(panel.features()[f]);
        }
    }
    if (keep_e.empty() || keep_f.empty()) throw DomainError("panel empty after cleaning");

    out.panel = EnergyPanel::zeros(panel.years(), std::move(entities), std::move(features));
    for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t e = 0; e < keep_e.size(); ++e) {
            for (std::size_t f = 0; f < keep_f.size(); ++f) out.panel(y, e, f) = panel(y, keep_e[e], keep_f[f]);
        }
    }
    return out;
}

FeatureMatrix minmax_normalize_rows(const FeatureMatrix& m) {
    FeatureMatrix out = m;
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
        auto row = out.values.row(i);
        if (row.size() == 0) continue;
        const double lo = row.minCoeff();
        const double hi = row.maxCoeff();
        if (hi > lo) {
            row = (row.array() - lo) / (hi - lo);
        } else {
            row.setZero();
        }
    }
    return out;
}

std::vector<double> log_transform(std::span<const double> series, double epsilon) {
    if (!(epsilon >= 0)) throw DomainError("log epsilon must be non-negative");
    std::vector<double> out;
    out.reserve(series.size());
    for (double x : series) {
        if (x < 0) throw DomainError("log transform of negative value");
        const double arg = x + epsilon;
        if (!(arg > 0)) throw DomainError("log transform of zero with epsilon 0");
        out.push_back(std::log(arg));
    }
    return out;
}

FeatureMatrix clustering_matrix(const EnergyPanel& panel, std::span<const int> years,
                                std::optional<int> anchor_year) {
    std::vector<std::size_t> year_ids;
    if (anchor_year) {
        year_ids.push_back(panel.year_index(*anchor_year));
    } else {
        for (int y : years) year_ids.push_back(panel.year_index(y));
    }
    if (year_ids.empty()) throw DomainError("clustering matrix needs at least one year");

    FeatureMatrix m;
    m.entities = panel.entities();
    m.features = panel.features();
    m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(panel.num_entities()),
                                     static_cast<Eigen::Index>(panel.num_features()));
    for (std::size_t y : year_ids) {
        for (std::size_t e = 0; e < panel.num_entities(); ++e) {
            for (std::size_t f = 0; f < panel.num_features(); ++f) m.values(e, f) += panel(y, e, f);
        }
    }
    m.values /= static_cast<double>(year_ids.size());
    return m;
}

}  // namespace clustreg
