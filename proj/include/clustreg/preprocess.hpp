#pragma once

#include "clustreg/panel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clustreg {

// One row per entity, one column per feature.
struct FeatureMatrix {
    std::vector<std::string> entities;
    std::vector<std::string> features;
    Eigen::MatrixXd values;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

// Builds a matrix from raw rows; throws DomainError on ragged input.
FeatureMatrix make_feature_matrix(const std::vector<std::vector<double>>& rows);

struct CleanedPanel {
    EnergyPanel panel;
    std::vector<std::string> dropped_features;
    std::vector<std::string> dropped_entities;
};

// Removes feature columns and entity rows that are zero in every year.
// Throws DomainError("panel empty after cleaning") when nothing is left.
CleanedPanel drop_zero_series(const EnergyPanel& panel);

// x' = (x - min) / (max - min) per entity row. Constant rows become zeros.
FeatureMatrix minmax_normalize_rows(const FeatureMatrix& m);

// ln(x + epsilon) elementwise. Throws DomainError on negative input or when
// an argument to ln is not positive.
std::vector<double> log_transform(std::span<const double> series, double epsilon);

// Entity x feature matrix the clustering runs on: the mean over `years` of
// each cell, or the single year when `anchor_year` is set.
FeatureMatrix clustering_matrix(const EnergyPanel& panel, std::span<const int> years,
                                std::optional<int> anchor_year = std::nullopt);

}  // namespace clustreg
