#pragma once

#include "clustreg/panel.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace clustreg {

// Shape of a generated benchmark panel.
//
// Every entity of a planted cluster shares one feature profile, so the
// row-normalized clustering matrix holds exact duplicates within a cluster
// and well-separated rows across clusters. Cluster totals follow a planted
// sparse log-linear law
//   ln I(t) = a0 + sum_{i in support} beta_i ln x_i(t) + noise(t)
// where I(t) is the panel total. Non-support clusters share whatever the
// support clusters leave of I(t), with independent year-to-year shares.
struct SyntheticSpec {
    std::uint64_t seed = 0;
    int n_entities = 80;
    int n_features = 16;
    int n_clusters = 16;
    int n_years = 30;
    int support_size = 7;
    // Standard deviation of the log-target noise, as a fraction of the
    // standard deviation of the noise-free log target.
    double noise_sd = 0.0;
    int first_year = 2000;
    int test_years = 5;

    void validate() const;
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::vector<std::string> entities;
    std::vector<int> labels;          // planted cluster per entity
    std::vector<int> support;         // planted cluster ids with nonzero beta, ascending
    std::vector<double> beta;         // per planted cluster
    double intercept = 0.0;
    std::vector<int> years;
    std::vector<double> log_target;   // ln I(t), noise included
    double noise_scale = 0.0;         // absolute noise sd applied to ln I(t)
    int train_first = 0, train_last = 0, test_first = 0, test_last = 0;
};

struct SyntheticData {
    EnergyPanel panel;
    GroundTruth truth;
};

// Deterministic in spec.seed. Throws DomainError on invalid sizes.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Writes the panel (panel_long.csv, or panel/ with one file per year),
// ground_truth.json and a ready-to-run config.ini into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir, PanelLayout layout);

GroundTruth load_ground_truth(const std::filesystem::path& file);

}  // namespace clustreg
