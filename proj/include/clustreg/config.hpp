#pragma once

#include "clustreg/panel.hpp"
#include "clustreg/regression.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace clustreg {

struct YearRange {
    int first = 0;
    int last = 0;

    bool contains(int year) const noexcept { return year >= first && year <= last; }
    bool operator==(const YearRange&) const = default;
};

// Either an explicit list of lambdas or a geometric grid anchored at the
// data's lambda_max ("auto").
struct LambdaGrid {
    bool automatic = false;
    int count = 81;
    double ratio = 1e-8;
    std::vector<double> values;

    std::vector<double> resolve(const DesignMatrix& d, const FitOptions& opts) const;
};

// Parsed from an INI file with sections [data], [preprocess], [cluster],
// [regress] and [forecast]. Every key has a default; see README.
struct PipelineConfig {
    // [data]
    std::filesystem::path data_path;
    PanelLayout layout = PanelLayout::long_format;
    std::filesystem::path output_dir = "out";
    // [preprocess]
    std::optional<int> anchor_year;  // unset: mean over the train years
    double log_epsilon = 1e-6;
    // [cluster]
    std::vector<double> eps_grid;
    std::vector<int> minpts_grid;
    // [regress]
    LambdaGrid ridge_grid;
    LambdaGrid lasso_grid;
    LambdaGrid elastic_net_grid;
    double alpha = 0.5;
    int folds = 5;
    FitOptions fit;
    // [forecast]; unset ranges default to "last five panel years are test"
    std::optional<YearRange> train_years;
    std::optional<YearRange> test_years;

    PipelineConfig();

    // Checks grids, folds, alpha and the train/test ranges (disjoint, test
    // strictly after train). Throws DomainError.
    void validate() const;
};

// Relative paths inside the file resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& file);

// Parsing helpers shared with the CLI. Lists accept "a,b,c" or an inclusive
// range "start:step:stop".
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
LambdaGrid parse_lambda_grid(const std::string& text);
YearRange parse_year_range(const std::string& text);

}  // namespace clustreg
