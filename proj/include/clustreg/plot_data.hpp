#pragma once

#include "clustreg/config.hpp"
#include "clustreg/error.hpp"
#include "clustreg/regression.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace clustreg {

enum class PlotFigure { energy_trends, heatmap, cluster_boxes, lambda_path, fit_scatter, forecast };

PlotFigure parse_plot_figure(const std::string& text);
std::string to_string(PlotFigure figure);

// Raised when a figure needs an artifact that an earlier subcommand writes.
class MissingArtifact : public DomainError {
public:
    MissingArtifact(const std::filesystem::path& file, std::string stage)
        : DomainError("missing '" + file.string() + "'; run the '" + stage + "' subcommand first"),
          stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Writes <output_dir>/plot_<figure>.csv and returns its path. Columns:
//   energy_trends  year,feature,value         panel total per feature and year
//   heatmap        entity,feature,raw,normalized
//   cluster_boxes  cluster_id,entity,year,value   entity totals over train years
//   lambda_path    lambda,coef_name,value     from path_<kind>.csv (lasso by default)
//   fit_scatter    year,actual,predicted      from model_<kind>.json (elastic_net by default)
//   forecast       year,true,predict,difference
std::filesystem::path emit_plot_data(const PipelineConfig& config, PlotFigure figure,
                                     std::optional<PenaltyKind> kind = std::nullopt);

}  // namespace clustreg
