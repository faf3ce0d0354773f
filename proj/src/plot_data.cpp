#include "clustreg/plot_data.hpp"

#include "clustreg/clustering.hpp"
#include "clustreg/csv.hpp"
#include "clustreg/pipeline.hpp"
#include "clustreg/preprocess.hpp"
#include "clustreg/report_io.hpp"

#include <fstream>
#include <sstream>

namespace clustreg {

namespace {

const std::pair<PlotFigure, const char*> kFigures[] = {
    {PlotFigure::energy_trends, "energy_trends"}, {PlotFigure::heatmap, "heatmap"},
    {PlotFigure::cluster_boxes, "cluster_boxes"}, {PlotFigure::lambda_path, "lambda_path"},
    {PlotFigure::fit_scatter, "fit_scatter"},     {PlotFigure::forecast, "forecast"},
};

std::filesystem::path require(const std::filesystem::path& file, const std::string& stage) {
    if (!std::filesystem::exists(file)) throw MissingArtifact(file, stage);
    return file;
}

EnergyPanel cleaned_panel(const PipelineConfig& config) {
    if (config.data_path.empty()) throw DomainError("no data path configured");
    const EnergyPanel raw = load_panel(config.data_path, config.layout);
    const auto v = validate_panel(raw);
    if (!v.ok) throw DomainError("panel does not validate; run the 'validate' subcommand for details");
    return drop_zero_series(raw).panel;
}

void energy_trends(const PipelineConfig& config, std::ostream& out) {
    const EnergyPanel panel = load_panel(config.data_path, config.layout);
    csv::write_row(out, {"year", "feature", "value"});
    for (std::size_t y = 0; y < panel.num_years(); ++y) {
        for (std::size_t f = 0; f < panel.num_features(); ++f) {
            double total = 0.0;
            for (std::size_t e = 0; e < panel.num_entities(); ++e) total += panel(y, e, f);
            csv::write_row(out, {std::to_string(panel.years()[y]), panel.features()[f], csv::format_double(total)});
        }
    }
}

void heatmap(const PipelineConfig& config, std::ostream& out) {
    const EnergyPanel panel = cleaned_panel(config);
    const auto split = split_years(config, panel.years());
    const FeatureMatrix raw = clustering_matrix(panel, split.train, config.anchor_year);
    const FeatureMatrix norm = minmax_normalize_rows(raw);
    csv::write_row(out, {"entity", "feature", "raw", "normalized"});
    for (Eigen::Index e = 0; e < raw.values.rows(); ++e) {
        for (Eigen::Index f = 0; f < raw.values.cols(); ++f) {
            csv::write_row(out, {raw.entities[static_cast<std::size_t>(e)], raw.features[static_cast<std::size_t>(f)],
                                 csv::format_double(raw.values(e, f)), csv::format_double(norm.values(e, f))});
        }
    }
}

void cluster_boxes(const PipelineConfig& config, std::ostream& out) {
    const auto file = require(config.output_dir / "assignment.csv", "cluster");
    const EnergyPanel panel = cleaned_panel(config);
    std::vector<std::string> entities;
    const ClusterAssignment promoted = promote_noise(load_assignment_csv(file, &entities));
    if (entities != panel.entities()) throw DomainError("assignment.csv does not match the panel; rerun cluster");
    const auto split = split_years(config, panel.years());
    csv::write_row(out, {"cluster_id", "entity", "year", "value"});
    for (int k = 0; k < promoted.num_clusters; ++k) {
        for (std::size_t e = 0; e < entities.size(); ++e) {
            if (promoted.labels[e] != k) continue;
            for (int year : split.train) {
                csv::write_row(out, {std::to_string(k + 1), entities[e], std::to_string(year),
                                     csv::format_double(panel.entity_total(panel.year_index(year), e))});
            }
        }
    }
}

void lambda_path(const PipelineConfig& config, PenaltyKind kind, std::ostream& out) {
    if (kind == PenaltyKind::elastic_net) throw DomainError("lambda_path is available for ridge and lasso only");
    const auto file = require(config.output_dir / ("path_" + to_string(kind) + ".csv"), "regress");
    const auto records = csv::read_file(file.string());
    if (records.empty() || records.front().fields.size() < 3 || records.front().fields.front() != "lambda") {
        throw FormatError(file.string() + ": unexpected path header");
    }
    const auto& header = records.front().fields;
    const std::size_t p = header.size() - 3;  // lambda, coefficients..., r2, mse
    csv::write_row(out, {"lambda", "coef_name", "value"});
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& row = records[r].fields;
        if (row.size() != header.size()) {
            throw FormatError(file.string() + ":" + std::to_string(records[r].line) + ": wrong field count");
        }
        for (std::size_t j = 0; j < p; ++j) csv::write_row(out, {row[0], header[j + 1], row[j + 1]});
    }
}

void fit_scatter(const PipelineConfig& config, PenaltyKind kind, std::ostream& out) {
    const auto file = require(config.output_dir / ("model_" + to_string(kind) + ".json"), "regress");
    const auto m = load_report<ModelResult>(file);
    if (m.years.size() != m.fit.y_hat.size() || m.fit.residuals.size() != m.fit.y_hat.size()) {
        throw FormatError(file.string() + ": fit arrays disagree in length");
    }
    csv::write_row(out, {"year", "actual", "predicted"});
    for (std::size_t i = 0; i < m.years.size(); ++i) {
        csv::write_row(out, {std::to_string(m.years[i]), csv::format_double(m.fit.y_hat[i] + m.fit.residuals[i]),
                             csv::format_double(m.fit.y_hat[i])});
    }
}

void forecast(const PipelineConfig& config, std::ostream& out) {
    const auto file = require(config.output_dir / "forecast.csv", "forecast");
    const auto records = csv::read_file(file.string());
    for (const auto& r : records) csv::write_row(out, r.fields);
}

}  // namespace

PlotFigure parse_plot_figure(const std::string& text) {
    for (const auto& [figure, name] : kFigures) {
        if (text == name) return figure;
    }
    throw FormatError("unknown figure '" + text + "'");
}

std::string to_string(PlotFigure figure) {
    for (const auto& [f, name] : kFigures) {
        if (f == figure) return name;
    }
    return "unknown";
}

std::filesystem::path emit_plot_data(const PipelineConfig& config, PlotFigure figure,
                                     std::optional<PenaltyKind> kind) {
    // Render into memory first so a failure leaves no partial file behind.
    std::ostringstream buffer;
    switch (figure) {
        case PlotFigure::energy_trends: energy_trends(config, buffer); break;
        case PlotFigure::heatmap: heatmap(config, buffer); break;
        case PlotFigure::cluster_boxes: cluster_boxes(config, buffer); break;
        case PlotFigure::lambda_path: lambda_path(config, kind.value_or(PenaltyKind::lasso), buffer); break;
        case PlotFigure::fit_scatter: fit_scatter(config, kind.value_or(PenaltyKind::elastic_net), buffer); break;
        case PlotFigure::forecast: forecast(config, buffer); break;
    }
    std::filesystem::create_directories(config.output_dir);
    const auto file = config.output_dir / ("plot_" + to_string(figure) + ".csv");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << buffer.str();
    if (!out) throw IoError("failed writing '" + file.string() + "'");
    return file;
}

}  // namespace clustreg
