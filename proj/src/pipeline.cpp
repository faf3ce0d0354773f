#include "clustreg/pipeline.hpp"

#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"
#include "clustreg/preprocess.hpp"
#include "clustreg/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace clustreg {

namespace {

template <class F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const IoError& e) {
        throw StageError(name, e.what(), true);
    } catch (const FormatError& e) {
        throw StageError(name, e.what(), true);
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

DesignMatrix design_for(const ClusterAggregates& agg, std::span<const std::size_t> rows,
                        const std::vector<std::string>& names, double epsilon, std::vector<std::string>& guarded) {
    const auto p = static_cast<Eigen::Index>(names.size());
    DesignMatrix d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), p);
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    d.column_names = names;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t t = rows[r];
        std::vector<std::size_t> hit;
        const auto logs = guarded_log(agg.regressors[t], epsilon, &hit);
        for (std::size_t k : hit) guarded.push_back(std::to_string(agg.years[t]) + ":" + names[k]);
        for (Eigen::Index j = 0; j < p; ++j) d.x(static_cast<Eigen::Index>(r), j) = logs[static_cast<std::size_t>(j)];
        hit.clear();
        const double total = agg.target[t];
        d.y(static_cast<Eigen::Index>(r)) = guarded_log(std::span(&total, 1), epsilon, &hit).front();
        if (!hit.empty()) guarded.push_back(std::to_string(agg.years[t]) + ":total");
    }
    return d;
}

const LambdaGrid& grid_for(const PipelineConfig& c, PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::ridge: return c.ridge_grid;
        case PenaltyKind::lasso: return c.lasso_grid;
        case PenaltyKind::elastic_net: return c.elastic_net_grid;
    }
    return c.ridge_grid;
}

}  // namespace

std::vector<double> guarded_log(std::span<const double> values, double epsilon, std::vector<std::size_t>* guarded) {
    if (!(epsilon > 0)) throw DomainError("log epsilon must be positive");
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v < 0 || !std::isfinite(v)) throw DomainError("log of negative or non-finite value");
        if (v == 0.0) {
            out.push_back(std::log(epsilon));
            if (guarded) guarded->push_back(i);
        } else {
            out.push_back(std::log(v));
        }
    }
    return out;
}

ClusterAggregates aggregate_by_cluster(const EnergyPanel& panel, const ClusterAssignment& assignment) {
    if (assignment.labels.size() != panel.num_entities()) {
        throw DomainError("assignment covers " + std::to_string(assignment.labels.size()) + " entities, panel has " +
                          std::to_string(panel.num_entities()));
    }
    for (int l : assignment.labels) {
        if (l < 0 || l >= assignment.num_clusters) throw DomainError("assignment has unassigned entities");
    }
    ClusterAggregates agg;
    agg.years = panel.years();
    const auto c = static_cast<std::size_t>(assignment.num_clusters);
    for (std::size_t y = 0; y < panel.num_years(); ++y) {
        std::vector<double> x(c, 0.0);
        for (std::size_t e = 0; e < panel.num_entities(); ++e) {
            x[static_cast<std::size_t>(assignment.labels[e])] += panel.entity_total(y, e);
        }
        agg.target.push_back(std::accumulate(x.begin(), x.end(), 0.0));
        agg.regressors.push_back(std::move(x));
    }
    return agg;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DomainError("quantile of empty sample");
    if (!(q >= 0 && q <= 1)) throw DomainError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<ClusterProfile> profile_clusters(const EnergyPanel& panel, const ClusterAssignment& assignment,
                                             std::span<const int> years) {
    if (assignment.labels.size() != panel.num_entities()) throw DomainError("assignment does not match panel");
    if (years.empty()) throw DomainError("profile needs at least one year");
    std::vector<std::size_t> year_ids;
    for (int y : years) year_ids.push_back(panel.year_index(y));

    std::vector<ClusterProfile> out;
    for (int k = 0; k < assignment.num_clusters; ++k) {
        ClusterProfile prof;
        prof.cluster_id = k;
        std::vector<double> pooled;
        for (std::size_t e = 0; e < panel.num_entities(); ++e) {
            if (assignment.labels[e] != k) continue;
            prof.members.push_back(panel.entities()[e]);
            for (std::size_t y : year_ids) pooled.push_back(panel.entity_total(y, e));
        }
        if (pooled.empty()) throw DomainError("cluster " + std::to_string(k) + " has no members");
        prof.count = pooled.size();
        prof.sum = std::accumulate(pooled.begin(), pooled.end(), 0.0);
        prof.mean = prof.sum / static_cast<double>(pooled.size());
        if (pooled.size() > 1) {
            double ss = 0.0;
            for (double v : pooled) ss += (v - prof.mean) * (v - prof.mean);
            prof.variance = ss / static_cast<double>(pooled.size() - 1);
        }
        prof.minimum = *std::min_element(pooled.begin(), pooled.end());
        prof.maximum = *std::max_element(pooled.begin(), pooled.end());
        prof.p25 = quantile(pooled, 0.25);
        prof.median = quantile(pooled, 0.5);
        prof.p75 = quantile(pooled, 0.75);
        out.push_back(std::move(prof));
    }
    return out;
}

ForecastSummary summarize_forecast(std::span<const double> differences) {
    if (differences.size() < 2) throw DomainError("forecast summary needs at least two differences");
    const double n = static_cast<double>(differences.size());
    ForecastSummary s;
    s.mean_error = std::accumulate(differences.begin(), differences.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : differences) ss += (d - s.mean_error) * (d - s.mean_error);
    s.variance = ss / (n - 1.0);
    return s;
}

const ModelResult& PipelineReport::model(PenaltyKind kind) const {
    for (const auto& m : models) {
        if (m.kind == kind) return m;
    }
    throw DomainError("report has no " + to_string(kind) + " model");
}

YearSplit split_years(const PipelineConfig& config, const std::vector<int>& years) {
    YearRange train, test;
    if (config.train_years) {
        train = *config.train_years;
        test = *config.test_years;
    } else {
        if (years.size() < 7) throw DomainError("default split needs at least 7 years");
        test = {years[years.size() - 5], years.back()};
        train = {years.front(), years[years.size() - 6]};
    }
    YearSplit split;
    for (int y : years) {
        if (train.contains(y)) split.train.push_back(y);
        if (test.contains(y)) split.test.push_back(y);
    }
    if (split.train.empty()) throw DomainError("no panel years fall in the train range");
    if (split.test.size() < 2) throw DomainError("forecast needs at least two test years in the panel");
    return split;
}

PipelineReport analyze(const PipelineConfig& config, const EnergyPanel& raw, const AnalyzeOptions& options) {
    stage("config", [&] { config.validate(); });
    PipelineReport report;

    stage("validate", [&] {
        const auto v = validate_panel(raw);
        if (!v.ok) {
            for (const auto& issue : v.issues) {
                if (issue.severity == Severity::error) {
                    throw DomainError("invalid panel: " + issue.message + " at " + issue.location);
                }
            }
        }
    });

    const CleanedPanel cleaned = stage("preprocess", [&] { return drop_zero_series(raw); });
    const EnergyPanel& panel = cleaned.panel;
    report.dropped_features = cleaned.dropped_features;
    report.dropped_entities = cleaned.dropped_entities;
    report.entities = panel.entities();
    report.features = panel.features();

    stage("split", [&] {
        auto split = split_years(config, panel.years());
        report.train_years = std::move(split.train);
        report.test_years = std::move(split.test);
    });

    if (options.assignment) {
        stage("cluster", [&] {
            if (options.assignment_entities != report.entities) {
                throw DomainError("stored assignment does not match the cleaned panel entities; rerun cluster");
            }
            report.assignment = *options.assignment;
            report.promoted = promote_noise(report.assignment);
        });
    } else {
        const FeatureMatrix normalized = stage("preprocess", [&] {
            return minmax_normalize_rows(clustering_matrix(panel, report.train_years, config.anchor_year));
        });
        stage("cluster", [&] {
            const auto ranking = sweep_params(normalized.values, config.eps_grid, config.minpts_grid);
            report.ranking = summarize_sweep(ranking);
            const SweepEntry& top = ranking.front();
            report.params = top.params;
            report.quality = top.quality;
            report.assignment = top.assignment;
            report.promoted = promote_noise(top.assignment);
        });
    }
    if (options.cluster_only) return report;

    stage("aggregate", [&] {
        report.aggregates = aggregate_by_cluster(panel, report.promoted);
        report.profiles = profile_clusters(panel, report.promoted, report.train_years);
        for (int k = 0; k < report.promoted.num_clusters; ++k) {
            report.regressor_names.push_back("cluster_" + std::to_string(k + 1));
        }
    });

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t t = 0; t < report.aggregates.years.size(); ++t) {
        const int y = report.aggregates.years[t];
        if (std::find(report.train_years.begin(), report.train_years.end(), y) != report.train_years.end()) {
            train_rows.push_back(t);
        }
        if (std::find(report.test_years.begin(), report.test_years.end(), y) != report.test_years.end()) {
            test_rows.push_back(t);
        }
    }
    const DesignMatrix train = stage("regress", [&] {
        return design_for(report.aggregates, train_rows, report.regressor_names, config.log_epsilon,
                          report.epsilon_cells);
    });
    const DesignMatrix test = stage("forecast", [&] {
        return design_for(report.aggregates, test_rows, report.regressor_names, config.log_epsilon,
                          report.epsilon_cells);
    });

    stage("regress", [&] {
        for (PenaltyKind kind : options.kinds) {
            const auto grid = grid_for(config, kind).resolve(train, config.fit);
            const auto folds = std::min<int>(config.folds, static_cast<int>(train.n()));
            const CvResult cv = cross_validate(train, kind, grid, folds, config.fit, config.alpha);
            ModelResult result;
            result.kind = kind;
            result.model = fit(train, cv.best, config.fit);
            if (!result.model.converged) {
                throw DomainError(to_string(kind) + " fit did not converge within max_iter");
            }
            result.fit = make_fit_report(result.model, train);
            result.cv = cv.table;
            for (std::size_t t : train_rows) result.years.push_back(report.aggregates.years[t]);
            report.models.push_back(std::move(result));
            if (kind != PenaltyKind::elastic_net) {
                std::vector<double> sorted = grid;
                std::sort(sorted.begin(), sorted.end());
                report.paths.push_back(iterate_lambda(train, kind, sorted, config.fit, config.alpha));
            }
        }
    });

    if (!options.forecast) return report;
    stage("forecast", [&] {
        const LinearModel& model = report.model(PenaltyKind::elastic_net).model;
        const Eigen::VectorXd pred = predict(model, test.x);
        std::vector<double> diffs;
        for (std::size_t r = 0; r < test_rows.size(); ++r) {
            ForecastRow row;
            row.year = report.aggregates.years[test_rows[r]];
            row.truth = test.y(static_cast<Eigen::Index>(r));
            row.predict = pred(static_cast<Eigen::Index>(r));
            row.difference = row.truth - row.predict;
            diffs.push_back(row.difference);
            report.forecast.push_back(row);
        }
        report.forecast_summary = summarize_forecast(diffs);
    });
    return report;
}

std::vector<std::string> pipeline_artifacts() {
    return {"pipeline_report.json", "assignment.csv",   "quality.csv",      "profiles.csv",
            "aggregates.csv",       "model_ridge.json", "model_lasso.json", "model_elastic_net.json",
            "cv_ridge.csv",         "cv_lasso.csv",     "cv_elastic_net.csv", "path_ridge.csv",
            "path_lasso.csv",       "forecast.csv"};
}

namespace {

std::ofstream open_output(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    return out;
}

}  // namespace

void write_cluster_artifacts(const PipelineReport& report, const std::filesystem::path& dir) {
    save_assignment_csv(report.assignment, report.entities, dir / "assignment.csv");
    save_quality_csv(report.ranking, dir / "quality.csv");
}

void write_model_artifacts(const PipelineReport& report, PenaltyKind kind, const std::filesystem::path& dir) {
    const ModelResult& m = report.model(kind);
    save_report(m, dir / ("model_" + to_string(kind) + ".json"));
    save_cv_csv(CvResult{m.model.penalty, m.cv}, dir / ("cv_" + to_string(kind) + ".csv"));
    for (const auto& p : report.paths) {
        if (p.kind == kind) save_path_csv(p, dir / ("path_" + to_string(kind) + ".csv"));
    }
}

void write_forecast_csv(const PipelineReport& report, const std::filesystem::path& file) {
    auto out = open_output(file);
    csv::write_row(out, {"year", "true", "predict", "difference"});
    for (const auto& r : report.forecast) {
        csv::write_row(out, {std::to_string(r.year), csv::format_double(r.truth), csv::format_double(r.predict),
                             csv::format_double(r.difference)});
    }
    if (!out) throw IoError("failed writing '" + file.string() + "'");
}

void write_pipeline_artifacts(const PipelineReport& report, const std::filesystem::path& dir) {
    save_report(report, dir / "pipeline_report.json");
    write_cluster_artifacts(report, dir);
    {
        auto out = open_output(dir / "profiles.csv");
        csv::write_row(out, {"cluster_id", "count", "sum", "mean", "variance", "minimum", "p25", "median", "p75",
                             "maximum"});
        for (const auto& p : report.profiles) {
            csv::write_row(out, {std::to_string(p.cluster_id + 1), std::to_string(p.count), csv::format_double(p.sum),
                                 csv::format_double(p.mean), csv::format_double(p.variance),
                                 csv::format_double(p.minimum), csv::format_double(p.p25),
                                 csv::format_double(p.median), csv::format_double(p.p75),
                                 csv::format_double(p.maximum)});
        }
    }
    {
        auto out = open_output(dir / "aggregates.csv");
        csv::Row header{"year"};
        header.insert(header.end(), report.regressor_names.begin(), report.regressor_names.end());
        header.push_back("total");
        csv::write_row(out, header);
        const auto& agg = report.aggregates;
        for (std::size_t t = 0; t < agg.years.size(); ++t) {
            csv::Row row{std::to_string(agg.years[t])};
            for (double v : agg.regressors[t]) row.push_back(csv::format_double(v));
            row.push_back(csv::format_double(agg.target[t]));
            csv::write_row(out, row);
        }
    }
    for (const auto& m : report.models) write_model_artifacts(report, m.kind, dir);
    write_forecast_csv(report, dir / "forecast.csv");
}

PipelineReport run_pipeline(const PipelineConfig& config) {
    if (config.data_path.empty()) throw StageError("config", "no data path configured");
    const EnergyPanel panel = stage("load", [&] { return load_panel(config.data_path, config.layout); });
    PipelineReport report = analyze(config, panel);
    stage("write", [&] {
        const auto& dir = config.output_dir;
        std::filesystem::create_directories(dir);
        std::vector<std::filesystem::path> preexisting;
        for (const auto& name : pipeline_artifacts()) {
            if (std::filesystem::exists(dir / name)) preexisting.push_back(dir / name);
        }
        try {
            write_pipeline_artifacts(report, dir);
        } catch (...) {
            for (const auto& name : pipeline_artifacts()) {
                const auto path = dir / name;
                if (std::find(preexisting.begin(), preexisting.end(), path) == preexisting.end()) {
                    std::error_code ec;
                    std::filesystem::remove(path, ec);
                }
            }
            throw;
        }
    });
    return report;
}

}  // namespace clustreg
