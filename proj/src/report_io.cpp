#include "clustreg/report_io.hpp"

namespace clustreg {

namespace {

std::string severity_name(Severity s) { return s == Severity::error ? "error" : "warning"; }

Severity parse_severity(const std::string& s) {
    if (s == "error") return Severity::error;
    if (s == "warning") return Severity::warning;
    throw FormatError("unknown severity '" + s + "'");
}

}  // namespace

void to_json(Json& j, const ValidationIssue& v) {
    j = Json{{"severity", severity_name(v.severity)}, {"location", v.location}, {"message", v.message}};
}

void from_json(const Json& j, ValidationIssue& v) {
    v.severity = parse_severity(j.at("severity").get<std::string>());
    j.at("location").get_to(v.location);
    j.at("message").get_to(v.message);
}

void to_json(Json& j, const ValidationReport& v) {
    j = Json{{"ok", v.ok}, {"issues", Json::array()}};
    for (const auto& i : v.issues) j["issues"].push_back(i);
}

void from_json(const Json& j, ValidationReport& v) {
    j.at("ok").get_to(v.ok);
    j.at("issues").get_to(v.issues);
}

void to_json(Json& j, const PenaltySpec& v) {
    j = Json{{"kind", to_string(v.kind)}, {"lambda", v.lambda}, {"lambda1", v.lambda1},
             {"lambda2", v.lambda2},      {"alpha", v.alpha}};
}

void from_json(const Json& j, PenaltySpec& v) {
    v.kind = parse_penalty_kind(j.at("kind").get<std::string>());
    j.at("lambda").get_to(v.lambda);
    j.at("lambda1").get_to(v.lambda1);
    j.at("lambda2").get_to(v.lambda2);
    j.at("alpha").get_to(v.alpha);
}

void to_json(Json& j, const LinearModel& v) {
    Json coefs = Json::array();
    for (Eigen::Index k = 0; k < v.coefficients.size(); ++k) {
        coefs.push_back(Json{{"name", v.column_names.at(static_cast<std::size_t>(k))}, {"value", v.coefficients(k)}});
    }
    j = Json{{"intercept", v.intercept},
             {"coefficients", coefs},
             {"penalty", v.penalty},
             {"fit_intercept", v.fit_intercept},
             {"standardized", v.standardized},
             {"converged", v.converged},
             {"rank_deficient", v.rank_deficient},
             {"iterations", v.iterations}};
}

void from_json(const Json& j, LinearModel& v) {
    j.at("intercept").get_to(v.intercept);
    const auto& coefs = j.at("coefficients");
    v.coefficients.resize(static_cast<Eigen::Index>(coefs.size()));
    v.column_names.clear();
    for (std::size_t k = 0; k < coefs.size(); ++k) {
        v.column_names.push_back(coefs[k].at("name").get<std::string>());
        v.coefficients(static_cast<Eigen::Index>(k)) = coefs[k].at("value").get<double>();
    }
    j.at("penalty").get_to(v.penalty);
    j.at("fit_intercept").get_to(v.fit_intercept);
    j.at("standardized").get_to(v.standardized);
    j.at("converged").get_to(v.converged);
    j.at("rank_deficient").get_to(v.rank_deficient);
    j.at("iterations").get_to(v.iterations);
}

void to_json(Json& j, const FitReport& v) {
    j = Json{{"mse", v.mse},   {"r2", v.r2},           {"sparsity", v.sparsity},
             {"y_bar", v.y_bar}, {"residuals", v.residuals}, {"y_hat", v.y_hat}};
}

void from_json(const Json& j, FitReport& v) {
    j.at("mse").get_to(v.mse);
    j.at("r2").get_to(v.r2);
    j.at("sparsity").get_to(v.sparsity);
    j.at("y_bar").get_to(v.y_bar);
    j.at("residuals").get_to(v.residuals);
    j.at("y_hat").get_to(v.y_hat);
}

void to_json(Json& j, const CvRow& v) {
    j = Json{{"lambda", v.lambda}, {"cv_mse", v.cv_mse}, {"fold_mse", v.fold_mse}};
}

void from_json(const Json& j, CvRow& v) {
    j.at("lambda").get_to(v.lambda);
    j.at("cv_mse").get_to(v.cv_mse);
    j.at("fold_mse").get_to(v.fold_mse);
}

void to_json(Json& j, const PathReport& v) {
    j = Json{{"kind", to_string(v.kind)},     {"alpha", v.alpha},       {"column_names", v.column_names},
             {"lambdas", v.lambdas},          {"coefficients", v.coefficients},
             {"intercepts", v.intercepts},    {"r2", v.r2},             {"mse", v.mse}};
}

void from_json(const Json& j, PathReport& v) {
    v.kind = parse_penalty_kind(j.at("kind").get<std::string>());
    j.at("alpha").get_to(v.alpha);
    j.at("column_names").get_to(v.column_names);
    j.at("lambdas").get_to(v.lambdas);
    j.at("coefficients").get_to(v.coefficients);
    j.at("intercepts").get_to(v.intercepts);
    j.at("r2").get_to(v.r2);
    j.at("mse").get_to(v.mse);
}

void to_json(Json& j, const NeighborhoodParams& v) { j = Json{{"eps", v.eps}, {"min_pts", v.min_pts}}; }

void from_json(const Json& j, NeighborhoodParams& v) {
    j.at("eps").get_to(v.eps);
    j.at("min_pts").get_to(v.min_pts);
}

void to_json(Json& j, const ClusterAssignment& v) {
    j = Json{{"num_clusters", v.num_clusters},
             {"labels", v.labels},
             {"core_flags", std::vector<bool>(v.core_flags.begin(), v.core_flags.end())}};
}

void from_json(const Json& j, ClusterAssignment& v) {
    j.at("num_clusters").get_to(v.num_clusters);
    j.at("labels").get_to(v.labels);
    v.core_flags = j.at("core_flags").get<std::vector<bool>>();
}

void to_json(Json& j, const ClusteringQuality& v) {
    j = Json{{"sc", v.sc}, {"sse", v.sse}, {"c", v.c}, {"centroids", v.centroids}};
}

void from_json(const Json& j, ClusteringQuality& v) {
    j.at("sc").get_to(v.sc);
    j.at("sse").get_to(v.sse);
    j.at("c").get_to(v.c);
    j.at("centroids").get_to(v.centroids);
}

void to_json(Json& j, const SweepSummary& v) {
    j = Json{{"eps", v.params.eps}, {"min_pts", v.params.min_pts}, {"c", v.c}, {"sc", v.sc}, {"sse", v.sse}};
}

void from_json(const Json& j, SweepSummary& v) {
    j.at("eps").get_to(v.params.eps);
    j.at("min_pts").get_to(v.params.min_pts);
    j.at("c").get_to(v.c);
    j.at("sc").get_to(v.sc);
    j.at("sse").get_to(v.sse);
}

void to_json(Json& j, const ClusterProfile& v) {
    j = Json{{"cluster_id", v.cluster_id}, {"members", v.members}, {"count", v.count},
             {"sum", v.sum},               {"mean", v.mean},       {"variance", v.variance},
             {"minimum", v.minimum},       {"p25", v.p25},         {"median", v.median},
             {"p75", v.p75},               {"maximum", v.maximum}};
}

void from_json(const Json& j, ClusterProfile& v) {
    j.at("cluster_id").get_to(v.cluster_id);
    j.at("members").get_to(v.members);
    j.at("count").get_to(v.count);
    j.at("sum").get_to(v.sum);
    j.at("mean").get_to(v.mean);
    j.at("variance").get_to(v.variance);
    j.at("minimum").get_to(v.minimum);
    j.at("p25").get_to(v.p25);
    j.at("median").get_to(v.median);
    j.at("p75").get_to(v.p75);
    j.at("maximum").get_to(v.maximum);
}

void to_json(Json& j, const ClusterAggregates& v) {
    j = Json{{"years", v.years}, {"regressors", v.regressors}, {"target", v.target}};
}

void from_json(const Json& j, ClusterAggregates& v) {
    j.at("years").get_to(v.years);
    j.at("regressors").get_to(v.regressors);
    j.at("target").get_to(v.target);
}

void to_json(Json& j, const ForecastRow& v) {
    j = Json{{"year", v.year}, {"true", v.truth}, {"predict", v.predict}, {"difference", v.difference}};
}

void from_json(const Json& j, ForecastRow& v) {
    j.at("year").get_to(v.year);
    j.at("true").get_to(v.truth);
    j.at("predict").get_to(v.predict);
    j.at("difference").get_to(v.difference);
}

void to_json(Json& j, const ForecastSummary& v) {
    j = Json{{"mean_error", v.mean_error}, {"variance", v.variance}};
}

void from_json(const Json& j, ForecastSummary& v) {
    j.at("mean_error").get_to(v.mean_error);
    j.at("variance").get_to(v.variance);
}

void to_json(Json& j, const ModelResult& v) {
    j = Json{{"kind", to_string(v.kind)}, {"model", v.model}, {"fit", v.fit}, {"years", v.years}, {"cv", v.cv}};
}

void from_json(const Json& j, ModelResult& v) {
    v.kind = parse_penalty_kind(j.at("kind").get<std::string>());
    j.at("model").get_to(v.model);
    j.at("fit").get_to(v.fit);
    j.at("years").get_to(v.years);
    j.at("cv").get_to(v.cv);
}

void to_json(Json& j, const PipelineReport& v) {
    j = Json{{"dropped_features", v.dropped_features},
             {"dropped_entities", v.dropped_entities},
             {"entities", v.entities},
             {"features", v.features},
             {"params", v.params},
             {"quality", v.quality},
             {"assignment", v.assignment},
             {"promoted", v.promoted},
             {"ranking", v.ranking},
             {"profiles", v.profiles},
             {"aggregates", v.aggregates},
             {"regressor_names", v.regressor_names},
             {"train_years", v.train_years},
             {"test_years", v.test_years},
             {"epsilon_cells", v.epsilon_cells},
             {"models", v.models},
             {"paths", v.paths},
             {"forecast", v.forecast},
             {"forecast_summary", v.forecast_summary}};
}

void from_json(const Json& j, PipelineReport& v) {
    j.at("dropped_features").get_to(v.dropped_features);
    j.at("dropped_entities").get_to(v.dropped_entities);
    j.at("entities").get_to(v.entities);
    j.at("features").get_to(v.features);
    j.at("params").get_to(v.params);
    j.at("quality").get_to(v.quality);
    j.at("assignment").get_to(v.assignment);
    j.at("promoted").get_to(v.promoted);
    j.at("ranking").get_to(v.ranking);
    j.at("profiles").get_to(v.profiles);
    j.at("aggregates").get_to(v.aggregates);
    j.at("regressor_names").get_to(v.regressor_names);
    j.at("train_years").get_to(v.train_years);
    j.at("test_years").get_to(v.test_years);
    j.at("epsilon_cells").get_to(v.epsilon_cells);
    j.at("models").get_to(v.models);
    j.at("paths").get_to(v.paths);
    j.at("forecast").get_to(v.forecast);
    j.at("forecast_summary").get_to(v.forecast_summary);
}

}  // namespace clustreg
