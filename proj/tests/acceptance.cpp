// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exits non-zero when
// any criterion fails. Criteria 10-13 need the Sichuan panel; point
// CLUSTREG_SICHUAN_DATA at a config file (.ini) or at the panel itself
// (a long CSV, or a directory of panel_<year>.csv files).

#include "clustreg/clustering.hpp"
#include "clustreg/config.hpp"
#include "clustreg/pipeline.hpp"
#include "clustreg/regression.hpp"
#include "clustreg/synthetic.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace clustreg;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
    Outcome outcome = Outcome::fail;
    std::string detail;
};

Verdict verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Random regression instances with n <= 8 and p <= 3.
std::vector<oracle::Instance> instance_corpus(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> p_dist(1, 3);
    std::vector<oracle::Instance> out;
    while (static_cast<int>(out.size()) < count) {
        const int p = p_dist(rng);
        const int n = std::uniform_int_distribution<int>(p + 2, 8)(rng);
        out.push_back(oracle::random_instance(rng, n, p));
    }
    return out;
}

DesignMatrix design(const oracle::Instance& inst) { return make_design(inst.x, inst.y); }

double max_diff(const LinearModel& a, const LinearModel& b) {
    return std::max((a.coefficients - b.coefficients).cwiseAbs().maxCoeff(), std::abs(a.intercept - b.intercept));
}

Verdict solver_oracle() {
    Clock clock;
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> lam(0.0, 3.0);
    const auto corpus = instance_corpus(100, 1000);
    double worst = 0.0;
    for (const auto& inst : corpus) {
        const auto d = design(inst);
        const double l1 = lam(rng), l2 = lam(rng);
        const auto compare = [&](const LinearModel& m, double a, double b) {
            const auto ref = oracle::grid_minimize(inst.x, inst.y, a, b, 8.0, 1e-4);
            for (Eigen::Index j = 0; j < d.p(); ++j) {
                worst = std::max(worst, std::abs(m.coefficients(j) - ref[static_cast<std::size_t>(j)]));
            }
        };
        compare(fit_ridge(d, l2), 0.0, l2);
        compare(fit_lasso(d, l1), l1, 0.0);
        compare(fit_elastic_net(d, l1, l2), l1, l2);
    }
    const double t = clock.seconds();
    return verdict(worst < 1e-3 && t < 60.0, std::to_string(corpus.size()) + " instances x 3 penalties, max |beta - grid| = " +
                                                 num(worst) + " (< 1e-3), " + num(t) + " s (< 60 s)");
}

Verdict kkt_suite() {
    std::mt19937_64 rng(2001);
    std::uniform_real_distribution<double> lam(0.0, 5.0);
    double worst = 0.0;
    int fits = 0, unconverged = 0;
    for (const auto& inst : instance_corpus(200, 2000)) {
        const auto d = design(inst);
        for (const auto& m : {fit_lasso(d, lam(rng)), fit_elastic_net(d, lam(rng), lam(rng))}) {
            if (!m.converged) {
                ++unconverged;
                continue;
            }
            ++fits;
            worst = std::max(worst, kkt_check(m, d));
        }
    }
    return verdict(worst < 1e-6 && fits > 0, std::to_string(fits) + " converged fits (" + std::to_string(unconverged) +
                                                 " not converged), max violation " + num(worst) + " (< 1e-6)");
}

Verdict boundary_reductions() {
    std::mt19937_64 rng(3001);
    std::uniform_real_distribution<double> lam(0.01, 5.0);
    double worst = 0.0;
    const auto corpus = instance_corpus(200, 3000);
    for (const auto& inst : corpus) {
        const auto d = design(inst);
        const auto ols = fit_ols(d);
        const double l = lam(rng);
        worst = std::max({worst, max_diff(fit_lasso(d, 0.0), ols), max_diff(fit_ridge(d, 0.0), ols),
                          max_diff(fit_elastic_net(d, 0.0, 0.0), ols),
                          max_diff(fit_elastic_net(d, 0.0, l), fit_ridge(d, l)),
                          max_diff(fit_elastic_net(d, l, 0.0), fit_lasso(d, l))});
    }
    return verdict(worst < 1e-8, std::to_string(corpus.size()) + " instances, max deviation " + num(worst) + " (< 1e-8)");
}

Verdict closed_forms() {
    FitOptions opts;
    opts.fit_intercept = false;
    const auto ridge = fit_ridge(make_design({{1}, {2}, {3}}, {1, 2, 3}), 1.0, opts).coefficients(0);
    const auto pm = make_design({{1}, {-1}}, {1, -1});
    const auto lasso = fit_lasso(pm, 1.0, opts).coefficients(0);
    const auto en = fit_elastic_net(pm, 1.0, 1.0, opts).coefficients(0);
    const double worst = std::max({std::abs(ridge - 14.0 / 15.0), std::abs(lasso - 0.75), std::abs(en - 0.5)});
    return verdict(worst < 1e-10, "ridge " + num(ridge) + " (14/15), lasso " + num(lasso) + " (0.75), elastic net " +
                                      num(en) + " (0.5), max error " + num(worst) + " (< 1e-10)");
}

Eigen::MatrixXd random_points(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_dist(1, 50), d_dist(1, 4), blobs(1, 4);
    std::uniform_real_distribution<double> centre(0.0, 3.0);
    std::normal_distribution<double> jitter(0.0, 0.25);
    const int n = n_dist(rng), d = d_dist(rng), k = blobs(rng);
    Eigen::MatrixXd c(k, d);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = centre(rng);
    Eigen::MatrixXd pts(n, d);
    std::uniform_int_distribution<int> pick(0, k - 1);
    for (int i = 0; i < n; ++i) {
        const int b = pick(rng);
        for (int j = 0; j < d; ++j) pts(i, j) = c(b, j) + jitter(rng);
    }
    return pts;
}

// True when the core partition matches the oracle's components and every
// border label names an adjacent component.
bool matches_density_graph(const Eigen::MatrixXd& pts, const NeighborhoodParams& params) {
    oracle::Matrix rows;
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        rows.emplace_back();
        for (Eigen::Index c = 0; c < pts.cols(); ++c) rows.back().push_back(pts(r, c));
    }
    const auto a = dbscan(pts, params);
    const auto g = oracle::density_graph(rows, params.eps, params.min_pts);
    if (a.core_flags != g.core || a.num_clusters != g.num_components) return false;
    std::map<int, int> comp_to_label, label_to_comp;
    for (std::size_t i = 0; i < g.core.size(); ++i) {
        if (!g.core[i]) continue;
        auto [it, fresh] = comp_to_label.emplace(g.component[i], a.labels[i]);
        auto [jt, fresh2] = label_to_comp.emplace(a.labels[i], g.component[i]);
        if (it->second != a.labels[i] || jt->second != g.component[i]) return false;
    }
    for (std::size_t i = 0; i < g.core.size(); ++i) {
        if (g.core[i]) continue;
        if (g.adjacent_components[i].empty()) {
            if (a.labels[i] != ClusterAssignment::noise) return false;
            continue;
        }
        bool adjacent = false;
        for (int comp : g.adjacent_components[i]) adjacent = adjacent || comp_to_label.at(comp) == a.labels[i];
        if (!adjacent) return false;
    }
    return true;
}

Verdict dbscan_oracle() {
    Clock clock;
    std::mt19937_64 rng(5001);
    std::uniform_real_distribution<double> eps_dist(0.05, 1.0);
    std::uniform_int_distribution<int> mp_dist(1, 6);
    int sets = 0, agree = 0;
    for (; sets < 200; ++sets) {
        const auto pts = random_points(rng);
        if (matches_density_graph(pts, {eps_dist(rng), mp_dist(rng)})) ++agree;
    }
    const double t = clock.seconds();
    return verdict(agree == sets && t < 30.0, std::to_string(agree) + "/" + std::to_string(sets) +
                                                  " point sets match the density-graph oracle, " + num(t) +
                                                  " s (< 30 s)");
}

Eigen::MatrixXd line(std::initializer_list<double> xs) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) m(i++, 0) = x;
    return m;
}

ClusterAssignment labelled(std::vector<int> labels) {
    ClusterAssignment a;
    a.labels = std::move(labels);
    a.core_flags.assign(a.labels.size(), true);
    for (int l : a.labels) a.num_clusters = std::max(a.num_clusters, l + 1);
    return a;
}

Verdict quality_fixtures() {
    const double duplicated = silhouette(line({0, 0, 0, 10, 10}), labelled({0, 0, 0, 1, 1})).mean_sc;
    const double four = silhouette(line({0, 1, 10, 11}), labelled({0, 0, 1, 1})).mean_sc;
    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 2, 0;
    const double s = sse(two, labelled({0, 0})).sse;
    const bool ok = duplicated == 1.0 && std::abs(four - 0.904762) <= 1e-6 && s == 2.0;
    return verdict(ok, "duplicated SC " + num(duplicated) + " (1), 4-point mean SC " + num(four) +
                           " (0.904762 +- 1e-6), 2-point SSE " + num(s) + " (2)");
}

Verdict forecast_fixture() {
    const std::vector<double> diffs{-0.0221, 0.0548, 0.0635, 0.0972, 0.0916};
    const auto s = summarize_forecast(diffs);
    return verdict(std::abs(s.mean_error - 0.0570) <= 1e-4 && std::abs(s.variance - 0.0023) <= 1e-4,
                   "mean error " + num(s.mean_error) + " (0.0570 +- 1e-4), variance " + num(s.variance) +
                       " (0.0023 +- 1e-4)");
}

// Largest relative gap between sum_i x_i(t), I(t) and the raw panel total.
double conservation_gap(const EnergyPanel& panel, const PipelineReport& report) {
    double worst = 0.0;
    const auto& agg = report.aggregates;
    for (std::size_t t = 0; t < agg.years.size(); ++t) {
        double sum = 0.0, raw = 0.0;
        for (double x : agg.regressors[t]) sum += x;
        const auto y = panel.year_index(agg.years[t]);
        for (std::size_t e = 0; e < panel.num_entities(); ++e) raw += panel.entity_total(y, e);
        const double scale = std::max(1.0, std::abs(agg.target[t]));
        worst = std::max({worst, std::abs(sum - agg.target[t]) / scale, std::abs(raw - agg.target[t]) / scale});
    }
    return worst;
}

struct Recovery {
    bool clusters = false;
    bool support = false;
    int found_clusters = 0;
    std::string detail;
};

std::vector<double> conservation_gaps;

Recovery recover(std::uint64_t seed, double noise_sd) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.n_clusters = 16;
    spec.support_size = 7;
    spec.noise_sd = noise_sd;
    const auto data = generate_synthetic(spec);
    PipelineConfig config;
    config.train_years = YearRange{data.truth.train_first, data.truth.train_last};
    config.test_years = YearRange{data.truth.test_first, data.truth.test_last};
    const auto report = analyze(config, data.panel);
    conservation_gaps.push_back(conservation_gap(data.panel, report));

    Recovery r;
    r.found_clusters = report.quality.c;
    // Each found cluster must hold entities of exactly one planted cluster.
    std::map<int, int> planted_of;
    bool pure = report.assignment.noise_count() == 0;
    for (std::size_t e = 0; e < report.promoted.labels.size(); ++e) {
        auto [it, fresh] = planted_of.emplace(report.promoted.labels[e], data.truth.labels[e]);
        pure = pure && it->second == data.truth.labels[e];
    }
    r.clusters = pure && r.found_clusters == spec.n_clusters;
    if (!r.clusters) return r;

    const auto& lasso = report.model(PenaltyKind::lasso).model;
    std::set<int> found;
    for (Eigen::Index k = 0; k < lasso.coefficients.size(); ++k) {
        if (std::abs(lasso.coefficients(k)) > kNonzeroThreshold) found.insert(planted_of.at(static_cast<int>(k)));
    }
    const std::set<int> planted(data.truth.support.begin(), data.truth.support.end());
    r.support = found == planted;
    return r;
}

Verdict synthetic_recovery() {
    Clock clock;
    const auto exact = recover(1, 0.0);
    int successes = 0;
    const int seeds = 20;
    std::string failed;
    for (int s = 1; s <= seeds; ++s) {
        const auto r = recover(static_cast<std::uint64_t>(100 + s), 0.01);
        if (r.clusters && r.support) {
            ++successes;
        } else {
            failed += " " + std::to_string(100 + s) + (r.clusters ? "" : "(C)");
        }
    }
    const double t = clock.seconds();
    const double rate = static_cast<double>(successes) / seeds;
    const bool ok = exact.clusters && exact.support && rate >= 0.9 && t < 120.0;
    return verdict(ok, std::string("noise 0: C=") + std::to_string(exact.found_clusters) + " (16) support " +
                           (exact.support ? "exact" : "wrong") + "; noise_sd 0.01: " + std::to_string(successes) + "/" +
                           std::to_string(seeds) + " seeds recovered (>= 90%)" +
                           (failed.empty() ? "" : ", missed seeds" + failed) + "; " + num(t) + " s (< 120 s)");
}

Verdict conservation() {
    double worst = 0.0;
    for (double g : conservation_gaps) worst = std::max(worst, g);
    return verdict(!conservation_gaps.empty() && worst <= 1e-9,
                   std::to_string(conservation_gaps.size()) + " pipeline runs, max relative gap " + num(worst) +
                       " (<= 1e-9)");
}

// Configuration for the provincial dataset: as given, or the standard
// 2000-2014 / 2015-2019 split around a bare panel path.
PipelineConfig sichuan_config(const std::string& where) {
    std::filesystem::path path(where);
    if (path.extension() == ".ini") return load_config(path);
    PipelineConfig c;
    c.data_path = path;
    c.layout = std::filesystem::is_directory(path) ? PanelLayout::wide : PanelLayout::long_format;
    c.train_years = YearRange{2000, 2014};
    c.test_years = YearRange{2015, 2019};
    return c;
}

struct SichuanRun {
    PipelineReport report;
    double conservation = 0.0;
};

}  // namespace

int main() {
    int failures = 0;
    const auto print = [&](int id, const std::string& name, const Verdict& v) {
        const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::skip ? "SKIP" : "FAIL";
        if (v.outcome == Outcome::fail) ++failures;
        std::printf("[%s] %2d %s: %s\n", tag, id, name.c_str(), v.detail.c_str());
        std::fflush(stdout);
    };
    const auto guarded = [&](int id, const std::string& name, const std::function<Verdict()>& body) {
        try {
            print(id, name, body());
        } catch (const std::exception& e) {
            print(id, name, {Outcome::fail, std::string("exception: ") + e.what()});
        }
    };

    guarded(1, "solver oracle equivalence", solver_oracle);
    guarded(2, "KKT suite", kkt_suite);
    guarded(3, "boundary reductions", boundary_reductions);
    guarded(4, "closed-form fixtures", closed_forms);
    guarded(5, "DBSCAN oracle", dbscan_oracle);
    guarded(6, "silhouette/SSE fixtures", quality_fixtures);
    guarded(7, "forecast-summary fixture", forecast_fixture);
    guarded(8, "synthetic end-to-end recovery", synthetic_recovery);

    const char* data = std::getenv("CLUSTREG_SICHUAN_DATA");
    std::optional<SichuanRun> sichuan;
    std::string sichuan_error;
    if (data && *data) {
        try {
            auto config = sichuan_config(data);
            config.lasso_grid = parse_lambda_grid("0.0081");
            config.alpha = 0.5;
            config.elastic_net_grid = parse_lambda_grid("5.5652e-4");  // lambda1 = lambda2 = 2.7826e-4
            const auto panel = load_panel(config.data_path, config.layout);
            SichuanRun run;
            run.report = analyze(config, panel);
            run.conservation = conservation_gap(panel, run.report);
            conservation_gaps.push_back(run.conservation);
            sichuan = std::move(run);
        } catch (const std::exception& e) {
            sichuan_error = std::string("exception: ") + e.what();
        }
    }

    guarded(9, "conservation", conservation);

    const auto conditional = [&](int id, const std::string& name, const std::function<Verdict(const PipelineReport&)>& body) {
        if (!data || !*data) {
            print(id, name, {Outcome::skip, "set CLUSTREG_SICHUAN_DATA to the provincial panel"});
        } else if (!sichuan) {
            print(id, name, {Outcome::fail, sichuan_error});
        } else {
            guarded(id, name, [&] { return body(sichuan->report); });
        }
    };
    conditional(10, "provincial clustering", [](const PipelineReport& r) {
        return verdict(r.quality.c == 16 && std::abs(r.quality.sc - 0.6) <= 0.05 && std::abs(r.quality.sse - 5.0) <= 1.0,
                       "C=" + std::to_string(r.quality.c) + " (16), SC " + num(r.quality.sc) + " (0.6 +- 0.05), SSE " +
                           num(r.quality.sse) + " (5 +- 1)");
    });
    conditional(11, "provincial lasso", [](const PipelineReport& r) {
        const auto& m = r.model(PenaltyKind::lasso);
        return verdict(m.fit.sparsity == 0.4375 && m.fit.r2 >= 0.995 && m.fit.mse <= 5e-4,
                       "lambda " + num(m.model.penalty.strength()) + ", s " + num(m.fit.sparsity) + " (0.4375), R2 " +
                           num(m.fit.r2) + " (>= 0.995), MSE " + num(m.fit.mse) + " (<= 5e-4)");
    });
    conditional(12, "provincial elastic net", [](const PipelineReport& r) {
        const auto& m = r.model(PenaltyKind::elastic_net);
        return verdict(m.fit.r2 >= 0.998 && m.fit.mse <= 5e-5,
                       "lambda1 " + num(m.model.penalty.l1()) + ", lambda2 " + num(m.model.penalty.l2()) + ", R2 " +
                           num(m.fit.r2) + " (>= 0.998), MSE " + num(m.fit.mse) + " (<= 5e-5)");
    });
    conditional(13, "provincial holdout forecast", [](const PipelineReport& r) {
        const double e = r.forecast_summary.mean_error;
        std::string years;
        std::vector<int> seen;
        for (const auto& row : r.forecast) {
            years += (years.empty() ? "" : ",") + std::to_string(row.year);
            seen.push_back(row.year);
        }
        const bool span = seen == std::vector<int>{2015, 2016, 2017, 2018, 2019};
        return verdict(span && std::abs(e) <= 0.07, "years " + years + " (2015-2019), mean error " + num(e) + " (|.| <= 0.07)");
    });

    std::printf("%s\n", failures == 0 ? "acceptance: all criteria met"
                                      : ("acceptance: " + std::to_string(failures) + " criteria failed").c_str());
    return failures == 0 ? 0 : 1;
}
