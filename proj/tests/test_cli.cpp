#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clustreg/cli.hpp"
#include "clustreg/csv.hpp"
#include "clustreg/pipeline.hpp"
#include "clustreg/report_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <sstream>

using namespace clustreg;
using testutil::TempDir;
using testutil::read_text;
using testutil::write_text;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Value of `key=` on the first output line that contains it.
double field(const std::string& text, const std::string& key) {
    const auto at = text.find(key + "=");
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + key.size() + 1));
}

// Entities A-C burn mostly coal, D-F mostly gas.
std::string two_blob_csv() {
    std::ostringstream s;
    s << "year,entity,feature,value\n";
    const char* names[] = {"A", "B", "C", "D", "E", "F"};
    for (int y = 2000; y < 2010; ++y) {
        for (int e = 0; e < 6; ++e) {
            const double scale = 1.0 + 0.1 * e + 0.05 * (y - 2000) + 0.01 * ((y * 7 + e * 3) % 5);
            s << y << "," << names[e] << ",coal," << (e < 3 ? 5.0 : 1.0) * scale << "\n";
            s << y << "," << names[e] << ",gas," << (e < 3 ? 1.0 : 5.0) * scale << "\n";
        }
    }
    return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::filesystem::path& file) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_text(file));
    std::string line;
    while (std::getline(in, line)) rows.push_back(csv::split_line(line));
    return rows;
}

}  // namespace

TEST_CASE("validate exit codes") {
    TempDir dir("cli_validate");
    write_text(dir / "good.csv", "year,entity,feature,value\n2000,A,x,1\n2001,A,x,2\n");
    write_text(dir / "bad.csv", "year,entity,feature,value\n2000,A,x,-1\n2001,A,x,2\n");
    write_text(dir / "broken.csv", "year,entity\n2000,A\n");

    auto r = cli({"validate", (dir / "good.csv").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find(": ok") != std::string::npos);

    r = cli({"validate", (dir / "bad.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error") != std::string::npos);

    r = cli({"validate", (dir / "broken.csv").string()});
    CHECK(r.code == 2);
    r = cli({"validate", (dir / "missing.csv").string()});
    CHECK(r.code == 2);
}

TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"cluster"}).code == 2);  // no config
    CHECK(cli({"cluster", "--config", "/nonexistent/c.ini"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cluster finds two blobs") {
    TempDir dir("cli_blobs");
    write_text(dir / "panel.csv", two_blob_csv());
    write_text(dir / "c.ini", "[data]\npath = panel.csv\noutput = out\n[cluster]\neps_grid = 0.1,0.5\nminpts_grid = 2,3\n");
    const auto r = cli({"--config", (dir / "c.ini").string(), "cluster"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("C=2") != std::string::npos);
    CHECK(field(r.out, "SC") == doctest::Approx(1.0));
    CHECK(std::filesystem::exists(dir / "out" / "assignment.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "quality.csv"));
}

TEST_CASE("cluster without an admissible clustering exits 1") {
    TempDir dir("cli_single");
    std::ostringstream s;
    s << "year,entity,feature,value\n";
    for (int y = 2000; y < 2010; ++y) s << y << ",A,x," << y - 1999 << "\n";
    write_text(dir / "panel.csv", s.str());
    write_text(dir / "c.ini", "[data]\npath = panel.csv\n[cluster]\neps_grid = 0.1\nminpts_grid = 2\n");
    const auto r = cli({"--config", (dir / "c.ini").string(), "--out", (dir / "out").string(), "cluster"});
    CHECK(r.code == 1);
    CHECK(r.err.find("cluster") != std::string::npos);
}

TEST_CASE("gen-synthetic is deterministic") {
    TempDir dir("cli_gen");
    for (const char* sub : {"a", "b"}) {
        const auto r = cli({"gen-synthetic", "--seed", "42", "--entities", "30", "--clusters", "6", "--features", "5",
                            "--years", "14", "--support", "3", "--out", (dir / sub).string()});
        REQUIRE(r.code == 0);
    }
    for (const char* name : {"panel_long.csv", "ground_truth.json", "config.ini"}) {
        CHECK_MESSAGE(read_text(dir / "a" / name) == read_text(dir / "b" / name), name);
    }
    CHECK(cli({"gen-synthetic", "--out", (dir / "c").string()}).code == 2);
    CHECK(cli({"gen-synthetic", "--seed", "1", "--support", "20", "--out", (dir / "c").string()}).code == 2);
}

TEST_CASE("staged subcommands on a synthetic panel") {
    TempDir dir("cli_stages");
    REQUIRE(cli({"gen-synthetic", "--seed", "7", "--entities", "30", "--clusters", "6", "--features", "5", "--years",
                 "14", "--support", "3", "--out", dir.path().string()})
                .code == 0);
    const std::string config = (dir / "config.ini").string();

    // Model stages need the stored clustering.
    auto r = cli({"--config", config, "regress", "--kind", "lasso"});
    CHECK(r.code == 1);
    CHECK(r.err.find("'cluster'") != std::string::npos);
    r = cli({"--config", config, "plot-data", "--figure", "forecast"});
    CHECK(r.code == 1);
    CHECK(r.err.find("'forecast'") != std::string::npos);

    REQUIRE(cli({"--config", config, "cluster"}).code == 0);
    r = cli({"--config", config, "regress", "--kind", "lasso"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("lasso ", 0) == 0);
    CHECK(field(r.out, "sparsity") < 1.0);
    CHECK(field(r.out, "sparsity") == doctest::Approx(0.5));
    CHECK(cli({"--config", config, "regress", "--kind", "cubic"}).code == 2);

    // lambda_path: every coefficient vanishes beyond lambda_max.
    r = cli({"--config", config, "plot-data", "--figure", "lambda_path"});
    REQUIRE(r.code == 0);
    const auto report = analyze(load_config(config), load_panel(dir / "panel_long.csv", PanelLayout::long_format));
    const auto path = csv_rows(dir / "results" / "plot_lambda_path.csv");
    REQUIRE(path.size() > 1);
    CHECK(path[0] == std::vector<std::string>{"lambda", "coef_name", "value"});
    const auto& paths = report.paths[1];
    double lmax = 0.0;
    for (const auto& row : paths.lambdas) lmax = std::max(lmax, row);
    bool saw_top = false;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double lambda = std::stod(path[i][0]);
        if (lambda >= lmax * (1 - 1e-12)) {
            saw_top = true;
            CHECK(std::stod(path[i][2]) == 0.0);
        }
    }
    CHECK(saw_top);

    r = cli({"--config", config, "forecast"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("forecast mean_error=") != std::string::npos);

    r = cli({"--config", config, "regress", "--kind", "elastic_net"});
    REQUIRE(r.code == 0);
    r = cli({"--config", config, "plot-data", "--figure", "fit_scatter"});
    REQUIRE(r.code == 0);
    const auto scatter = csv_rows(dir / "results" / "plot_fit_scatter.csv");
    CHECK(scatter.size() == report.train_years.size() + 1);
    CHECK(scatter[0] == std::vector<std::string>{"year", "actual", "predicted"});
    for (std::size_t i = 1; i < scatter.size(); ++i) {
        CHECK(std::stod(scatter[i][1]) == doctest::Approx(std::stod(scatter[i][2])).epsilon(1e-6));
    }

    for (const char* fig : {"energy_trends", "heatmap", "cluster_boxes", "forecast"}) {
        CHECK_MESSAGE(cli({"--config", config, "plot-data", "--figure", fig}).code == 0, fig);
    }
    CHECK(cli({"--config", config, "plot-data", "--figure", "pie"}).code == 2);
    CHECK(cli({"--config", config, "plot-data", "--figure", "lambda_path", "--kind", "elastic_net"}).code == 1);
}

TEST_CASE("a ridge grid of {0} reproduces least squares") {
    TempDir dir("cli_ols");
    REQUIRE(cli({"gen-synthetic", "--seed", "9", "--entities", "30", "--clusters", "5", "--features", "5", "--years",
                 "16", "--support", "2", "--noise-sd", "0.05", "--out", dir.path().string()})
                .code == 0);
    {
        std::ofstream extra(dir / "config.ini", std::ios::app);
        extra << "[regress]\nridge_grid = 0\n";
    }
    const std::string config = (dir / "config.ini").string();
    const auto r = cli({"--config", config, "pipeline"});
    REQUIRE(r.code == 0);
    const double r2 = field(r.out.substr(r.out.find("ridge ")), "r2");
    CHECK(field(r.out.substr(r.out.find("ridge ")), "lambda") == 0.0);

    // Independent least squares on the logged training aggregates.
    const auto report = load_report<PipelineReport>(dir / "results" / "pipeline_report.json");
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (std::size_t t = 0; t < report.aggregates.years.size(); ++t) {
        const int year = report.aggregates.years[t];
        if (std::find(report.train_years.begin(), report.train_years.end(), year) == report.train_years.end()) continue;
        std::vector<double> row;
        for (double v : report.aggregates.regressors[t]) row.push_back(std::log(v));
        x.push_back(row);
        y.push_back(std::log(report.aggregates.target[t]));
    }
    const auto coef = oracle::ridge_normal_equations(x, y, 0.0);
    double mean = 0.0;
    for (double v : y) mean += v / static_cast<double>(y.size());
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double fit = coef[0];
        for (std::size_t j = 0; j < x[i].size(); ++j) fit += coef[j + 1] * x[i][j];
        rss += (y[i] - fit) * (y[i] - fit);
        tss += (y[i] - mean) * (y[i] - mean);
    }
    CHECK(r2 == doctest::Approx(1.0 - rss / tss).epsilon(1e-8));
}
