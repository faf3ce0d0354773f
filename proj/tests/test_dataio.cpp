#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"
#include "clustreg/panel.hpp"
#include "clustreg/report_io.hpp"
#include "test_util.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace clustreg;
using testutil::TempDir;
using testutil::read_text;
using testutil::write_text;

namespace {

EnergyPanel small_panel() {
    return EnergyPanel({2000, 2001}, {"Metal", "Food"}, {"Coke", "Raw Coal"},
                       {39.03, 0.552, 0.482, 0.1, 38.5, 0.6, 0.5, 0.2});
}

EnergyPanel random_panel(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(1, 4);
    std::uniform_real_distribution<double> value(0.0, 100.0);
    const int ny = size(rng), ne = size(rng), nf = size(rng);
    std::vector<int> years;
    for (int y = 0; y < ny; ++y) years.push_back(1990 + 2 * y);
    std::vector<std::string> ents, feats;
    for (int e = 0; e < ne; ++e) ents.push_back("entity \"" + std::to_string(e) + "\", x");
    for (int f = 0; f < nf; ++f) feats.push_back("feat" + std::to_string(f));
    std::vector<double> values;
    for (int i = 0; i < ny * ne * nf; ++i) values.push_back(i % 3 == 0 ? 0.0 : value(rng));
    return EnergyPanel(years, ents, feats, values);
}

}  // namespace

TEST_CASE("csv splitting honours quotes") {
    CHECK(csv::split_line("a,b,c") == csv::Row{"a", "b", "c"});
    CHECK(csv::split_line("\"a,b\",\"say \"\"hi\"\"\",") == csv::Row{"a,b", "say \"hi\"", ""});
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
}

TEST_CASE("csv numbers round-trip through their shortest text") {
    for (double v : {0.1, 1.0 / 3.0, 39.03, 1e-300, -2.5e17}) {
        double back = 0;
        REQUIRE(csv::parse_double(csv::format_double(v), back));
        CHECK(back == v);
    }
    double out = 0;
    CHECK_FALSE(csv::parse_double("1,5", out));
    CHECK_FALSE(csv::parse_double("abc", out));
    CHECK_FALSE(csv::parse_double("", out));
}

TEST_CASE("panel construction enforces its invariants") {
    CHECK_THROWS_AS(EnergyPanel({2000}, {"a"}, {"f"}, {1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(EnergyPanel({2001, 2000}, {"a"}, {"f"}, {1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(EnergyPanel({2000}, {"a", "a"}, {"f"}, {1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(EnergyPanel({2000}, {""}, {"f"}, {1.0}), DomainError);
    const auto p = small_panel();
    CHECK(p.at(2000, "Metal", "Coke") == 39.03);
    CHECK(p.entity_total(0, 0) == doctest::Approx(39.582));
    CHECK_THROWS_AS(p.at(1999, "Metal", "Coke"), DomainError);
}

TEST_CASE("load_panel reads the long layout") {
    TempDir dir("long");
    write_text(dir / "p.csv", "year,entity,feature,value\n2000,Metal,Coke,39.03\n2000,Metal,Raw Coal,0.552\n");
    const auto p = load_panel(dir / "p.csv", PanelLayout::long_format);
    CHECK(p.at(2000, "Metal", "Coke") == 39.03);
    CHECK(p.at(2000, "Metal", "Raw Coal") == 0.552);
    CHECK(p.num_years() == 1);
}

TEST_CASE("missing long cells default to zero") {
    TempDir dir("zero");
    write_text(dir / "p.csv", "year,entity,feature,value\n2000,A,x,1\n2001,B,y,2\n");
    const auto p = load_panel(dir / "p.csv", PanelLayout::long_format);
    CHECK(p.at(2000, "B", "y") == 0.0);
    CHECK(p.at(2001, "A", "x") == 0.0);
    CHECK(p.at(2001, "B", "y") == 2.0);
}

TEST_CASE("load_panel errors name their location") {
    TempDir dir("errors");
    SUBCASE("header only") {
        write_text(dir / "p.csv", "year,entity,feature,value\n");
        CHECK_THROWS_WITH_AS(load_panel(dir / "p.csv", PanelLayout::long_format),
                             doctest::Contains("no data rows"), FormatError);
    }
    SUBCASE("duplicate key names both rows") {
        write_text(dir / "p.csv", "year,entity,feature,value\n2000,A,x,1\n2000,A,y,2\n2000,A,x,3\n");
        try {
            load_panel(dir / "p.csv", PanelLayout::long_format);
            FAIL("expected a duplicate-key error");
        } catch (const FormatError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("duplicate") != std::string::npos);
            CHECK(msg.find(":2") != std::string::npos);
            CHECK(msg.find(":4") != std::string::npos);
        }
    }
    SUBCASE("bad header") {
        write_text(dir / "p.csv", "year,entity,value\n2000,A,1\n");
        CHECK_THROWS_AS(load_panel(dir / "p.csv", PanelLayout::long_format), FormatError);
    }
    SUBCASE("non-numeric value with row and column") {
        write_text(dir / "p.csv", "year,entity,feature,value\n2000,A,x,1\n2000,A,y,lots\n");
        CHECK_THROWS_WITH_AS(load_panel(dir / "p.csv", PanelLayout::long_format), doctest::Contains(":3:4"),
                             FormatError);
    }
    SUBCASE("unreadable file") {
        CHECK_THROWS_AS(load_panel(dir / "absent.csv", PanelLayout::long_format), IoError);
    }
}

TEST_CASE("validate_panel reports signs, non-finite values and zero series") {
    SUBCASE("clean panel") {
        const auto r = validate_panel(small_panel());
        CHECK(r.ok);
        CHECK(r.issues.empty());
    }
    SUBCASE("one negative cell") {
        auto p = small_panel();
        p(1, 0, 1) = -3.0;
        const auto r = validate_panel(p);
        CHECK_FALSE(r.ok);
        REQUIRE(r.issues.size() == 1);
        CHECK(r.issues[0].severity == Severity::error);
        CHECK(r.issues[0].location.find("2001") != std::string::npos);
    }
    SUBCASE("non-finite cell") {
        auto p = small_panel();
        p(0, 1, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_FALSE(validate_panel(p).ok);
    }
    SUBCASE("all-zero feature is a warning naming it") {
        auto p = EnergyPanel::zeros({2000, 2001}, {"A", "B"}, {"Coal", "Other Petroleum Products"});
        for (std::size_t y = 0; y < 2; ++y) {
            for (std::size_t e = 0; e < 2; ++e) p(y, e, 0) = 1.0;
        }
        const auto r = validate_panel(p);
        CHECK(r.ok);
        REQUIRE(r.issues.size() == 1);
        CHECK(r.issues[0].severity == Severity::warning);
        CHECK(r.issues[0].message.find("Other Petroleum Products") != std::string::npos);
    }
}

TEST_CASE("long and wide layouts load to the same panel") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_panel(rng);
        TempDir dir("layouts");
        save_panel_long(p, dir / "long.csv");
        save_panel_wide(p, dir / "wide");
        const auto a = load_panel(dir / "long.csv", PanelLayout::long_format);
        const auto b = load_panel(dir / "wide", PanelLayout::wide);
        CHECK(a == p);
        CHECK(b == p);
        // Same bytes, same panel.
        CHECK(load_panel(dir / "long.csv", PanelLayout::long_format) == a);
    }
}

TEST_CASE("reports round-trip through JSON") {
    TempDir dir("json");
    SUBCASE("fit report keeps r2") {
        FitReport f;
        f.r2 = 0.9991;
        f.mse = 1.4774e-4;
        f.sparsity = 0.4375;
        f.residuals = {0.1, -0.1};
        f.y_hat = {5.8, 5.7};
        f.y_bar = 5.75;
        save_report(f, dir / "fit.json");
        const auto j = Json::parse(read_text(dir / "fit.json"));
        CHECK(j.at("r2").get<double>() == 0.9991);
        CHECK(load_report<FitReport>(dir / "fit.json") == f);
    }
    SUBCASE("empty validation report") {
        save_report(ValidationReport{}, dir / "v.json");
        const auto j = Json::parse(read_text(dir / "v.json"));
        CHECK(j.at("issues").is_array());
        CHECK(j.at("issues").empty());
        CHECK(load_report<ValidationReport>(dir / "v.json") == ValidationReport{});
    }
    SUBCASE("save, load, save is byte-identical") {
        LinearModel m;
        m.intercept = 2.8986;
        m.coefficients = Eigen::VectorXd::LinSpaced(4, 0.1, 1.0 / 3.0);
        m.column_names = {"a", "b", "c", "d"};
        m.penalty = PenaltySpec::elastic_net(2.7826e-4, 2.7826e-4);
        save_report(m, dir / "m1.json");
        const auto back = load_report<LinearModel>(dir / "m1.json");
        CHECK(back == m);
        save_report(back, dir / "m2.json");
        CHECK(read_text(dir / "m1.json") == read_text(dir / "m2.json"));
    }
    SUBCASE("malformed JSON is a format error") {
        write_text(dir / "bad.json", "{\"r2\": ");
        CHECK_THROWS_AS(load_report<FitReport>(dir / "bad.json"), FormatError);
    }
    SUBCASE("unwritable path") {
        CHECK_THROWS_AS(save_report(FitReport{}, dir / "no" / "such" / "dir.json"), IoError);
    }
}
