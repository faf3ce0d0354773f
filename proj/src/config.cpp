#include "clustreg/config.hpp"

#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace clustreg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    return parts;
}

double real(const std::string& text, const std::string& what) {
    double v = 0.0;
    if (!csv::parse_double(text, v)) throw DomainError("invalid number '" + text + "' in " + what);
    return v;
}

long long integer(const std::string& text, const std::string& what) {
    long long v = 0;
    if (!csv::parse_int(text, v)) throw DomainError("invalid integer '" + text + "' in " + what);
    return v;
}

// Rounds away the drift of start + k * step so that 0.1:0.05:0.3 gives
// exactly the decimal grid points.
double tidy(double v) { return std::round(v * 1e12) / 1e12; }

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw DomainError("empty list");
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw DomainError("range must be start:step:stop, got '" + t + "'");
        const double start = real(parts[0], t), step = real(parts[1], t), stop = real(parts[2], t);
        if (!(step > 0) || stop < start) throw DomainError("range needs step > 0 and stop >= start: '" + t + "'");
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out;
        for (long long k = 0; k < count; ++k) out.push_back(tidy(start + static_cast<double>(k) * step));
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split(t, ',')) out.push_back(real(p, t));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw DomainError("empty list");
    std::vector<int> out;
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw DomainError("range must be start:step:stop, got '" + t + "'");
        const long long start = integer(parts[0], t), step = integer(parts[1], t), stop = integer(parts[2], t);
        if (step <= 0 || stop < start) throw DomainError("range needs step > 0 and stop >= start: '" + t + "'");
        for (long long v = start; v <= stop; v += step) out.push_back(static_cast<int>(v));
        return out;
    }
    for (const auto& p : split(t, ',')) out.push_back(static_cast<int>(integer(p, t)));
    return out;
}

LambdaGrid parse_lambda_grid(const std::string& text) {
    LambdaGrid g;
    const std::string t = trim(text);
    if (t == "auto") {
        g.automatic = true;
        return g;
    }
    if (t.rfind("auto(", 0) == 0 && t.back() == ')') {
        const auto parts = split(t.substr(5, t.size() - 6), ',');
        if (parts.size() != 2) throw DomainError("auto grid must be auto(count, ratio)");
        g.automatic = true;
        g.count = static_cast<int>(integer(parts[0], t));
        g.ratio = real(parts[1], t);
        return g;
    }
    g.values = parse_real_list(t);
    std::sort(g.values.begin(), g.values.end());
    return g;
}

YearRange parse_year_range(const std::string& text) {
    const std::string t = trim(text);
    const auto dash = t.find('-', 1);
    if (dash == std::string::npos) {
        const int y = static_cast<int>(integer(t, "year range"));
        return {y, y};
    }
    YearRange r{static_cast<int>(integer(t.substr(0, dash), "year range")),
                static_cast<int>(integer(t.substr(dash + 1), "year range"))};
    if (r.last < r.first) throw DomainError("year range '" + t + "' is reversed");
    return r;
}

std::vector<double> LambdaGrid::resolve(const DesignMatrix& d, const FitOptions& opts) const {
    if (!automatic) return values;
    return auto_lambda_grid(d, opts, count, ratio);
}

PipelineConfig::PipelineConfig() {
    eps_grid = parse_real_list("0.05:0.05:2.0");
    minpts_grid = {1, 2, 3, 4, 5};
    ridge_grid = parse_lambda_grid("0:0.01:0.5");
    lasso_grid = parse_lambda_grid("auto");
    elastic_net_grid = parse_lambda_grid("auto");
}

void PipelineConfig::validate() const {
    if (eps_grid.empty() || minpts_grid.empty()) throw DomainError("cluster grids must be non-empty");
    for (double e : eps_grid) {
        if (!(e >= 0)) throw DomainError("eps grid values must be non-negative");
    }
    for (int m : minpts_grid) {
        if (m < 1) throw DomainError("min_pts grid values must be at least 1");
    }
    for (const LambdaGrid* g : {&ridge_grid, &lasso_grid, &elastic_net_grid}) {
        if (!g->automatic && g->values.empty()) throw DomainError("lambda grids must be non-empty");
        for (double v : g->values) {
            if (!(v >= 0)) throw DomainError("lambda grid values must be non-negative");
        }
    }
    if (!(alpha >= 0 && alpha <= 1)) throw DomainError("alpha must lie in [0, 1]");
    if (folds < 2) throw DomainError("folds must be at least 2");
    if (!(log_epsilon > 0)) throw DomainError("log epsilon must be positive");
    if (!(fit.tol > 0) || fit.max_iter < 1) throw DomainError("solver tolerance and max_iter must be positive");
    if (train_years.has_value() != test_years.has_value()) {
        throw DomainError("train_years and test_years must be given together");
    }
    if (train_years && test_years) {
        if (test_years->first <= train_years->last) {
            throw DomainError("test years must come after train years without overlap");
        }
    }
}

PipelineConfig load_config(const std::filesystem::path& file) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(file.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        if (!std::filesystem::exists(file)) throw IoError("cannot read config '" + file.string() + "'");
        throw FormatError("config " + file.string() + ": " + e.what());
    }

    static const std::map<std::string, std::set<std::string>> known{
        {"data", {"path", "layout", "output"}},
        {"preprocess", {"anchor", "log_epsilon"}},
        {"cluster", {"eps_grid", "minpts_grid"}},
        {"regress", {"ridge_grid", "lasso_grid", "elastic_net_grid", "alpha", "folds", "tol", "max_iter",
                     "standardize"}},
        {"forecast", {"train_years", "test_years"}},
    };
    for (const auto& [section, body] : tree) {
        auto it = known.find(section);
        if (it == known.end()) throw FormatError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw FormatError("config: unknown key '" + key + "' in [" + section + "]");
        }
    }

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
        return std::nullopt;
    };
    const auto base = file.parent_path();
    auto resolve_path = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base / path;
    };

    PipelineConfig c;
    if (auto v = get("data.path")) c.data_path = resolve_path(*v);
    if (auto v = get("data.layout")) c.layout = parse_layout(*v);
    if (auto v = get("data.output")) c.output_dir = resolve_path(*v);
    if (auto v = get("preprocess.anchor")) {
        if (*v != "train_mean") c.anchor_year = static_cast<int>(integer(*v, "anchor"));
    }
    if (auto v = get("preprocess.log_epsilon")) c.log_epsilon = real(*v, "log_epsilon");
    if (auto v = get("cluster.eps_grid")) c.eps_grid = parse_real_list(*v);
    if (auto v = get("cluster.minpts_grid")) c.minpts_grid = parse_int_list(*v);
    if (auto v = get("regress.ridge_grid")) c.ridge_grid = parse_lambda_grid(*v);
    if (auto v = get("regress.lasso_grid")) c.lasso_grid = parse_lambda_grid(*v);
    if (auto v = get("regress.elastic_net_grid")) c.elastic_net_grid = parse_lambda_grid(*v);
    if (auto v = get("regress.alpha")) c.alpha = real(*v, "alpha");
    if (auto v = get("regress.folds")) c.folds = static_cast<int>(integer(*v, "folds"));
    if (auto v = get("regress.tol")) c.fit.tol = real(*v, "tol");
    if (auto v = get("regress.max_iter")) c.fit.max_iter = static_cast<int>(integer(*v, "max_iter"));
    if (auto v = get("regress.standardize")) {
        if (*v != "true" && *v != "false") throw DomainError("standardize must be true or false");
        c.fit.standardize = *v == "true";
    }
    if (auto v = get("forecast.train_years")) c.train_years = parse_year_range(*v);
    if (auto v = get("forecast.test_years")) c.test_years = parse_year_range(*v);
    c.validate();
    return c;
}

}  // namespace clustreg
