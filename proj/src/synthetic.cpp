#include "clustreg/synthetic.hpp"

#include "clustreg/error.hpp"
#include "clustreg/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace clustreg {

namespace {

constexpr double kSupportShare = 0.15;       // share of the mean total carried by the support clusters
constexpr double kSupportLogSd = 0.5;       // year-to-year log fluctuation of support clusters
constexpr double kShareLogSd = 0.002;        // year-to-year log fluctuation of non-support shares
constexpr double kMinProfileDistance = 0.5; // between normalized cluster profiles

std::string numbered(const std::string& prefix, int k, int width) {
    std::string digits = std::to_string(k);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

int digits_for(int n) { return static_cast<int>(std::to_string(n).size()); }

std::vector<std::vector<double>> draw_profiles(std::mt19937_64& rng, int clusters, int features) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<std::vector<double>> profiles;
        for (int c = 0; c < clusters; ++c) {
            std::vector<double> p(static_cast<std::size_t>(features));
            for (auto& v : p) v = unit(rng);
            const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
            const double a = *lo, b = *hi;
            for (auto& v : p) v = (v - a) / (b - a);
            profiles.push_back(std::move(p));
        }
        double closest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < clusters; ++i) {
            for (int j = i + 1; j < clusters; ++j) {
                double d2 = 0.0;
                for (int f = 0; f < features; ++f) {
                    const double d = profiles[i][f] - profiles[j][f];
                    d2 += d * d;
                }
                closest = std::min(closest, std::sqrt(d2));
            }
        }
        if (closest >= kMinProfileDistance) return profiles;
    }
    throw DomainError("cannot draw well-separated cluster profiles; add features or reduce clusters");
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n_entities < 1 || n_features < 1 || n_clusters < 1 || n_years < 1 || support_size < 1) {
        throw DomainError("synthetic sizes must be positive");
    }
    if (n_features < 2) throw DomainError("synthetic panel needs at least 2 features");
    if (support_size >= n_clusters) throw DomainError("support_size must be smaller than n_clusters");
    if (n_entities < n_clusters) throw DomainError("n_entities must be at least n_clusters");
    if (test_years < 2 || n_years < test_years + 2) throw DomainError("n_years must exceed test_years by at least 2");
    if (!(noise_sd >= 0) || !std::isfinite(noise_sd)) throw DomainError("noise_sd must be non-negative");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto C = static_cast<std::size_t>(spec.n_clusters);
    const auto E = static_cast<std::size_t>(spec.n_entities);
    const auto F = static_cast<std::size_t>(spec.n_features);
    const auto Y = static_cast<std::size_t>(spec.n_years);

    GroundTruth truth;
    truth.seed = spec.seed;

    // Balanced planted labels in shuffled entity order.
    truth.labels.resize(E);
    for (std::size_t e = 0; e < E; ++e) truth.labels[e] = static_cast<int>(e % C);
    std::shuffle(truth.labels.begin(), truth.labels.end(), rng);
    for (std::size_t e = 0; e < E; ++e) truth.entities.push_back(numbered("entity_", static_cast<int>(e + 1), digits_for(spec.n_entities)));

    const auto profiles = draw_profiles(rng, spec.n_clusters, spec.n_features);
    std::vector<double> weight(E);
    std::vector<double> weight_sum(C, 0.0);
    for (std::size_t e = 0; e < E; ++e) {
        weight[e] = 0.5 + unit(rng);
        weight_sum[static_cast<std::size_t>(truth.labels[e])] += weight[e];
    }

    std::vector<int> order(C);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    truth.support.assign(order.begin(), order.begin() + spec.support_size);
    std::sort(truth.support.begin(), truth.support.end());
    std::vector<bool> in_support(C, false);
    for (int s : truth.support) in_support[static_cast<std::size_t>(s)] = true;

    // Support levels fix beta_i = level_i / mean_total, which cancels the
    // first-order response of the non-support remainder to support moves.
    std::vector<double> level(C, 0.0);
    double support_level = 0.0;
    for (int s : truth.support) {
        level[static_cast<std::size_t>(s)] = std::exp(std::log(2.0) + unit(rng) * (std::log(20.0) - std::log(2.0)));
        support_level += level[static_cast<std::size_t>(s)];
    }
    const double mean_total = support_level / kSupportShare;
    truth.beta.assign(C, 0.0);
    truth.intercept = std::log(mean_total);
    for (int s : truth.support) {
        const auto i = static_cast<std::size_t>(s);
        truth.beta[i] = level[i] / mean_total;
        truth.intercept -= truth.beta[i] * std::log(level[i]);
    }

    std::vector<std::vector<double>> x(Y, std::vector<double>(C, 0.0));
    std::vector<double> clean(Y, 0.0);
    for (std::size_t t = 0; t < Y; ++t) {
        clean[t] = truth.intercept;
        for (int s : truth.support) {
            const auto i = static_cast<std::size_t>(s);
            x[t][i] = level[i] * std::exp(kSupportLogSd * normal(rng));
            clean[t] += truth.beta[i] * std::log(x[t][i]);
        }
    }
    const double clean_mean = std::accumulate(clean.begin(), clean.end(), 0.0) / static_cast<double>(Y);
    double clean_var = 0.0;
    for (double v : clean) clean_var += (v - clean_mean) * (v - clean_mean);
    const double clean_sd = Y > 1 ? std::sqrt(clean_var / static_cast<double>(Y - 1)) : 0.0;
    truth.noise_scale = spec.noise_sd * clean_sd;

    std::vector<double> share_level(C, 0.0);
    for (std::size_t i = 0; i < C; ++i) {
        if (!in_support[i]) share_level[i] = 2.0 * unit(rng) - 1.0;
    }
    for (std::size_t t = 0; t < Y; ++t) {
        const double noise = truth.noise_scale > 0 ? truth.noise_scale * normal(rng) : 0.0;
        const double log_total = clean[t] + noise;
        double remainder = std::exp(log_total);
        for (int s : truth.support) remainder -= x[t][static_cast<std::size_t>(s)];
        if (!(remainder > 0)) throw DomainError("synthetic remainder went non-positive; lower noise_sd");
        std::vector<double> share(C, 0.0);
        double share_total = 0.0;
        for (std::size_t i = 0; i < C; ++i) {
            if (in_support[i]) continue;
            share[i] = std::exp(share_level[i] + kShareLogSd * normal(rng));
            share_total += share[i];
        }
        for (std::size_t i = 0; i < C; ++i) {
            if (!in_support[i]) x[t][i] = remainder * share[i] / share_total;
        }
        double total = 0.0;
        for (double v : x[t]) total += v;
        truth.log_target.push_back(std::log(total));
    }

    std::vector<int> years(Y);
    for (std::size_t t = 0; t < Y; ++t) years[t] = spec.first_year + static_cast<int>(t);
    truth.years = years;
    truth.train_first = years.front();
    truth.train_last = years[Y - static_cast<std::size_t>(spec.test_years) - 1];
    truth.test_first = truth.train_last + 1;
    truth.test_last = years.back();

    std::vector<std::string> features;
    for (std::size_t f = 0; f < F; ++f) features.push_back(numbered("feature_", static_cast<int>(f + 1), digits_for(spec.n_features)));
    auto panel = EnergyPanel::zeros(years, truth.entities, features);
    std::vector<double> profile_sum(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) profile_sum[c] = std::accumulate(profiles[c].begin(), profiles[c].end(), 0.0);
    for (std::size_t t = 0; t < Y; ++t) {
        for (std::size_t e = 0; e < E; ++e) {
            const auto c = static_cast<std::size_t>(truth.labels[e]);
            const double entity_total = x[t][c] * weight[e] / weight_sum[c];
            for (std::size_t f = 0; f < F; ++f) panel(t, e, f) = entity_total * profiles[c][f] / profile_sum[c];
        }
    }
    return {std::move(panel), std::move(truth)};
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir, PanelLayout layout) {
    std::filesystem::create_directories(dir);
    std::string data_path;
    if (layout == PanelLayout::long_format) {
        data_path = "panel_long.csv";
        save_panel_long(data.panel, dir / data_path);
    } else {
        data_path = "panel";
        save_panel_wide(data.panel, dir / data_path);
    }

    const GroundTruth& t = data.truth;
    Json j{{"seed", t.seed},
           {"entities", t.entities},
           {"labels", t.labels},
           {"support", t.support},
           {"beta", t.beta},
           {"intercept", t.intercept},
           {"years", t.years},
           {"log_target", t.log_target},
           {"noise_scale", t.noise_scale},
           {"train_years", Json::array({t.train_first, t.train_last})},
           {"test_years", Json::array({t.test_first, t.test_last})}};
    {
        std::ofstream out(dir / "ground_truth.json", std::ios::binary);
        if (!out) throw IoError("cannot write ground truth into '" + dir.string() + "'");
        out << j.dump(2) << "\n";
    }
    std::ofstream cfg(dir / "config.ini", std::ios::binary);
    if (!cfg) throw IoError("cannot write config into '" + dir.string() + "'");
    cfg << "[data]\n"
        << "path = " << data_path << "\n"
        << "layout = " << to_string(layout) << "\n"
        << "output = results\n\n"
        << "[forecast]\n"
        << "train_years = " << t.train_first << "-" << t.train_last << "\n"
        << "test_years = " << t.test_first << "-" << t.test_last << "\n";
    if (!cfg) throw IoError("cannot write config into '" + dir.string() + "'");
}

GroundTruth load_ground_truth(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
    GroundTruth t;
    try {
    const Json j = Json::parse(in);
    j.at("seed").get_to(t.seed);
    j.at("entities").get_to(t.entities);
    j.at("labels").get_to(t.labels);
    j.at("support").get_to(t.support);
    j.at("beta").get_to(t.beta);
    j.at("intercept").get_to(t.intercept);
    j.at("years").get_to(t.years);
    j.at("log_target").get_to(t.log_target);
    j.at("noise_scale").get_to(t.noise_scale);
    t.train_first = j.at("train_years").at(0);
    t.train_last = j.at("train_years").at(1);
    t.test_first = j.at("test_years").at(0);
    t.test_last = j.at("test_years").at(1);
    } catch (const Json::exception& e) {
        throw FormatError("malformed ground truth '" + file.string() + "': " + e.what());
    }
    return t;
}

}  // namespace clustreg
