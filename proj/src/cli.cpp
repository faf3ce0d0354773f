#include "clustreg/cli.hpp"

#include "clustreg/config.hpp"
#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"
#include "clustreg/pipeline.hpp"
#include "clustreg/plot_data.hpp"
#include "clustreg/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>

namespace clustreg {

namespace {

struct Options {
    std::string config;
    std::string out;
    // validate
    std::vector<std::string> paths;
    std::string layout;
    // regress / plot-data
    std::string kind;
    std::string figure;
    // gen-synthetic
    std::uint64_t seed = 0;
    SyntheticSpec synthetic;
};

// Config problems are usage errors; everything after loading is a domain or
// stage error.
class UsageError : public Error {
public:
    using Error::Error;
};

std::string fmt(double v) { return csv::format_double(v); }

PipelineConfig load(const Options& o) {
    if (o.config.empty()) throw UsageError("--config is required for this subcommand");
    PipelineConfig c;
    try {
        c = load_config(o.config);
        if (!o.out.empty()) c.output_dir = o.out;
        c.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return c;
}

EnergyPanel load_data(const PipelineConfig& c) {
    if (c.data_path.empty()) throw UsageError("config has no [data] path");
    try {
        return load_panel(c.data_path, c.layout);
    } catch (const Error& e) {
        throw StageError("load", e.what(), true);
    }
}

AnalyzeOptions with_stored_assignment(const PipelineConfig& c) {
    const auto file = c.output_dir / "assignment.csv";
    if (!std::filesystem::exists(file)) throw MissingArtifact(file, "cluster");
    AnalyzeOptions opts;
    opts.assignment = load_assignment_csv(file, &opts.assignment_entities);
    return opts;
}

void print_cluster_line(const PipelineReport& r, std::ostream& out) {
    out << "eps=" << fmt(r.params.eps) << " min_pts=" << r.params.min_pts << " C=" << r.quality.c
        << " SC=" << fmt(r.quality.sc) << " SSE=" << fmt(r.quality.sse) << "\n";
}

void print_metrics(const ModelResult& m, std::ostream& out) {
    out << to_string(m.kind) << " lambda=" << fmt(m.model.penalty.strength()) << " r2=" << fmt(m.fit.r2)
        << " mse=" << fmt(m.fit.mse) << " sparsity=" << fmt(m.fit.sparsity);
    if (m.kind == PenaltyKind::elastic_net) {
        out << " lambda1=" << fmt(m.model.penalty.l1()) << " lambda2=" << fmt(m.model.penalty.l2());
    }
    out << "\n";
}

void print_forecast(const PipelineReport& r, std::ostream& out) {
    for (const auto& row : r.forecast) {
        out << "forecast year=" << row.year << " true=" << fmt(row.truth) << " predict=" << fmt(row.predict)
            << " difference=" << fmt(row.difference) << "\n";
    }
    out << "forecast mean_error=" << fmt(r.forecast_summary.mean_error)
        << " variance=" << fmt(r.forecast_summary.variance) << "\n";
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    std::vector<std::pair<std::string, PanelLayout>> targets;
    for (const auto& p : o.paths) {
        PanelLayout layout = std::filesystem::is_directory(p) ? PanelLayout::wide : PanelLayout::long_format;
        if (!o.layout.empty()) layout = parse_layout(o.layout);
        targets.emplace_back(p, layout);
    }
    if (targets.empty()) {
        const PipelineConfig c = load(o);
        if (c.data_path.empty()) throw UsageError("config has no [data] path");
        targets.emplace_back(c.data_path.string(), c.layout);
    }
    bool all_ok = true;
    for (const auto& [path, layout] : targets) {
        const EnergyPanel panel = load_panel(path, layout);
        const ValidationReport report = validate_panel(panel);
        for (const auto& issue : report.issues) {
            err << path << ": " << (issue.severity == Severity::error ? "error" : "warning") << ": "
                << issue.location << ": " << issue.message << "\n";
        }
        out << path << ": " << (report.ok ? "ok" : "invalid") << " (" << panel.num_years() << " years, "
            << panel.num_entities() << " entities, " << panel.num_features() << " features)\n";
        all_ok = all_ok && report.ok;
    }
    return all_ok ? exit_ok : exit_domain;
}

int cmd_cluster(const Options& o, std::ostream& out) {
    const PipelineConfig c = load(o);
    const EnergyPanel panel = load_data(c);
    AnalyzeOptions opts;
    opts.cluster_only = true;
    const PipelineReport r = analyze(c, panel, opts);
    std::filesystem::create_directories(c.output_dir);
    write_cluster_artifacts(r, c.output_dir);
    print_cluster_line(r, out);
    return exit_ok;
}

int cmd_regress(const Options& o, std::ostream& out) {
    const PipelineConfig c = load(o);
    const PenaltyKind kind = parse_penalty_kind(o.kind);
    AnalyzeOptions opts = with_stored_assignment(c);
    opts.kinds = {kind};
    opts.forecast = false;
    const EnergyPanel panel = load_data(c);
    const PipelineReport r = analyze(c, panel, opts);
    write_model_artifacts(r, kind, c.output_dir);
    print_metrics(r.model(kind), out);
    return exit_ok;
}

int cmd_forecast(const Options& o, std::ostream& out) {
    const PipelineConfig c = load(o);
    AnalyzeOptions opts = with_stored_assignment(c);
    opts.kinds = {PenaltyKind::elastic_net};
    const EnergyPanel panel = load_data(c);
    const PipelineReport r = analyze(c, panel, opts);
    write_forecast_csv(r, c.output_dir / "forecast.csv");
    print_metrics(r.model(PenaltyKind::elastic_net), out);
    print_forecast(r, out);
    return exit_ok;
}

int cmd_pipeline(const Options& o, std::ostream& out) {
    const PipelineConfig c = load(o);
    const PipelineReport r = run_pipeline(c);
    print_cluster_line(r, out);
    for (const auto& m : r.models) print_metrics(m, out);
    print_forecast(r, out);
    return exit_ok;
}

int cmd_gen_synthetic(const Options& o, std::ostream& out) {
    if (o.out.empty()) throw UsageError("--out is required for gen-synthetic");
    SyntheticSpec spec = o.synthetic;
    spec.seed = o.seed;
    try {
        spec.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    const PanelLayout layout = o.layout.empty() ? PanelLayout::long_format : parse_layout(o.layout);
    const SyntheticData data = generate_synthetic(spec);
    write_synthetic(data, o.out, layout);
    out << "wrote synthetic panel to " << o.out << " (seed " << spec.seed << ", support";
    for (int s : data.truth.support) out << " " << s + 1;
    out << ")\n";
    return exit_ok;
}

int cmd_plot_data(const Options& o, std::ostream& out) {
    const PipelineConfig c = load(o);
    const PlotFigure figure = parse_plot_figure(o.figure);
    std::optional<PenaltyKind> kind;
    if (!o.kind.empty()) kind = parse_penalty_kind(o.kind);
    out << emit_plot_data(c, figure, kind).string() << "\n";
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Clustering and penalized regression on emission panels", "clustreg"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "INI configuration file");
    app.add_option("--out", o.out, "Output directory (overrides [data] output)");

    auto* validate = app.add_subcommand("validate", "Load panels and report data issues");
    validate->add_option("paths", o.paths, "Panel files (long) or directories (wide); default: config data");
    validate->add_option("--layout", o.layout, "long or wide (default: by path type)");

    app.add_subcommand("cluster", "Sweep DBSCAN parameters and write the selected clustering");
    auto* regress = app.add_subcommand("regress", "Fit one penalized model on the stored clustering");
    regress->add_option("--kind", o.kind, "ridge, lasso or elastic_net")->required();
    app.add_subcommand("pipeline", "Run every stage and write the full artifact set");
    app.add_subcommand("forecast", "Forecast the test years with the elastic net");

    auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic panel with planted ground truth");
    gen->add_option("--seed", o.seed, "Random seed")->required();
    gen->add_option("--entities", o.synthetic.n_entities, "Number of entities")->capture_default_str();
    gen->add_option("--features", o.synthetic.n_features, "Number of features")->capture_default_str();
    gen->add_option("--clusters", o.synthetic.n_clusters, "Number of planted clusters")->capture_default_str();
    gen->add_option("--years", o.synthetic.n_years, "Number of years")->capture_default_str();
    gen->add_option("--test-years", o.synthetic.test_years, "Trailing years held out")->capture_default_str();
    gen->add_option("--support", o.synthetic.support_size, "Clusters with nonzero coefficient")
        ->capture_default_str();
    gen->add_option("--noise-sd", o.synthetic.noise_sd, "Relative log-target noise")->capture_default_str();
    gen->add_option("--first-year", o.synthetic.first_year, "First panel year")->capture_default_str();
    gen->add_option("--layout", o.layout, "long or wide")->capture_default_str();

    auto* plot = app.add_subcommand("plot-data", "Write the data behind one figure");
    plot->add_option("--figure", o.figure,
                     "energy_trends, heatmap, cluster_boxes, lambda_path, fit_scatter or forecast")
        ->required();
    plot->add_option("--kind", o.kind, "Model for lambda_path / fit_scatter");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return exit_usage;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "validate") return cmd_validate(o, out, err);
        if (name == "cluster") return cmd_cluster(o, out);
        if (name == "regress") return cmd_regress(o, out);
        if (name == "pipeline") return cmd_pipeline(o, out);
        if (name == "forecast") return cmd_forecast(o, out);
        if (name == "gen-synthetic") return cmd_gen_synthetic(o, out);
        return cmd_plot_data(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const StageError& e) {
        err << "error: " << e.what() << "\n";
        return e.io() ? exit_usage : exit_domain;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_domain;
    }
}

}  // namespace clustreg
