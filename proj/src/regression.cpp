#include "clustreg/regression.hpp"

#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace clustreg {

namespace {

// Centered (and optionally scaled) copy of the design. Coefficients solved
// on this scale map back through `scale`.
struct Prepared {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::RowVectorXd x_mean;
    double y_mean = 0.0;
    Eigen::VectorXd scale;
};

Prepared prepare(const DesignMatrix& d, const FitOptions& opts) {
    d.validate();
    Prepared p;
    const auto n = static_cast<double>(d.n());
    if (opts.fit_intercept) {
        p.x_mean = d.x.colwise().mean();
        p.y_mean = d.y.mean();
        p.x = d.x.rowwise() - p.x_mean;
        p.y = d.y.array() - p.y_mean;
    } else {
        p.x_mean = Eigen::RowVectorXd::Zero(d.p());
        p.x = d.x;
        p.y = d.y;
    }
    p.scale = Eigen::VectorXd::Ones(d.p());
    if (opts.standardize) {
        for (Eigen::Index j = 0; j < d.p(); ++j) {
            const double s = std::sqrt(p.x.col(j).squaredNorm() / n);
            if (s > 0) {
                p.scale(j) = s;
                p.x.col(j) /= s;
            }
        }
    }
    return p;
}

LinearModel finish(const DesignMatrix& d, const Prepared& p, const Eigen::VectorXd& beta_scaled,
                   const PenaltySpec& spec, const FitOptions& opts) {
    LinearModel m;
    m.coefficients = beta_scaled.cwiseQuotient(p.scale);
    m.intercept = opts.fit_intercept ? p.y_mean - p.x_mean.dot(m.coefficients) : 0.0;
    m.penalty = spec;
    m.column_names = d.column_names;
    m.fit_intercept = opts.fit_intercept;
    m.standardized = opts.standardize;
    return m;
}

// Column scales a fitted model was penalized on.
Eigen::VectorXd penalty_scales(const LinearModel& model, const DesignMatrix& d) {
    FitOptions opts;
    opts.fit_intercept = model.fit_intercept;
    opts.standardize = model.standardized;
    return prepare(d, opts).scale;
}

// Exact minimizer of RSS + l2 |beta|^2 on the prepared scale. Singular
// least-squares systems get the minimum-norm solution.
Eigen::VectorXd smooth_solve(const Prepared& p, double l2, bool* rank_deficient = nullptr) {
    if (l2 == 0.0) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(p.x);
        if (rank_deficient) *rank_deficient = cod.rank() < p.x.cols();
        return cod.solve(p.y);
    }
    const Eigen::Index n = p.x.rows(), cols = p.x.cols();
    Eigen::MatrixXd augmented(n + cols, cols);
    augmented << p.x, std::sqrt(l2) * Eigen::MatrixXd::Identity(cols, cols);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(n + cols);
    target.head(n) = p.y;
    return augmented.colPivHouseholderQr().solve(target);
}

LinearModel coordinate_descent(const DesignMatrix& d, const PenaltySpec& spec, const FitOptions& opts) {
    spec.validate();
    if (!(opts.tol > 0)) throw DomainError("tolerance must be positive");
    if (opts.max_iter < 1) throw DomainError("max_iter must be positive");
    const Prepared p = prepare(d, opts);
    const double l1 = spec.l1();
    const double l2 = spec.l2();
    const Eigen::Index cols = p.x.cols();

    // Without the L1 term the objective is smooth; solve it directly.
    if (l1 == 0.0) {
        LinearModel m = finish(d, p, smooth_solve(p, l2), spec, opts);
        m.iterations = 0;
        return m;
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols);
    Eigen::VectorXd residual = p.y;
    const Eigen::VectorXd col_sq = p.x.colwise().squaredNorm().transpose();

    bool converged = false;
    int sweep = 0;
    while (sweep < opts.max_iter) {
        ++sweep;
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (col_sq(j) == 0.0) continue;
            const double rho = p.x.col(j).dot(residual) + col_sq(j) * beta(j);
            const double updated = soft_threshold(rho, l1 / 2.0) / (col_sq(j) + l2);
            const double change = updated - beta(j);
            if (change != 0.0) {
                residual -= change * p.x.col(j);
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(change));
            }
        }
        if (max_change < opts.tol) {
            converged = true;
            break;
        }
    }
    LinearModel m = finish(d, p, beta, spec, opts);
    m.converged = converged;
    m.iterations = sweep;
    return m;
}

}  // namespace

void DesignMatrix::validate() const {
    if (x.rows() < 1 || x.cols() < 1) throw DomainError("design needs at least one row and one column");
    if (y.size() != x.rows()) throw DomainError("target length does not match design rows");
    if (column_names.size() != static_cast<std::size_t>(x.cols())) {
        throw DomainError("column name count does not match design columns");
    }
    if (!x.allFinite() || !y.allFinite()) throw DomainError("design contains non-finite values");
}

DesignMatrix DesignMatrix::rows(std::span<const Eigen::Index> index) const {
    DesignMatrix out;
    out.x.resize(static_cast<Eigen::Index>(index.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(index.size()));
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(index[i]);
        out.y(static_cast<Eigen::Index>(i)) = y(index[i]);
    }
    out.column_names = column_names;
    return out;
}

DesignMatrix make_design(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    DesignMatrix d;
    const std::size_t p = x.empty() ? 0 : x.front().size();
    d.x.resize(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != p) throw DomainError("ragged design rows");
        for (std::size_t j = 0; j < p; ++j) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i][j];
    }
    d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    for (std::size_t j = 0; j < p; ++j) d.column_names.push_back("x" + std::to_string(j + 1));
    return d;
}

PenaltyKind parse_penalty_kind(const std::string& text) {
    if (text == "ridge") return PenaltyKind::ridge;
    if (text == "lasso") return PenaltyKind::lasso;
    if (text == "elastic_net" || text == "elastic-net") return PenaltyKind::elastic_net;
    throw FormatError("unknown penalty kind '" + text + "'");
}

std::string to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::ridge: return "ridge";
        case PenaltyKind::lasso: return "lasso";
        case PenaltyKind::elastic_net: return "elastic_net";
    }
    return "unknown";
}

PenaltySpec PenaltySpec::ridge(double lambda) { return {PenaltyKind::ridge, lambda, 0.0, 0.0, 0.0}; }

PenaltySpec PenaltySpec::lasso(double lambda) { return {PenaltyKind::lasso, lambda, 0.0, 0.0, 1.0}; }

PenaltySpec PenaltySpec::elastic_net(double lambda1, double lambda2) {
    const double total = lambda1 + lambda2;
    return {PenaltyKind::elastic_net, 0.0, lambda1, lambda2, total > 0 ? lambda1 / total : 0.5};
}

PenaltySpec PenaltySpec::elastic_net_mix(double total, double alpha) {
    if (!(alpha >= 0 && alpha <= 1)) throw DomainError("alpha must lie in [0, 1]");
    PenaltySpec s{PenaltyKind::elastic_net, 0.0, alpha * total, (1.0 - alpha) * total, alpha};
    return s;
}

double PenaltySpec::l1() const noexcept {
    switch (kind) {
        case PenaltyKind::ridge: return 0.0;
        case PenaltyKind::lasso: return lambda;
        case PenaltyKind::elastic_net: return lambda1;
    }
    return 0.0;
}

double PenaltySpec::l2() const noexcept {
    switch (kind) {
        case PenaltyKind::ridge: return lambda;
        case PenaltyKind::lasso: return 0.0;
        case PenaltyKind::elastic_net: return lambda2;
    }
    return 0.0;
}

double PenaltySpec::strength() const noexcept {
    return kind == PenaltyKind::elastic_net ? lambda1 + lambda2 : lambda;
}

void PenaltySpec::validate() const {
    if (!(lambda >= 0) || !(lambda1 >= 0) || !(lambda2 >= 0)) {
        throw DomainError("penalty weights must be non-negative");
    }
    if (!(alpha >= 0 && alpha <= 1)) throw DomainError("alpha must lie in [0, 1]");
}

LinearModel fit_ols(const DesignMatrix& d, const FitOptions& opts) {
    const Prepared p = prepare(d, opts);
    bool rank_deficient = false;
    const Eigen::VectorXd beta = smooth_solve(p, 0.0, &rank_deficient);
    LinearModel m = finish(d, p, beta, PenaltySpec::ridge(0.0), opts);
    m.rank_deficient = rank_deficient;
    return m;
}

LinearModel fit_ridge(const DesignMatrix& d, double lambda, const FitOptions& opts) {
    if (!(lambda >= 0)) throw DomainError("ridge lambda must be non-negative");
    if (lambda == 0.0) return fit_ols(d, opts);
    const Prepared p = prepare(d, opts);
    return finish(d, p, smooth_solve(p, lambda), PenaltySpec::ridge(lambda), opts);
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

LinearModel fit_lasso(const DesignMatrix& d, double lambda, const FitOptions& opts) {
    return coordinate_descent(d, PenaltySpec::lasso(lambda), opts);
}

LinearModel fit_elastic_net(const DesignMatrix& d, double lambda1, double lambda2, const FitOptions& opts) {
    return coordinate_descent(d, PenaltySpec::elastic_net(lambda1, lambda2), opts);
}

LinearModel fit(const DesignMatrix& d, const PenaltySpec& spec, const FitOptions& opts) {
    spec.validate();
    switch (spec.kind) {
        case PenaltyKind::ridge: return fit_ridge(d, spec.lambda, opts);
        case PenaltyKind::lasso: return fit_lasso(d, spec.lambda, opts);
        case PenaltyKind::elastic_net: {
            LinearModel m = fit_elastic_net(d, spec.lambda1, spec.lambda2, opts);
            m.penalty = spec;
            return m;
        }
    }
    throw DomainError("unknown penalty kind");
}

double kkt_check(const LinearModel& model, const DesignMatrix& d) {
    d.validate();
    if (model.coefficients.size() != d.p()) throw DomainError("model width does not match design");
    const Eigen::VectorXd residual = d.y - predict(model, d.x);
    const Eigen::VectorXd scale = penalty_scales(model, d);
    const double l1 = model.penalty.l1();
    const double l2 = model.penalty.l2();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        const double g = -2.0 * d.x.col(j).dot(residual) / scale(j);
        const double b = model.coefficients(j) * scale(j);
        double violation = 0.0;
        if (b == 0.0) {
            violation = std::max(std::abs(g) - l1, 0.0);
        } else {
            violation = std::abs(g + l1 * (b > 0 ? 1.0 : -1.0) + 2.0 * l2 * b);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

double lambda_max(const DesignMatrix& d, const FitOptions& opts) {
    const Prepared p = prepare(d, opts);
    return 2.0 * (p.x.transpose() * p.y).cwiseAbs().maxCoeff();
}

double penalized_objective(const LinearModel& model, const DesignMatrix& d) {
    const Eigen::VectorXd residual = d.y - predict(model, d.x);
    const Eigen::VectorXd b = model.coefficients.cwiseProduct(penalty_scales(model, d));
    return residual.squaredNorm() + model.penalty.l1() * b.cwiseAbs().sum() +
           model.penalty.l2() * b.squaredNorm();
}

CvResult cross_validate(const DesignMatrix& d, PenaltyKind kind, std::span<const double> lambda_grid,
                        int folds, const FitOptions& opts, double alpha) {
    if (lambda_grid.empty()) throw DomainError("lambda grid is empty");
    if (folds < 2) throw DomainError("cross-validation needs at least 2 folds");
    d.validate();
    const Eigen::Index n = d.n();
    if (n < folds) throw DomainError("fewer samples than folds");

    std::vector<Eigen::Index> bounds;
    for (int k = 0; k <= folds; ++k) bounds.push_back(k * n / folds);

    auto spec_for = [&](double lambda) {
        switch (kind) {
            case PenaltyKind::ridge: return PenaltySpec::ridge(lambda);
            case PenaltyKind::lasso: return PenaltySpec::lasso(lambda);
            case PenaltyKind::elastic_net: return PenaltySpec::elastic_net_mix(lambda, alpha);
        }
        return PenaltySpec::ridge(lambda);
    };

    CvResult result;
    std::size_t best = 0;
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
        const PenaltySpec spec = spec_for(lambda_grid[g]);
        CvRow row;
        row.lambda = lambda_grid[g];
        for (int k = 0; k < folds; ++k) {
            std::vector<Eigen::Index> train, test;
            for (Eigen::Index i = 0; i < n; ++i) (i >= bounds[k] && i < bounds[k + 1] ? test : train).push_back(i);
            const DesignMatrix train_d = d.rows(train);
            const DesignMatrix test_d = d.rows(test);
            const LinearModel m = fit(train_d, spec, opts);
            const Eigen::VectorXd pred = predict(m, test_d.x);
            row.fold_mse.push_back(compute_mse(std::span(test_d.y.data(), static_cast<std::size_t>(test_d.y.size())),
                                               std::span(pred.data(), static_cast<std::size_t>(pred.size()))));
        }
        row.cv_mse = std::accumulate(row.fold_mse.begin(), row.fold_mse.end(), 0.0) / folds;
        result.table.push_back(std::move(row));
        const auto& cur = result.table.back();
        const auto& incumbent = result.table[best];
        if (g > 0 && (cur.cv_mse < incumbent.cv_mse ||
                      (cur.cv_mse == incumbent.cv_mse && cur.lambda > incumbent.lambda))) {
            best = g;
        }
    }
    result.best = spec_for(result.table[best].lambda);
    return result;
}

PathReport iterate_lambda(const DesignMatrix& d, PenaltyKind kind, std::span<const double> grid,
                          const FitOptions& opts, double alpha) {
    if (grid.empty()) throw DomainError("lambda grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("lambda grid must be ascending");
    PathReport path;
    path.kind = kind;
    path.alpha = kind == PenaltyKind::elastic_net ? alpha : (kind == PenaltyKind::lasso ? 1.0 : 0.0);
    path.column_names = d.column_names;
    const std::span<const double> y(d.y.data(), static_cast<std::size_t>(d.y.size()));
    for (double lambda : grid) {
        PenaltySpec spec = kind == PenaltyKind::ridge   ? PenaltySpec::ridge(lambda)
                           : kind == PenaltyKind::lasso ? PenaltySpec::lasso(lambda)
                                                        : PenaltySpec::elastic_net_mix(lambda, alpha);
        const LinearModel m = fit(d, spec, opts);
        const Eigen::VectorXd pred = predict(m, d.x);
        const std::span<const double> y_hat(pred.data(), static_cast<std::size_t>(pred.size()));
        path.lambdas.push_back(lambda);
        path.coefficients.emplace_back(m.coefficients.begin(), m.coefficients.end());
        path.intercepts.push_back(m.intercept);
        path.r2.push_back(compute_r2(y, y_hat));
        path.mse.push_back(compute_mse(y, y_hat));
    }
    return path;
}

std::vector<double> auto_lambda_grid(const DesignMatrix& d, const FitOptions& opts, int count, double ratio) {
    if (count < 2 || !(ratio > 0 && ratio < 1)) throw DomainError("auto grid needs count >= 2 and ratio in (0,1)");
    const double top = lambda_max(d, opts);
    if (!(top > 0)) return {0.0};
    std::vector<double> grid;
    const double step = std::log(ratio) / (count - 1);
    for (int k = count - 1; k >= 0; --k) grid.push_back(top * std::exp(step * k));
    return grid;
}

double compute_mse(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw DomainError("length mismatch in MSE");
    if (y.empty()) throw DomainError("MSE of empty series");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    return s / static_cast<double>(y.size());
}

double compute_r2(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw DomainError("length mismatch in R2");
    if (y.empty()) throw DomainError("R2 of empty series");
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot == 0.0) throw DomainError("R2 undefined: target has zero variance");
    return 1.0 - ss_res / ss_tot;
}

double compute_sparsity(const LinearModel& model) {
    const auto p = model.coefficients.size();
    if (p < 1) throw DomainError("sparsity needs at least one coefficient");
    const auto nonzero = (model.coefficients.array().abs() > kNonzeroThreshold).count();
    return static_cast<double>(nonzero) / static_cast<double>(p);
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& x_new) {
    if (x_new.cols() != model.coefficients.size()) throw DomainError("prediction rows have the wrong width");
    return (x_new * model.coefficients).array() + model.intercept;
}

FitReport make_fit_report(const LinearModel& model, const DesignMatrix& d) {
    const Eigen::VectorXd pred = predict(model, d.x);
    FitReport r;
    r.y_hat.assign(pred.begin(), pred.end());
    for (Eigen::Index i = 0; i < d.n(); ++i) r.residuals.push_back(d.y(i) - pred(i));
    const std::span<const double> y(d.y.data(), static_cast<std::size_t>(d.y.size()));
    r.mse = compute_mse(y, r.y_hat);
    r.r2 = compute_r2(y, r.y_hat);
    r.sparsity = compute_sparsity(model);
    r.y_bar = d.y.mean();
    return r;
}

void save_path_csv(const PathReport& path, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    csv::Row header{"lambda"};
    header.insert(header.end(), path.column_names.begin(), path.column_names.end());
    header.push_back("r2");
    header.push_back("mse");
    csv::write_row(out, header);
    for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
        csv::Row row{csv::format_double(path.lambdas[k])};
        for (double c : path.coefficients[k]) row.push_back(csv::format_double(c));
        row.push_back(csv::format_double(path.r2[k]));
        row.push_back(csv::format_double(path.mse[k]));
        csv::write_row(out, row);
    }
    if (!out) throw IoError("write failure on '" + file.string() + "'");
}

void save_cv_csv(const CvResult& cv, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    csv::write_row(out, {"lambda", "cv_mse"});
    for (const auto& row : cv.table) {
        csv::write_row(out, {csv::format_double(row.lambda), csv::format_double(row.cv_mse)});
    }
    if (!out) throw IoError("write failure on '" + file.string() + "'");
}

}  // namespace clustreg
