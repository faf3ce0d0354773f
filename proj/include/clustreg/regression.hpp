#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace clustreg {

// n samples x p regressors plus the target. In the carbon pipeline rows are
// years, columns are log cluster aggregates and y is the log total.
struct DesignMatrix {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> column_names;

    Eigen::Index n() const noexcept { return x.rows(); }
    Eigen::Index p() const noexcept { return x.cols(); }

    // Throws DomainError on empty, ragged or non-finite input.
    void validate() const;

    // The listed rows, in the given order.
    DesignMatrix rows(std::span<const Eigen::Index> index) const;
};

// Builds a design with generated names x1..xp.
DesignMatrix make_design(const std::vector<std::vector<double>>& x, const std::vector<double>& y);

enum class PenaltyKind { ridge, lasso, elastic_net };

PenaltyKind parse_penalty_kind(const std::string& text);
std::string to_string(PenaltyKind kind);

// Penalty weights follow the plain objectives
//   ridge:       RSS + lambda * sum(b^2)
//   lasso:       RSS + lambda * sum(|b|)
//   elastic net: RSS + lambda1 * sum(|b|) + lambda2 * sum(b^2)
// with no 1/n or 1/2 factors. The intercept is never penalized.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::ridge;
    double lambda = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double alpha = 0.0;  // lambda1 / (lambda1 + lambda2); 1 for lasso, 0 for ridge

    static PenaltySpec ridge(double lambda);
    static PenaltySpec lasso(double lambda);
    static PenaltySpec elastic_net(double lambda1, double lambda2);
    // lambda1 = alpha * total, lambda2 = (1 - alpha) * total.
    static PenaltySpec elastic_net_mix(double total, double alpha);

    double l1() const noexcept;
    double l2() const noexcept;
    // lambda for ridge/lasso, lambda1 + lambda2 for elastic net.
    double strength() const noexcept;
    void validate() const;

    bool operator==(const PenaltySpec&) const = default;
};

struct FitOptions {
    bool fit_intercept = true;
    bool standardize = false;  // penalize coefficients of unit-variance columns
    double tol = 1e-10;        // max coefficient change per sweep
    int max_iter = 100000;     // coordinate-descent sweeps
};

struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    PenaltySpec penalty;
    std::vector<std::string> column_names;
    bool fit_intercept = true;
    bool standardized = false;
    bool converged = true;
    bool rank_deficient = false;  // OLS fell back to the minimum-norm solution
    int iterations = 0;

    bool operator==(const LinearModel&) const = default;
};

struct FitReport {
    double mse = 0.0;
    double r2 = 0.0;
    double sparsity = 0.0;
    std::vector<double> residuals;
    std::vector<double> y_hat;
    double y_bar = 0.0;

    bool operator==(const FitReport&) const = default;
};

struct PathReport {
    PenaltyKind kind = PenaltyKind::lasso;
    double alpha = 1.0;  // elastic net only: lambdas are totals split by alpha
    std::vector<std::string> column_names;
    std::vector<double> lambdas;
    std::vector<std::vector<double>> coefficients;  // one row per lambda
    std::vector<double> intercepts;
    std::vector<double> r2;
    std::vector<double> mse;
};

struct CvRow {
    double lambda = 0.0;
    double cv_mse = 0.0;
    std::vector<double> fold_mse;
};

struct CvResult {
    PenaltySpec best;
    std::vector<CvRow> table;
};

inline constexpr double kNonzeroThreshold = 1e-10;

// Least squares with column centering for the intercept. Singular systems
// get the minimum-norm solution and rank_deficient = true.
LinearModel fit_ols(const DesignMatrix& d, const FitOptions& opts = {});

// Closed form on centered data, solved as the augmented least-squares
// problem [X; sqrt(lambda) I] b = [y; 0].
LinearModel fit_ridge(const DesignMatrix& d, double lambda, const FitOptions& opts = {});

double soft_threshold(double z, double gamma);

// Cyclic coordinate descent starting from zero. A fit that does not reach
// `tol` within `max_iter` sweeps is returned with converged = false. With a
// zero L1 weight the problem is smooth and is solved exactly as ridge (or
// least squares), reporting zero sweeps.
LinearModel fit_lasso(const DesignMatrix& d, double lambda, const FitOptions& opts = {});
LinearModel fit_elastic_net(const DesignMatrix& d, double lambda1, double lambda2,
                            const FitOptions& opts = {});

// Dispatches on spec.kind.
LinearModel fit(const DesignMatrix& d, const PenaltySpec& spec, const FitOptions& opts = {});

// Largest subgradient-optimality violation of the model's objective.
double kkt_check(const LinearModel& model, const DesignMatrix& d);

// Smallest L1 weight whose lasso solution is identically zero.
double lambda_max(const DesignMatrix& d, const FitOptions& opts = {});

// RSS plus the model's penalty, on the scale the penalty was applied.
double penalized_objective(const LinearModel& model, const DesignMatrix& d);

// Contiguous-block folds in sample order. For elastic net the grid holds
// totals split with `alpha`. Ties in cv_mse go to the larger lambda.
CvResult cross_validate(const DesignMatrix& d, PenaltyKind kind, std::span<const double> lambda_grid,
                        int folds, const FitOptions& opts = {}, double alpha = 0.5);

// Independent fit at every grid value; grid must be ascending.
PathReport iterate_lambda(const DesignMatrix& d, PenaltyKind kind, std::span<const double> grid,
                          const FitOptions& opts = {}, double alpha = 0.5);

// Geometric grid from lambda_max * ratio up to lambda_max, ascending.
std::vector<double> auto_lambda_grid(const DesignMatrix& d, const FitOptions& opts, int count, double ratio);

double compute_mse(std::span<const double> y, std::span<const double> y_hat);
// Throws DomainError when y has zero variance.
double compute_r2(std::span<const double> y, std::span<const double> y_hat);
double compute_sparsity(const LinearModel& model);

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& x_new);

FitReport make_fit_report(const LinearModel& model, const DesignMatrix& d);

// Path export: `lambda,<coef names...>,r2,mse`.
void save_path_csv(const PathReport& path, const std::filesystem::path& file);
void save_cv_csv(const CvResult& cv, const std::filesystem::path& file);

}  // namespace clustreg
