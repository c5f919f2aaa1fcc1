#pragma once

// Log-likelihood-ratio scores, their model-based distributions, and ROC/AUC.

#include "tda/gchisq.hpp"
#include "tda/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tda {

/// log f1(y) - log f0(y) over the observed (non-NaN) coordinates of y.
/// Throws AllMissing when nothing is observed.
double log_lr(const FittedTda& model, const Eigen::VectorXd& y);

/// Precomputed log_lr evaluator for repeated scoring with one model. Fully
/// observed rows avoid per-call factorizations; other rows use log_lr.
class Scorer {
public:
    explicit Scorer(const FittedTda& model);
    /// y points to J values, NaN marking a missing marker.
    double operator()(const double* y) const;

private:
    const FittedTda& model_;
    std::vector<BernsteinBasis> basis_;
    std::array<Eigen::MatrixXd, 2> std_lower_;
    std::array<double, 2> log_det_{};
};

/// log_lr for every row of `data`.
Eigen::VectorXd score_rows(const FittedTda& model, const CaseControlData& data);

/// Composite score of a shared-transformation model as a function of z = h(y):
///   L = -1/2 (z - beta)' A (z - beta) + constant            (A invertible)
///   L = coef' z + linear_const                               (linear)
/// With Gamma = diag(exp(-gamma)), A = Gamma Sigma1^-1 Gamma - Sigma0^-1.
struct QuadraticForm {
    Eigen::MatrixXd A;
    /// Empty unless A is invertible.
    Eigen::VectorXd beta;
    double constant = 0.0;
    /// True when every eigenvalue of A is below 1e-10 in magnitude.
    bool linear = false;
    Eigen::VectorXd coef;
    double linear_const = 0.0;

    /// Expanded form L = -1/2 z'Az + b'z + k, valid in every case.
    Eigen::VectorXd b;
    double k = 0.0;

    double evaluate(const Eigen::VectorXd& z) const { return -0.5 * z.dot(A * z) + b.dot(z) + k; }
};

/// Throws UnsupportedFamily for the Free family.
QuadraticForm quadratic_form(const FittedTda& model);

/// Law of the composite score under class d. Directions in which the score is
/// linear go into the normal component. Throws UnsupportedFamily for Free.
GChiSqParams score_distribution(const FittedTda& model, int d);

struct RocCurve {
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0;
};

/// Trapezoidal area under the points.
double trapezoid_auc(const std::vector<double>& fpr, const std::vector<double>& tpr);

struct RocOptions {
    /// Tolerance of the class-0 quantile, in probability.
    double quantile_tol = 1e-10;
    /// Monte-Carlo draws per class for the Free family.
    Eigen::Index mc_draws = 1000000;
    std::uint64_t seed = 0;
};

/// n equally spaced probabilities on [0, 1].
std::vector<double> uniform_grid(int n = 2001);

/// Model-based ROC at the false-positive rates in `grid`. The area is the
/// trapezoid over the returned points.
RocCurve model_roc(const FittedTda& model, const std::vector<double>& grid, const RocOptions& opts = {});
RocCurve model_roc(const FittedTda& model, const RocOptions& opts = {});

/// Model-based AUC: Phi(sqrt(delta' Sigma^-1 delta / 2)) in the linear case,
/// the 2001-point trapezoid otherwise, a Monte-Carlo Mann-Whitney estimate
/// for the Free family.
double model_auc(const FittedTda& model, const RocOptions& opts = {});

/// Mann-Whitney estimate of P(s1 > s0) with ties counted 1/2.
double empirical_auc(const std::vector<double>& scores0, const std::vector<double>& scores1);
double empirical_auc(const Eigen::VectorXd& scores, const std::vector<int>& disease);

/// Marginal model on the given markers (in the given order). Throws
/// EmptySubset for an empty set.
FittedTda subset_model(const FittedTda& model, const std::vector<int>& markers);

std::string roc_to_csv(const RocCurve& roc);
void write_roc_csv(const RocCurve& roc, const std::string& path);

} // namespace tda
