#pragma once

// Classical comparison classifiers fitted on the raw marker scale. Rows with
// missing markers are ignored when fitting and scored as NaN.

#include "tda/data.hpp"

#include <Eigen/Dense>

namespace tda {

/// Pooled-covariance Fisher discriminant: score = coef'y + intercept, the
/// Gaussian log-LR under equal covariances.
struct LdaModel {
    Eigen::VectorXd coef;
    double intercept = 0.0;
};

/// Throws SingularCovariance when the pooled covariance is singular.
LdaModel lda_fit(const CaseControlData& data);
Eigen::VectorXd lda_score(const LdaModel& model, const Eigen::MatrixXd& y);

/// Per-class Gaussian log-likelihood ratio.
struct QdaModel {
    Eigen::VectorXd mean0, mean1;
    Eigen::MatrixXd prec0, prec1;
    double log_det0 = 0.0, log_det1 = 0.0;
};

QdaModel qda_from_moments(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0, const Eigen::VectorXd& mean1,
                          const Eigen::MatrixXd& cov1);
/// Throws SingularCovariance when a class covariance is singular.
QdaModel qda_fit(const CaseControlData& data);
Eigen::VectorXd qda_score(const QdaModel& model, const Eigen::MatrixXd& y);

/// Logistic regression by iteratively reweighted least squares; coef[0] is
/// the intercept. converged is false on separation or iteration exhaustion.
struct LogisticModel {
    Eigen::VectorXd coef;
    bool converged = false;
    int iterations = 0;
};

LogisticModel logistic_fit(const CaseControlData& data, int max_iterations = 100, double tol = 1e-10);
/// Linear predictor.
Eigen::VectorXd logistic_score(const LogisticModel& model, const Eigen::MatrixXd& y);

/// Sample mean and unbiased covariance of the complete rows of class d.
void class_moments(const CaseControlData& data, int d, Eigen::VectorXd& mean, Eigen::MatrixXd& cov);

} // namespace tda
