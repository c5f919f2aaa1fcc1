#pragma once

// Bernstein bases, monotone marginal transformations and the standardized
// Cholesky parameterization of correlation matrices.

#include <Eigen/Dense>

namespace tda {

/// Bernstein polynomial basis of order M on the support [lower, upper].
struct BernsteinBasis {
    int order = 6;
    double lower = 0.0;
    double upper = 1.0;

    BernsteinBasis() = default;
    BernsteinBasis(int order, double lower, double upper);

    int size() const { return order + 1; }

    /// Rescales y onto [0,1] without clamping.
    double unit(double y) const { return (y - lower) / (upper - lower); }

    /// Basis values at y, clamped to the support.
    Eigen::VectorXd values(double y) const;
    /// First derivatives of the basis with respect to y, clamped to the support.
    Eigen::VectorXd derivatives(double y) const;

    /// Rows `a`, `da` such that h(y) = a.theta and h'(y) = da.theta, including
    /// the linear continuation of h outside [lower, upper].
    void design(double y, Eigen::Ref<Eigen::VectorXd> a, Eigen::Ref<Eigen::VectorXd> da) const;
};

Eigen::VectorXd bernstein_basis(double y, const BernsteinBasis& basis);

/// Nondecreasing Bernstein coefficients of one marginal transformation.
class MonotoneCoeffs {
public:
    MonotoneCoeffs() = default;
    /// Throws std::invalid_argument unless `values` is nondecreasing.
    explicit MonotoneCoeffs(Eigen::VectorXd values);

    const Eigen::VectorXd& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }
    double operator[](Eigen::Index m) const { return values_[m]; }

private:
    Eigen::VectorXd values_;
};

double softplus(double x);
double inverse_softplus(double y);
/// Logistic function, the derivative of softplus.
double logistic(double x);

/// vartheta[0] = raw[0]; vartheta[m] = vartheta[m-1] + softplus(raw[m]).
MonotoneCoeffs monotone_reparam(const Eigen::VectorXd& raw);
/// Inverse of monotone_reparam. Tied coefficients map to the raw value of a
/// 1e-300 increment.
Eigen::VectorXd inverse_reparam(const MonotoneCoeffs& coeffs);

struct TransformValue {
    double h;
    double hprime;
};

/// h(y) = b(y)'vartheta inside the support, linear continuation outside.
TransformValue transform_eval(double y, const MonotoneCoeffs& coeffs, const BernsteinBasis& basis);

/// Solves h(y) = z for y. The transformation must be strictly increasing.
double transform_inverse(double z, const MonotoneCoeffs& coeffs, const BernsteinBasis& basis);

/// transform_inverse for repeated solves with one transformation; keeps
/// references to its arguments.
class TransformInverter {
public:
    TransformInverter(const MonotoneCoeffs& coeffs, const BernsteinBasis& basis);
    double operator()(double z) const;

private:
    const MonotoneCoeffs& coeffs_;
    const BernsteinBasis& basis_;
    TransformValue lo_;
    TransformValue hi_;
};

/// Correlation matrix parameterized by the unconstrained lower triangle of a
/// unit lower-triangular matrix L, standardized so that diag(Sigma) = 1:
///   Lt = L diag(L^-1 L^-T)^(1/2),  Sigma^-1 = Lt' Lt.
class CorrelationParam {
public:
    CorrelationParam() : CorrelationParam(Eigen::VectorXd(), 1) {}
    CorrelationParam(Eigen::VectorXd lambda, int dim);

    /// Recovers the parameterization of a given positive definite correlation matrix.
    static CorrelationParam from_correlation(const Eigen::MatrixXd& sigma);

    int dim() const { return dim_; }
    const Eigen::VectorXd& lambda() const { return lambda_; }
    const Eigen::MatrixXd& unit_lower() const { return unit_lower_; }
    const Eigen::MatrixXd& std_lower() const { return std_lower_; }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    const Eigen::MatrixXd& precision() const { return precision_; }
    double log_det() const { return log_det_; }

    /// Derivative of Sigma with respect to lambda[k].
    Eigen::MatrixXd sigma_derivative(Eigen::Index k) const;

private:
    int dim_;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd unit_lower_;
    Eigen::MatrixXd unit_lower_inv_;
    Eigen::MatrixXd std_lower_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd precision_;
    double log_det_ = 0.0;
};

/// Number of free correlation parameters for J markers.
inline Eigen::Index n_lambda(int dim) { return static_cast<Eigen::Index>(dim) * (dim - 1) / 2; }
/// Marker count implied by a lambda vector of length J(J-1)/2.
int dim_from_lambda_size(Eigen::Index n);

CorrelationParam corr_from_lambda(const Eigen::VectorXd& lambda);

} // namespace tda
