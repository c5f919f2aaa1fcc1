#include "tda/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tda {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Bernstein polynomials of order n at t in [0,1].
void bernstein_row(int n, double t, double* out) {
    if (n == 0) {
        out[0] = 1.0;
        return;
    }
    const double s = 1.0 - t;
    // powers computed by repeated multiplication keep the endpoints exact
    double tp = 1.0;
    for (int m = 0; m <= n; ++m) {
        double sp = 1.0;
        for (int k = 0; k < n - m; ++k) sp *= s;
        out[m] = binomial(n, m) * tp * sp;
        tp *= t;
    }
}

} // namespace

BernsteinBasis::BernsteinBasis(int order_, double lower_, double upper_)
    : order(order_), lower(lower_), upper(upper_) {
    if (order < 1) throw std::invalid_argument("Bernstein order must be >= 1");
    if (!(upper > lower)) throw std::invalid_argument("Bernstein support requires upper > lower");
}

Eigen::VectorXd BernsteinBasis::values(double y) const {
    Eigen::VectorXd b(order + 1);
    const double t = std::clamp(unit(y), 0.0, 1.0);
    bernstein_row(order, t, b.data());
    return b;
}

Eigen::VectorXd BernsteinBasis::derivatives(double y) const {
    Eigen::VectorXd db(order + 1);
    const double t = std::clamp(unit(y), 0.0, 1.0);
    Eigen::VectorXd lower_order(order);
    bernstein_row(order - 1, t, lower_order.data());
    const double scale = order / (upper - lower);
    for (int m = 0; m <= order; ++m) {
        const double left = m > 0 ? lower_order[m - 1] : 0.0;
        const double right = m < order ? lower_order[m] : 0.0;
        db[m] = scale * (left - right);
    }
    return db;
}

void BernsteinBasis::design(double y, Eigen::Ref<Eigen::VectorXd> a, Eigen::Ref<Eigen::VectorXd> da) const {
    const double edge = y < lower ? lower : (y > upper ? upper : y);
    a = values(edge);
    da = derivatives(edge);
    if (edge != y) a += (y - edge) * da;
}

Eigen::VectorXd bernstein_basis(double y, const BernsteinBasis& basis) { return basis.values(y); }

MonotoneCoeffs::MonotoneCoeffs(Eigen::VectorXd values) : values_(std::move(values)) {
    for (Eigen::Index m = 1; m < values_.size(); ++m) {
        if (!(values_[m] >= values_[m - 1]))
            throw std::invalid_argument("Bernstein coefficients must be nondecreasing");
    }
}

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
    // log(exp(y) - 1), stable for small and large y
    return y + std::log(-std::expm1(-y));
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

MonotoneCoeffs monotone_reparam(const Eigen::VectorXd& raw) {
    Eigen::VectorXd v(raw.size());
    if (raw.size() == 0) return MonotoneCoeffs(v);
    v[0] = raw[0];
    for (Eigen::Index m = 1; m < raw.size(); ++m) v[m] = v[m - 1] + softplus(raw[m]);
    return MonotoneCoeffs(std::move(v));
}

namespace {
constexpr double kMinIncrement = 1e-300;
}

Eigen::VectorXd inverse_reparam(const MonotoneCoeffs& coeffs) {
    const auto& v = coeffs.values();
    Eigen::VectorXd raw(v.size());
    if (v.size() == 0) return raw;
    raw[0] = v[0];
    for (Eigen::Index m = 1; m < v.size(); ++m) {
        const double inc = v[m] - v[m - 1];
        if (!(inc >= 0.0)) throw std::invalid_argument("inverse_reparam requires nondecreasing coefficients");
        // an increment that underflowed in softplus comes back as a tie
        raw[m] = inverse_softplus(std::max(inc, kMinIncrement));
    }
    return raw;
}

TransformValue transform_eval(double y, const MonotoneCoeffs& coeffs, const BernsteinBasis& basis) {
    const int n = basis.order;
    if (coeffs.size() != n + 1) throw std::invalid_argument("coefficient count does not match the basis order");
    const double edge = std::clamp(y, basis.lower, basis.upper);
    const double t = basis.unit(edge), s = 1.0 - t;
    // de Casteljau down to two points gives h and its slope together
    constexpr int kStack = 32;
    double stack[kStack];
    std::vector<double> heap;
    double* b = stack;
    if (n + 1 > kStack) {
        heap.resize(static_cast<std::size_t>(n + 1));
        b = heap.data();
    }
    for (int m = 0; m <= n; ++m) b[m] = coeffs[m];
    for (int r = n; r > 1; --r)
        for (int m = 0; m < r; ++m) b[m] = s * b[m] + t * b[m + 1];
    const double h_edge = s * b[0] + t * b[1];
    const double slope = n * (b[1] - b[0]) / (basis.upper - basis.lower);
    return {h_edge + (y - edge) * slope, slope};
}

double transform_inverse(double z, const MonotoneCoeffs& coeffs, const BernsteinBasis& basis) {
    return TransformInverter(coeffs, basis)(z);
}

TransformInverter::TransformInverter(const MonotoneCoeffs& coeffs, const BernsteinBasis& basis)
    : coeffs_(coeffs), basis_(basis), lo_(transform_eval(basis.lower, coeffs, basis)),
      hi_(transform_eval(basis.upper, coeffs, basis)) {}

double TransformInverter::operator()(double z) const {
    const BernsteinBasis& basis = basis_;
    if (z <= lo_.h) {
        if (lo_.hprime <= 0.0) return basis.lower;
        return basis.lower + (z - lo_.h) / lo_.hprime;
    }
    if (z >= hi_.h) {
        if (hi_.hprime <= 0.0) return basis.upper;
        return basis.upper + (z - hi_.h) / hi_.hprime;
    }
    // safeguarded Newton on the bracket [a, b] with h(a) < z < h(b)
    double a = basis.lower, b = basis.upper;
    double y = basis.lower + (z - lo_.h) / (hi_.h - lo_.h) * (basis.upper - basis.lower);
    const double width = basis.upper - basis.lower;
    for (int it = 0; it < 200; ++it) {
        const auto v = transform_eval(y, coeffs_, basis);
        const double r = v.h - z;
        if (std::abs(r) <= 1e-13 * std::max(1.0, std::abs(z))) return y;
        if (r < 0.0) a = y; else b = y;
        if (b - a <= 1e-15 * width) return 0.5 * (a + b);
        double next = v.hprime > 0.0 ? y - r / v.hprime : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        y = next;
    }
    return y;
}

int dim_from_lambda_size(Eigen::Index n) {
    const int j = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(n))) / 2.0));
    if (static_cast<Eigen::Index>(j) * (j - 1) / 2 != n)
        throw std::invalid_argument("lambda length " + std::to_string(n) + " is not J(J-1)/2");
    return j;
}

CorrelationParam::CorrelationParam(Eigen::VectorXd lambda, int dim) : dim_(dim), lambda_(std::move(lambda)) {
    if (dim < 1) throw std::invalid_argument("correlation dimension must be >= 1");
    if (lambda_.size() != n_lambda(dim)) throw std::invalid_argument("lambda length does not match dimension");
    const int J = dim_;
    unit_lower_ = Eigen::MatrixXd::Identity(J, J);
    Eigen::Index k = 0;
    for (int a = 1; a < J; ++a)
        for (int b = 0; b < a; ++b) unit_lower_(a, b) = lambda_[k++];

    unit_lower_inv_ = unit_lower_.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd::Identity(J, J));
    const Eigen::MatrixXd c = unit_lower_inv_ * unit_lower_inv_.transpose();
    const Eigen::VectorXd d = c.diagonal();
    const Eigen::VectorXd sd = d.array().sqrt();

    std_lower_ = unit_lower_ * sd.asDiagonal();
    precision_ = std_lower_.transpose() * std_lower_;
    sigma_ = sd.cwiseInverse().asDiagonal() * c * sd.cwiseInverse().asDiagonal();
    sigma_.diagonal().setOnes();
    log_det_ = -2.0 * std_lower_.diagonal().array().log().sum();
}

CorrelationParam corr_from_lambda(const Eigen::VectorXd& lambda) {
    return CorrelationParam(lambda, dim_from_lambda_size(lambda.size()));
}

CorrelationParam CorrelationParam::from_correlation(const Eigen::MatrixXd& sigma) {
    const int J = static_cast<int>(sigma.rows());
    if (sigma.cols() != J) throw std::invalid_argument("correlation matrix must be square");
    // Sigma^-1 = Lt' Lt with Lt lower triangular: a Cholesky factorization of
    // the index-reversed precision gives the reversed transpose of Lt.
    const Eigen::MatrixXd precision = sigma.inverse();
    Eigen::MatrixXd reversed = precision.colwise().reverse().rowwise().reverse();
    Eigen::LLT<Eigen::MatrixXd> llt(reversed);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("correlation matrix is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::MatrixXd lt = l.transpose().colwise().reverse().rowwise().reverse();
    Eigen::VectorXd lambda(n_lambda(J));
    Eigen::Index k = 0;
    for (int a = 1; a < J; ++a)
        for (int b = 0; b < a; ++b) lambda[k++] = lt(a, b) / lt(b, b);
    return CorrelationParam(lambda, J);
}

Eigen::MatrixXd CorrelationParam::sigma_derivative(Eigen::Index k) const {
    const int J = dim_;
    int a = 1, b = 0;
    for (Eigen::Index idx = 0; idx < k; ++idx) {
        if (++b == a) {
            ++a;
            b = 0;
        }
    }
    const Eigen::MatrixXd c = unit_lower_inv_ * unit_lower_inv_.transpose();
    // dC = X + X', X = -L^-1 E_ab C
    Eigen::MatrixXd x = -unit_lower_inv_.col(a) * c.row(b);
    const Eigen::MatrixXd dc = x + x.transpose();
    const Eigen::VectorXd d = c.diagonal();
    Eigen::MatrixXd out(J, J);
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j)
            out(i, j) = dc(i, j) / std::sqrt(d[i] * d[j]) -
                        0.5 * sigma_(i, j) * (dc(i, i) / d[i] + dc(j, j) / d[j]);
    return out;
}

} // namespace tda
