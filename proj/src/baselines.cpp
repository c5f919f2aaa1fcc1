#include "tda/baselines.hpp"

#include "tda/error.hpp"

#include <cmath>
#include <limits>

namespace tda {

namespace {

Eigen::MatrixXd complete_rows(const CaseControlData& data, int d) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < data.n_rows(); ++i)
        if (data.disease[static_cast<std::size_t>(i)] == d && data.observed.row(i).all()) idx.push_back(i);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), data.n_markers());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = data.values.row(idx[r]);
    return out;
}

Eigen::LDLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& cov, const char* what) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    const Eigen::VectorXd dg = ldlt.vectorD();
    const double scale = std::max(cov.diagonal().maxCoeff(), std::numeric_limits<double>::min());
    if (ldlt.info() != Eigen::Success || !(dg.minCoeff() > 1e-12 * scale))
        throw SingularCovariance(std::string(what) + ": covariance matrix is singular");
    return ldlt;
}

double log_det(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) { return ldlt.vectorD().array().log().sum(); }

} // namespace

void class_moments(const CaseControlData& data, int d, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd x = complete_rows(data, d);
    if (x.rows() < 2) throw InsufficientData("class " + std::to_string(d) + " needs at least two complete rows");
    mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
    cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
}

LdaModel lda_fit(const CaseControlData& data) {
    const Eigen::MatrixXd x0 = complete_rows(data, 0), x1 = complete_rows(data, 1);
    if (x0.rows() < 1 || x1.rows() < 1 || x0.rows() + x1.rows() < 3)
        throw InsufficientData("lda: not enough complete rows");
    const Eigen::VectorXd m0 = x0.colwise().mean().transpose(), m1 = x1.colwise().mean().transpose();
    const Eigen::MatrixXd c0 = x0.rowwise() - m0.transpose(), c1 = x1.rowwise() - m1.transpose();
    const Eigen::MatrixXd pooled =
        (c0.transpose() * c0 + c1.transpose() * c1) / static_cast<double>(x0.rows() + x1.rows() - 2);
    const auto ldlt = factor(pooled, "lda");
    LdaModel m;
    m.coef = ldlt.solve(m1 - m0);
    m.intercept = -0.5 * (m0 + m1).dot(m.coef);
    return m;
}

Eigen::VectorXd lda_score(const LdaModel& model, const Eigen::MatrixXd& y) {
    return (y * model.coef).array() + model.intercept;
}

QdaModel qda_from_moments(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0, const Eigen::VectorXd& mean1,
                          const Eigen::MatrixXd& cov1) {
    const auto l0 = factor(cov0, "qda"), l1 = factor(cov1, "qda");
    const Eigen::Index J = mean0.size();
    QdaModel m;
    m.mean0 = mean0;
    m.mean1 = mean1;
    m.prec0 = l0.solve(Eigen::MatrixXd::Identity(J, J));
    m.prec1 = l1.solve(Eigen::MatrixXd::Identity(J, J));
    m.log_det0 = log_det(l0);
    m.log_det1 = log_det(l1);
    return m;
}

QdaModel qda_fit(const CaseControlData& data) {
    Eigen::VectorXd m0, m1;
    Eigen::MatrixXd s0, s1;
    class_moments(data, 0, m0, s0);
    class_moments(data, 1, m1, s1);
    return qda_from_moments(m0, s0, m1, s1);
}

Eigen::VectorXd qda_score(const QdaModel& model, const Eigen::MatrixXd& y) {
    Eigen::VectorXd out(y.rows());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const Eigen::VectorXd e0 = y.row(i).transpose() - model.mean0;
        const Eigen::VectorXd e1 = y.row(i).transpose() - model.mean1;
        out[i] = -0.5 * (e1.dot(model.prec1 * e1) + model.log_det1) + 0.5 * (e0.dot(model.prec0 * e0) + model.log_det0);
    }
    return out;
}

LogisticModel logistic_fit(const CaseControlData& data, int max_iterations, double tol) {
    const Eigen::MatrixXd x0 = complete_rows(data, 0), x1 = complete_rows(data, 1);
    const Eigen::Index n = x0.rows() + x1.rows(), p = data.n_markers() + 1;
    if (x0.rows() < 1 || x1.rows() < 1) throw InsufficientData("logistic: both classes need complete rows");
    Eigen::MatrixXd x(n, p);
    x.col(0).setOnes();
    x.block(0, 1, x0.rows(), p - 1) = x0;
    x.block(x0.rows(), 1, x1.rows(), p - 1) = x1;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    y.tail(x1.rows()).setOnes();

    LogisticModel m;
    m.coef = Eigen::VectorXd::Zero(p);
    for (int it = 1; it <= max_iterations; ++it) {
        m.iterations = it;
        const Eigen::VectorXd eta = x * m.coef;
        Eigen::VectorXd mu(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-300);
        }
        const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) return m;
        const Eigen::VectorXd step = ldlt.solve(x.transpose() * (y - mu));
        if (!step.allFinite()) return m;
        m.coef += step;
        // coefficients running away signal (quasi-)separation
        if (m.coef.lpNorm<Eigen::Infinity>() > 1e6) return m;
        if (step.lpNorm<Eigen::Infinity>() < tol * std::max(1.0, m.coef.lpNorm<Eigen::Infinity>())) {
            m.converged = true;
            return m;
        }
    }
    return m;
}

Eigen::VectorXd logistic_score(const LogisticModel& model, const Eigen::MatrixXd& y) {
    return (y * model.coef.tail(model.coef.size() - 1)).array() + model.coef[0];
}

} // namespace tda
