#include "tda/score.hpp"

#include "tda/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tda {

namespace {

constexpr double kSingular = 1e-10;

Eigen::MatrixXd symmetric(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Mean and covariance of h(Y_d) under a shared-transformation model.
void class_moments(const FittedTda& model, int d, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    const int J = model.n_markers();
    if (d == 0) {
        mean = Eigen::VectorXd::Zero(J);
        cov = model.sigma(0);
        return;
    }
    const Eigen::VectorXd s = model.gamma.array().exp();
    mean = model.delta;
    cov = s.asDiagonal() * model.sigma(1) * s.asDiagonal();
}

RocCurve finish(std::vector<double> fpr, std::vector<double> tpr) {
    // quadrature noise must not break monotonicity
    for (std::size_t i = 1; i < tpr.size(); ++i) tpr[i] = std::max(tpr[i], tpr[i - 1]);
    RocCurve roc;
    roc.auc = trapezoid_auc(fpr, tpr);
    roc.fpr = std::move(fpr);
    roc.tpr = std::move(tpr);
    return roc;
}

void check_grid(const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("ROC grid needs at least two points");
    if (grid.front() != 0.0 || grid.back() != 1.0) throw std::invalid_argument("ROC grid must start at 0 and end at 1");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("ROC grid must be strictly increasing");
}

std::vector<double> simulated_scores(const FittedTda& model, int d, Eigen::Index n, std::uint64_t seed) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(d));
    const Eigen::MatrixXd y = sample_class(model, d, n, rng);
    const Scorer scorer(model);
    std::vector<double> s(static_cast<std::size_t>(n));
    Eigen::VectorXd row(model.n_markers());
    for (Eigen::Index i = 0; i < n; ++i) {
        row = y.row(i).transpose();
        s[static_cast<std::size_t>(i)] = scorer(row.data());
    }
    return s;
}

double linear_q(const FittedTda& model) {
    return model.delta.dot(model.corr_for(0).precision() * model.delta);
}

} // namespace

double log_lr(const FittedTda& model, const Eigen::VectorXd& y) {
    return log_density(model, 1, y) - log_density(model, 0, y);
}

Scorer::Scorer(const FittedTda& model) : model_(model) {
    for (int j = 0; j < model.n_markers(); ++j) basis_.push_back(model.spec.basis(j));
    for (int d = 0; d < 2; ++d) {
        std_lower_[static_cast<std::size_t>(d)] = model.corr_for(d).std_lower();
        log_det_[static_cast<std::size_t>(d)] = model.corr_for(d).log_det();
    }
}

double Scorer::operator()(const double* y) const {
    const int J = model_.n_markers();
    for (int j = 0; j < J; ++j)
        if (std::isnan(y[j])) return log_lr(model_, Eigen::Map<const Eigen::VectorXd>(y, J));
    constexpr int kStack = 64;
    double zbuf[2][kStack];
    if (J > kStack) return log_lr(model_, Eigen::Map<const Eigen::VectorXd>(y, J));
    const bool shared = model_.spec.shared_transform();
    double out = 0.0;
    for (int d = 0; d < 2; ++d) {
        double logjac = 0.0;
        for (int j = 0; j < J; ++j) {
            TransformValue v;
            if (shared && d == 1) {
                v = transform_eval(y[j], model_.coeffs[0][static_cast<std::size_t>(j)], basis_[static_cast<std::size_t>(j)]);
                const double s = std::exp(-model_.gamma[j]);
                v.h = (v.h - model_.delta[j]) * s;
                v.hprime *= s;
            } else {
                v = transform_eval(y[j], model_.coeffs[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)],
                                   basis_[static_cast<std::size_t>(j)]);
            }
            if (!(v.hprime > 0.0)) return log_lr(model_, Eigen::Map<const Eigen::VectorXd>(y, J));
            zbuf[d][j] = v.h;
            logjac += std::log(v.hprime);
        }
        // z' Sigma^-1 z = |Lt z|^2 with Lt lower triangular
        const Eigen::MatrixXd& lt = std_lower_[static_cast<std::size_t>(d)];
        double quad = 0.0;
        for (int a = 0; a < J; ++a) {
            double r = 0.0;
            for (int b = 0; b <= a; ++b) r += lt(a, b) * zbuf[d][b];
            quad += r * r;
        }
        const double lf = -0.5 * (log_det_[static_cast<std::size_t>(d)] + quad) + logjac;
        out += d == 1 ? lf : -lf;
    }
    return out;
}

Eigen::VectorXd score_rows(const FittedTda& model, const CaseControlData& data) {
    if (data.n_markers() != model.n_markers()) throw std::invalid_argument("data and model disagree on the number of markers");
    const Scorer scorer(model);
    Eigen::VectorXd out(data.n_rows());
    std::vector<double> y(static_cast<std::size_t>(data.n_markers()));
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        for (int j = 0; j < data.n_markers(); ++j)
            y[static_cast<std::size_t>(j)] = data.observed(i, j) ? data.values(i, j) : std::numeric_limits<double>::quiet_NaN();
        out[i] = scorer(y.data());
    }
    return out;
}

QuadraticForm quadratic_form(const FittedTda& model) {
    if (!model.spec.shared_transform())
        throw UnsupportedFamily("the Free family has no shared transformation and no quadratic form");
    const Eigen::VectorXd g = (-model.gamma.array()).exp();
    const Eigen::MatrixXd b1 = symmetric(g.asDiagonal() * model.corr_for(1).precision() * g.asDiagonal());
    QuadraticForm qf;
    qf.A = symmetric(b1 - model.corr_for(0).precision());
    qf.b = b1 * model.delta;
    qf.k = -0.5 * model.delta.dot(qf.b) - 0.5 * (model.corr_for(1).log_det() - model.corr_for(0).log_det()) -
           model.gamma.sum();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qf.A);
    if (es.info() != Eigen::Success) throw NumericalFailure("quadratic_form: eigendecomposition failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const double amax = ev.cwiseAbs().maxCoeff();
    const double amin = ev.cwiseAbs().minCoeff();
    if (amax < kSingular) {
        qf.linear = true;
        qf.coef = qf.b;
        qf.linear_const = qf.k;
    }
    if (amin >= kSingular) {
        const Eigen::MatrixXd& p = es.eigenvectors();
        qf.beta = p * ev.cwiseInverse().asDiagonal() * p.transpose() * qf.b;
        qf.constant = qf.k + 0.5 * qf.beta.dot(qf.A * qf.beta);
    }
    return qf;
}

GChiSqParams score_distribution(const FittedTda& model, int d) {
    const QuadraticForm qf = quadratic_form(model);
    Eigen::VectorXd m;
    Eigen::MatrixXd s;
    class_moments(model, d, m, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(s);
    if (ss.info() != Eigen::Success) throw NumericalFailure("score_distribution: eigendecomposition failed");
    const Eigen::MatrixXd r = ss.operatorSqrt();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric(-0.5 * r * qf.A * r));
    if (es.info() != Eigen::Success) throw NumericalFailure("score_distribution: eigendecomposition failed");
    const Eigen::VectorXd g = es.eigenvectors().transpose() * (r * (qf.b - qf.A * m));

    GChiSqParams out;
    out.offset = -0.5 * m.dot(qf.A * m) + qf.b.dot(m) + qf.k;
    double normal_var = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double lam = es.eigenvalues()[i];
        if (std::abs(lam) < kSingular) {
            out.offset += lam;
            normal_var += g[i] * g[i];
            continue;
        }
        const double shift = g[i] / (2.0 * lam);
        out.weights.push_back(lam);
        out.noncentrality.push_back(shift * shift);
        out.offset -= g[i] * g[i] / (4.0 * lam);
    }
    out.normal_sd = std::sqrt(normal_var);
    return out;
}

double trapezoid_auc(const std::vector<double>& fpr, const std::vector<double>& tpr) {
    if (fpr.size() != tpr.size()) throw std::invalid_argument("trapezoid_auc: length mismatch");
    double a = 0.0;
    for (std::size_t i = 1; i < fpr.size(); ++i) a += 0.5 * (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]);
    return a;
}

std::vector<double> uniform_grid(int n) {
    if (n < 2) throw std::invalid_argument("ROC grid needs at least two points");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
    g.back() = 1.0;
    return g;
}

RocCurve model_roc(const FittedTda& model, const std::vector<double>& grid, const RocOptions& opts) {
    check_grid(grid);
    const std::size_t n = grid.size();
    std::vector<double> fpr(grid), tpr(n);
    tpr.front() = 0.0;
    tpr.back() = 1.0;

    if (!model.spec.shared_transform()) {
        std::vector<double> s0 = simulated_scores(model, 0, opts.mc_draws, opts.seed);
        std::vector<double> s1 = simulated_scores(model, 1, opts.mc_draws, opts.seed);
        std::sort(s0.begin(), s0.end());
        std::sort(s1.begin(), s1.end());
        const auto n0 = static_cast<double>(s0.size());
        for (std::size_t i = 1; i + 1 < n; ++i) {
            // threshold with a fraction p of class-0 scores above it
            const auto above = static_cast<std::size_t>(std::llround(grid[i] * n0));
            const double t = s0[s0.size() - std::max<std::size_t>(above, 1)];
            const auto cnt = s1.end() - std::upper_bound(s1.begin(), s1.end(), t);
            tpr[i] = static_cast<double>(cnt) / static_cast<double>(s1.size());
        }
        return finish(std::move(fpr), std::move(tpr));
    }

    const QuadraticForm qf = quadratic_form(model);
    if (qf.linear) {
        const double root_q = std::sqrt(std::max(0.0, linear_q(model)));
        const boost::math::normal norm;
        for (std::size_t i = 1; i + 1 < n; ++i)
            tpr[i] = boost::math::cdf(boost::math::complement(norm, boost::math::quantile(boost::math::complement(norm, grid[i])) - root_q));
        return finish(std::move(fpr), std::move(tpr));
    }

    const GChiSqParams g0 = score_distribution(model, 0);
    const GChiSqParams g1 = score_distribution(model, 1);
    const double cdf_tol = std::min(1e-2, 0.1 * opts.quantile_tol);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double t = gchisq_quantile(g0, 1.0 - grid[i], opts.quantile_tol);
        tpr[i] = 1.0 - gchisq_cdf(g1, t, cdf_tol);
    }
    return finish(std::move(fpr), std::move(tpr));
}

RocCurve model_roc(const FittedTda& model, const RocOptions& opts) { return model_roc(model, uniform_grid(2001), opts); }

double model_auc(const FittedTda& model, const RocOptions& opts) {
    if (!model.spec.shared_transform()) {
        return empirical_auc(simulated_scores(model, 0, opts.mc_draws, opts.seed),
                             simulated_scores(model, 1, opts.mc_draws, opts.seed));
    }
    if (quadratic_form(model).linear) {
        return boost::math::cdf(boost::math::normal(), std::sqrt(std::max(0.0, linear_q(model)) / 2.0));
    }
    return model_roc(model, opts).auc;
}

double empirical_auc(const std::vector<double>& scores0, const std::vector<double>& scores1) {
    if (scores0.empty() || scores1.empty()) throw std::invalid_argument("empirical_auc: both classes must be nonempty");
    struct Item {
        double s;
        bool case1;
    };
    std::vector<Item> all;
    all.reserve(scores0.size() + scores1.size());
    for (double s : scores0) all.push_back({s, false});
    for (double s : scores1) all.push_back({s, true});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.s < b.s; });
    // rank sum of class 1 with midranks for ties
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].s == all[i].s) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (all[k].case1) rank_sum += mid;
        i = j;
    }
    const double n0 = static_cast<double>(scores0.size()), n1 = static_cast<double>(scores1.size());
    return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1);
}

double empirical_auc(const Eigen::VectorXd& scores, const std::vector<int>& disease) {
    std::vector<double> s0, s1;
    for (Eigen::Index i = 0; i < scores.size(); ++i) (disease[static_cast<std::size_t>(i)] ? s1 : s0).push_back(scores[i]);
    return empirical_auc(s0, s1);
}

FittedTda subset_model(const FittedTda& model, const std::vector<int>& markers) {
    if (markers.empty()) throw EmptySubset("subset_model: empty marker set");
    const int J = model.n_markers();
    std::vector<bool> seen(static_cast<std::size_t>(J), false);
    for (int j : markers) {
        if (j < 0 || j >= J) throw std::invalid_argument("subset_model: marker index out of range");
        if (seen[static_cast<std::size_t>(j)]) throw std::invalid_argument("subset_model: duplicate marker index");
        seen[static_cast<std::size_t>(j)] = true;
    }
    const auto k = static_cast<Eigen::Index>(markers.size());
    FittedTda out;
    out.spec = model.spec;
    out.spec.bounds.clear();
    out.delta.resize(k);
    out.gamma.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const int j = markers[static_cast<std::size_t>(a)];
        out.spec.bounds.push_back(model.spec.bounds[static_cast<std::size_t>(j)]);
        out.marker_names.push_back(model.marker_names[static_cast<std::size_t>(j)]);
        for (int d = 0; d < 2; ++d) out.coeffs[static_cast<std::size_t>(d)].push_back(model.coeffs[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)]);
        out.delta[a] = model.delta[j];
        out.gamma[a] = model.gamma[j];
    }
    for (const auto& c : model.corr) {
        Eigen::MatrixXd sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = c.sigma()(markers[static_cast<std::size_t>(a)], markers[static_cast<std::size_t>(b)]);
        out.corr.push_back(CorrelationParam::from_correlation(sub));
    }
    out.loglik = model.loglik;
    out.n_params = n_parameters(out.spec);
    out.converged = model.converged;
    out.iterations = model.iterations;
    out.grad_norm = model.grad_norm;
    return out;
}

std::string roc_to_csv(const RocCurve& roc) {
    std::ostringstream out;
    out << "fpr,tpr\n";
    for (std::size_t i = 0; i < roc.fpr.size(); ++i) out << format_real(roc.fpr[i]) << ',' << format_real(roc.tpr[i]) << '\n';
    return out.str();
}

void write_roc_csv(const RocCurve& roc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << roc_to_csv(roc);
}

} // namespace tda
