#include "tda/model.hpp"

#include "tda/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tda {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Offsets into the flat parameter vector.
struct Layout {
    int J = 0;
    int K = 0;
    bool free = false;
    bool has_delta = false;
    bool has_gamma = false;
    int n_scopes = 1;

    explicit Layout(const ModelSpec& spec)
        : J(spec.n_markers()), K(spec.order + 1), free(spec.family == MarginalFamily::Free),
          has_delta(spec.family != MarginalFamily::Free), has_gamma(spec.family == MarginalFamily::LocationScale),
          n_scopes(spec.n_scopes()) {}

    int n_theta_sets() const { return free ? 2 : 1; }
    Eigen::Index theta(int t, int j) const { return (static_cast<Eigen::Index>(t) * J + j) * K; }
    Eigen::Index delta() const { return static_cast<Eigen::Index>(n_theta_sets()) * J * K; }
    Eigen::Index gamma() const { return delta() + (has_delta ? J : 0); }
    Eigen::Index lambda(int s) const { return gamma() + (has_gamma ? J : 0) + s * n_lambda(J); }
    Eigen::Index size() const { return lambda(n_scopes); }
};

// Gradient of sum(theta) through the cumulative softplus map.
void chain_reparam(const Eigen::VectorXd& raw, const Eigen::VectorXd& gtheta, Eigen::Ref<Eigen::VectorXd> graw) {
    const Eigen::Index K = raw.size();
    double suffix = 0.0;
    for (Eigen::Index m = K - 1; m >= 1; --m) {
        suffix += gtheta[m];
        graw[m] = suffix * logistic(raw[m]);
    }
    graw[0] = suffix + gtheta[0];
}

// Pool-adjacent-violators for an unweighted nondecreasing fit.
Eigen::VectorXd isotonic(const Eigen::VectorXd& v) {
    std::vector<double> level;
    std::vector<int> count;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        level.push_back(v[i]);
        count.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const double w1 = count[count.size() - 2], w2 = count.back();
            const double merged = (w1 * level[level.size() - 2] + w2 * level.back()) / (w1 + w2);
            level.pop_back();
            count.pop_back();
            level.back() = merged;
            count.back() += static_cast<int>(w2);
        }
    }
    Eigen::VectorXd out(v.size());
    Eigen::Index k = 0;
    for (std::size_t b = 0; b < level.size(); ++b)
        for (int c = 0; c < count[b]; ++c) out[k++] = level[b];
    return out;
}

// Bernstein coefficients approximating Phi^-1 of the winsorized ECDF.
// Univariate Gaussian log-likelihood of sorted data under coefficients theta.
double marginal_loglik(const std::vector<double>& y, const Eigen::VectorXd& theta, const BernsteinBasis& basis) {
    const MonotoneCoeffs c(theta);
    double ll = 0.0;
    for (double v : y) {
        const auto t = transform_eval(v, c, basis);
        ll += -0.5 * t.h * t.h + std::log(t.hprime);
    }
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

Eigen::VectorXd enforce_increments(Eigen::VectorXd theta) {
    const Eigen::Index K = theta.size();
    theta = isotonic(theta);
    const double span = std::max(theta[K - 1] - theta[0], 1.0);
    const double min_inc = 1e-2 * span / static_cast<double>(K);
    for (Eigen::Index m = 1; m < K; ++m) theta[m] = std::max(theta[m], theta[m - 1] + min_inc);
    return theta;
}

// Two candidates for Phi^-1(ECDF): its least-squares projection onto the
// basis, and its values at the Bernstein nodes l + m(u - l)/M. The first is
// exact for Gaussian data, the second stays well conditioned when the data
// crowd into part of the support. The one with the higher marginal
// likelihood wins.
Eigen::VectorXd init_theta(std::vector<double> y, const BernsteinBasis& basis) {
    std::sort(y.begin(), y.end());
    const auto n = static_cast<Eigen::Index>(y.size());
    const int K = basis.size();
    const boost::math::normal norm;
    const auto nd = static_cast<double>(n);
    auto ecdf = [&](double v) {
        const auto hi = std::upper_bound(y.begin(), y.end(), v);
        return std::clamp(static_cast<double>(hi - y.begin()) / nd, 1.0 / (nd + 1.0), nd / (nd + 1.0));
    };

    Eigen::MatrixXd a(n, K);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        z[i] = boost::math::quantile(norm, ecdf(y[static_cast<std::size_t>(i)]));
        a.row(i) = basis.values(y[static_cast<std::size_t>(i)]).transpose();
    }
    Eigen::MatrixXd ata = a.transpose() * a;
    ata.diagonal().array() += 1e-8 * std::max(1.0, ata.diagonal().maxCoeff());
    const Eigen::VectorXd projected = enforce_increments(ata.ldlt().solve(a.transpose() * z));

    Eigen::VectorXd nodes(K);
    for (int m = 0; m < K; ++m)
        nodes[m] = boost::math::quantile(norm, ecdf(basis.lower + (basis.upper - basis.lower) * m / basis.order));
    nodes = enforce_increments(nodes);

    return marginal_loglik(y, projected, basis) >= marginal_loglik(y, nodes, basis) ? projected : nodes;
}

// Log-likelihood and gradient for one dataset under one spec. Design rows of
// every marker are precomputed per class; rows are grouped by class and
// missingness pattern so each group shares one sub-correlation matrix.
class Evaluator {
public:
    Evaluator(const CaseControlData& data, const ModelSpec& spec) : spec_(spec), L_(spec) {
        if (data.n_markers() != L_.J) throw std::invalid_argument("data and spec disagree on the number of markers");
        for (int d = 0; d < 2; ++d) {
            const auto rows = data.class_rows(d);
            const auto n = static_cast<Eigen::Index>(rows.size());
            n_[d] = n;
            obs_[d] = MaskMatrix(n, L_.J);
            a_[d].assign(static_cast<std::size_t>(L_.J), Eigen::MatrixXd::Zero(n, L_.K));
            da_[d].assign(static_cast<std::size_t>(L_.J), Eigen::MatrixXd::Zero(n, L_.K));
            std::map<std::uint64_t, Group> by_pattern;
            Eigen::VectorXd ra(L_.K), rda(L_.K);
            for (Eigen::Index r = 0; r < n; ++r) {
                const Eigen::Index i = rows[static_cast<std::size_t>(r)];
                for (int j = 0; j < L_.J; ++j) {
                    obs_[d](r, j) = data.observed(i, j);
                    if (!data.observed(i, j)) continue;
                    spec.basis(j).design(data.values(i, j), ra, rda);
                    a_[d][static_cast<std::size_t>(j)].row(r) = ra.transpose();
                    da_[d][static_cast<std::size_t>(j)].row(r) = rda.transpose();
                }
                const std::uint64_t p = row_pattern(data.observed, i);
                auto& g = by_pattern[p];
                if (g.rows.empty()) {
                    g.d = d;
                    g.cols = pattern_columns(p, L_.J);
                }
                g.rows.push_back(r);
            }
            for (auto& kv : by_pattern) groups_.push_back(std::move(kv.second));
        }
    }

    double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
        const int J = L_.J, K = L_.K;
        const int T = L_.n_theta_sets();
        std::vector<Eigen::VectorXd> theta(static_cast<std::size_t>(T * J));
        for (int t = 0; t < T; ++t)
            for (int j = 0; j < J; ++j)
                theta[static_cast<std::size_t>(t * J + j)] = monotone_reparam(x.segment(L_.theta(t, j), K)).values();
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(J), gamma = Eigen::VectorXd::Zero(J);
        if (L_.has_delta) delta = x.segment(L_.delta(), J);
        if (L_.has_gamma) gamma = x.segment(L_.gamma(), J);
        std::vector<CorrelationParam> corr;
        for (int s = 0; s < L_.n_scopes; ++s) corr.emplace_back(x.segment(L_.lambda(s), n_lambda(J)), J);

        std::vector<Eigen::VectorXd> gtheta;
        Eigen::VectorXd gdelta, ggamma;
        std::vector<Eigen::MatrixXd> gsig;
        if (grad) {
            gtheta.assign(static_cast<std::size_t>(T * J), Eigen::VectorXd::Zero(K));
            gdelta = Eigen::VectorXd::Zero(J);
            ggamma = Eigen::VectorXd::Zero(J);
            gsig.assign(static_cast<std::size_t>(L_.n_scopes), Eigen::MatrixXd::Zero(J, J));
        }

        double ll = 0.0;
        for (int d = 0; d < 2; ++d) {
            const Eigen::Index n = n_[d];
            if (n == 0) continue;
            const int t = L_.free ? d : 0;
            const int scope = L_.n_scopes == 1 ? 0 : d;
            Eigen::MatrixXd z(n, J), hp(n, J);
            Eigen::VectorXd scale(J);
            for (int j = 0; j < J; ++j) {
                const auto& th = theta[static_cast<std::size_t>(t * J + j)];
                const double s = d == 1 ? std::exp(-gamma[j]) : 1.0;
                scale[j] = s;
                z.col(j) = (a_[d][static_cast<std::size_t>(j)] * th).array() - delta[j] * d;
                z.col(j) *= s;
                hp.col(j) = da_[d][static_cast<std::size_t>(j)] * th;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (!obs_[d](r, j)) continue;
                    if (!(hp(r, j) > 0.0)) return -std::numeric_limits<double>::infinity();
                    ll += std::log(hp(r, j)) - (d == 1 ? gamma[j] : 0.0);
                }
            }

            Eigen::MatrixXd gz;
            if (grad) gz = Eigen::MatrixXd::Zero(n, J);
            const Eigen::MatrixXd& sigma = corr[static_cast<std::size_t>(scope)].sigma();
            for (const auto& g : groups_) {
                if (g.d != d) continue;
                const auto k = static_cast<Eigen::Index>(g.cols.size());
                const auto ng = static_cast<Eigen::Index>(g.rows.size());
                Eigen::MatrixXd sub(k, k);
                for (Eigen::Index a = 0; a < k; ++a)
                    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = sigma(g.cols[a], g.cols[b]);
                Eigen::LLT<Eigen::MatrixXd> llt(sub);
                if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
                const Eigen::MatrixXd omega = llt.solve(Eigen::MatrixXd::Identity(k, k));
                const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
                Eigen::MatrixXd zg(ng, k);
                for (Eigen::Index r = 0; r < ng; ++r)
                    for (Eigen::Index a = 0; a < k; ++a) zg(r, a) = z(g.rows[static_cast<std::size_t>(r)], g.cols[a]);
                const Eigen::MatrixXd zo = zg * omega;
                ll += -0.5 * static_cast<double>(ng) * (static_cast<double>(k) * kLog2Pi + logdet) -
                      0.5 * zo.cwiseProduct(zg).sum();
                if (grad) {
                    for (Eigen::Index r = 0; r < ng; ++r)
                        for (Eigen::Index a = 0; a < k; ++a) gz(g.rows[static_cast<std::size_t>(r)], g.cols[a]) = -zo(r, a);
                    const Eigen::MatrixXd ss = zg.transpose() * zg;
                    const Eigen::MatrixXd gs = 0.5 * (omega * ss * omega - static_cast<double>(ng) * omega);
                    auto& acc = gsig[static_cast<std::size_t>(scope)];
                    for (Eigen::Index a = 0; a < k; ++a)
                        for (Eigen::Index b = 0; b < k; ++b) acc(g.cols[a], g.cols[b]) += gs(a, b);
                }
            }

            if (grad) {
                for (int j = 0; j < J; ++j) {
                    Eigen::VectorXd w = gz.col(j) * scale[j];
                    Eigen::VectorXd v(n);
                    for (Eigen::Index r = 0; r < n; ++r) v[r] = obs_[d](r, j) ? 1.0 / hp(r, j) : 0.0;
                    gtheta[static_cast<std::size_t>(t * J + j)] += a_[d][static_cast<std::size_t>(j)].transpose() * w +
                                                                   da_[d][static_cast<std::size_t>(j)].transpose() * v;
                    if (d == 1) {
                        gdelta[j] -= w.sum();
                        double gg = 0.0;
                        for (Eigen::Index r = 0; r < n; ++r)
                            if (obs_[d](r, j)) gg += -gz(r, j) * z(r, j) - 1.0;
                        ggamma[j] += gg;
                    }
                }
            }
        }

        if (grad) {
            grad->setZero(L_.size());
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < J; ++j)
                    chain_reparam(x.segment(L_.theta(t, j), K), gtheta[static_cast<std::size_t>(t * J + j)],
                                  grad->segment(L_.theta(t, j), K));
            if (L_.has_delta) grad->segment(L_.delta(), J) = gdelta;
            if (L_.has_gamma) grad->segment(L_.gamma(), J) = ggamma;
            for (int s = 0; s < L_.n_scopes; ++s)
                for (Eigen::Index k = 0; k < n_lambda(J); ++k)
                    (*grad)[L_.lambda(s) + k] =
                        gsig[static_cast<std::size_t>(s)].cwiseProduct(corr[static_cast<std::size_t>(s)].sigma_derivative(k)).sum();
        }
        return ll;
    }

private:
    struct Group {
        int d = 0;
        std::vector<int> cols;
        std::vector<Eigen::Index> rows;
    };

    const ModelSpec& spec_;
    Layout L_;
    std::array<Eigen::Index, 2> n_{};
    std::array<MaskMatrix, 2> obs_;
    std::array<std::vector<Eigen::MatrixXd>, 2> a_, da_;
    std::vector<Group> groups_;
};

void check_data(const CaseControlData& data, const ModelSpec& spec) {
    const int J = data.n_markers();
    for (int d = 0; d < 2; ++d) {
        if (data.count(d) < J + 2)
            throw InsufficientData("class " + std::to_string(d) + " has " + std::to_string(data.count(d)) +
                                   " rows; at least " + std::to_string(J + 2) + " are required");
        for (int j = 0; j < J; ++j) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
                if (data.disease[static_cast<std::size_t>(i)] != d || !data.observed(i, j)) continue;
                lo = std::min(lo, data.values(i, j));
                hi = std::max(hi, data.values(i, j));
                ++cnt;
            }
            if (cnt == 0 && !spec.shared_transform())
                throw InsufficientData("marker " + data.marker_names[static_cast<std::size_t>(j)] +
                                       " is never observed in class " + std::to_string(d));
            if (cnt > 1 && lo == hi)
                throw DegenerateData("marker " + data.marker_names[static_cast<std::size_t>(j)] +
                                     " is constant in class " + std::to_string(d));
        }
    }
}

} // namespace

BernsteinBasis ModelSpec::basis(int j) const {
    const auto& b = bounds[static_cast<std::size_t>(j)];
    return BernsteinBasis(order, b.first, b.second);
}

void ModelSpec::validate() const {
    if (order < 1 || order > 20) throw std::invalid_argument("Bernstein order must lie in 1..20");
    if (bounds.empty()) throw std::invalid_argument("model spec has no marker bounds");
    if (bounds.size() > 63) throw std::invalid_argument("at most 63 markers are supported");
    for (const auto& b : bounds)
        if (!(std::isfinite(b.first) && std::isfinite(b.second) && b.second > b.first))
            throw std::invalid_argument("marker bounds require finite lower < upper");
}

std::string family_name(MarginalFamily f) {
    switch (f) {
    case MarginalFamily::Free: return "free";
    case MarginalFamily::Location: return "loc";
    case MarginalFamily::LocationScale: return "locscale";
    }
    return "";
}

std::string scope_name(CorrelationScope s) { return s == CorrelationScope::Global ? "global" : "per-disease"; }

MarginalFamily parse_family(const std::string& s) {
    if (s == "free") return MarginalFamily::Free;
    if (s == "loc" || s == "location") return MarginalFamily::Location;
    if (s == "locscale" || s == "location-scale") return MarginalFamily::LocationScale;
    throw ParseError("unknown marginal family '" + s + "'");
}

CorrelationScope parse_scope(const std::string& s) {
    if (s == "global") return CorrelationScope::Global;
    if (s == "per-disease") return CorrelationScope::PerDisease;
    throw ParseError("unknown correlation scope '" + s + "'");
}

std::string variant_name(const ModelSpec& spec) {
    std::string base = spec.family == MarginalFamily::Free       ? "sTDA"
                       : spec.family == MarginalFamily::Location ? "lTDA"
                                                                 : "lsTDA";
    return spec.scope == CorrelationScope::PerDisease ? base + "_d" : base;
}

ModelSpec spec_from_variant(const std::string& name, int order) {
    ModelSpec spec;
    spec.order = order;
    std::string base = name;
    if (base.size() > 2 && base.substr(base.size() - 2) == "_d") {
        spec.scope = CorrelationScope::PerDisease;
        base = base.substr(0, base.size() - 2);
    }
    if (base == "sTDA") spec.family = MarginalFamily::Free;
    else if (base == "lTDA" || base == "TDA") spec.family = MarginalFamily::Location;
    else if (base == "lsTDA") spec.family = MarginalFamily::LocationScale;
    else throw ParseError("unknown model variant '" + name + "'");
    return spec;
}

std::vector<std::pair<double, double>> default_bounds(const CaseControlData& data) {
    std::vector<std::pair<double, double>> out;
    for (int j = 0; j < data.n_markers(); ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
            if (!data.observed(i, j)) continue;
            lo = std::min(lo, data.values(i, j));
            hi = std::max(hi, data.values(i, j));
        }
        if (!std::isfinite(lo)) throw InsufficientData("marker " + data.marker_names[static_cast<std::size_t>(j)] + " is never observed");
        if (!(hi > lo)) throw DegenerateData("marker " + data.marker_names[static_cast<std::size_t>(j)] + " is constant");
        const double pad = 0.1 * (hi - lo);
        out.emplace_back(lo - pad, hi + pad);
    }
    return out;
}

Eigen::Index n_parameters(const ModelSpec& spec) { return Layout(spec).size(); }

TransformValue FittedTda::transform(int d, int j, double y) const {
    const auto& c = coeffs[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)];
    TransformValue v = transform_eval(y, c, spec.basis(j));
    if (d == 1 && spec.shared_transform()) {
        const double s = std::exp(-gamma[j]);
        v.h = (v.h - delta[j]) * s;
        v.hprime *= s;
    }
    return v;
}

double FittedTda::inverse_transform(int d, int j, double z) const {
    const auto& c = coeffs[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)];
    if (d == 1 && spec.shared_transform()) z = z * std::exp(gamma[j]) + delta[j];
    return transform_inverse(z, c, spec.basis(j));
}

Eigen::VectorXd encode(const FittedTda& model) {
    const Layout L(model.spec);
    Eigen::VectorXd x(L.size());
    for (int t = 0; t < L.n_theta_sets(); ++t)
        for (int j = 0; j < L.J; ++j)
            x.segment(L.theta(t, j), L.K) = inverse_reparam(model.coeffs[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]);
    if (L.has_delta) x.segment(L.delta(), L.J) = model.delta;
    if (L.has_gamma) x.segment(L.gamma(), L.J) = model.gamma;
    for (int s = 0; s < L.n_scopes; ++s) x.segment(L.lambda(s), n_lambda(L.J)) = model.corr[static_cast<std::size_t>(s)].lambda();
    return x;
}

FittedTda decode(const Eigen::VectorXd& params, const ModelSpec& spec) {
    const Layout L(spec);
    if (params.size() != L.size()) throw std::invalid_argument("parameter vector has the wrong length");
    FittedTda m;
    m.spec = spec;
    for (int t = 0; t < L.n_theta_sets(); ++t)
        for (int j = 0; j < L.J; ++j)
            m.coeffs[static_cast<std::size_t>(t)].push_back(monotone_reparam(params.segment(L.theta(t, j), L.K)));
    if (!L.free) m.coeffs[1] = m.coeffs[0];
    m.delta = L.has_delta ? Eigen::VectorXd(params.segment(L.delta(), L.J)) : Eigen::VectorXd::Zero(L.J);
    m.gamma = L.has_gamma ? Eigen::VectorXd(params.segment(L.gamma(), L.J)) : Eigen::VectorXd::Zero(L.J);
    for (int s = 0; s < L.n_scopes; ++s) m.corr.emplace_back(params.segment(L.lambda(s), n_lambda(L.J)), L.J);
    m.n_params = L.size();
    for (int j = 0; j < L.J; ++j) m.marker_names.push_back("Y" + std::to_string(j + 1));
    return m;
}

double log_likelihood(const Eigen::VectorXd& params, const CaseControlData& data, const ModelSpec& spec) {
    return Evaluator(data, spec)(params, nullptr);
}

double log_likelihood(const Eigen::VectorXd& params, const CaseControlData& data, const ModelSpec& spec,
                      Eigen::VectorXd& grad) {
    return Evaluator(data, spec)(params, &grad);
}

double log_density(const FittedTda& model, int d, const Eigen::VectorXd& y) {
    std::vector<int> cols;
    for (Eigen::Index j = 0; j < y.size(); ++j)
        if (!std::isnan(y[j])) cols.push_back(static_cast<int>(j));
    if (cols.empty()) throw AllMissing("all markers are missing");
    const auto k = static_cast<Eigen::Index>(cols.size());
    Eigen::VectorXd z(k);
    double logjac = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
        const auto v = model.transform(d, cols[a], y[cols[a]]);
        if (!(v.hprime > 0.0)) return -std::numeric_limits<double>::infinity();
        z[a] = v.h;
        logjac += std::log(v.hprime);
    }
    const auto& sigma = model.sigma(d);
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = sigma(cols[a], cols[b]);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    const Eigen::VectorXd w = llt.matrixL().solve(z);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(k) * kLog2Pi + logdet + w.squaredNorm()) + logjac;
}

Eigen::VectorXd initial_parameters(const CaseControlData& data, const ModelSpec& spec) {
    const Layout L(spec);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(L.size());
    for (int t = 0; t < L.n_theta_sets(); ++t) {
        for (int j = 0; j < L.J; ++j) {
            std::vector<double> y;
            for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
                if (!data.observed(i, j)) continue;
                if (L.free && data.disease[static_cast<std::size_t>(i)] != t) continue;
                y.push_back(data.values(i, j));
            }
            const Eigen::VectorXd theta = init_theta(std::move(y), spec.basis(j));
            x.segment(L.theta(t, j), L.K) = inverse_reparam(MonotoneCoeffs(theta));
        }
    }
    return x;
}

FittedTda fit(const CaseControlData& data, ModelSpec spec, const FitOptions& opts) {
    data.validate();
    if (spec.bounds.empty()) spec.bounds = default_bounds(data);
    spec.validate();
    if (spec.n_markers() != data.n_markers())
        throw std::invalid_argument("spec has " + std::to_string(spec.n_markers()) + " markers, data has " +
                                    std::to_string(data.n_markers()));
    check_data(data, spec);

    const Evaluator ev(data, spec);
    const double n = static_cast<double>(data.n_rows());
    Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double ll = ev(x, &g);
        if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
        g /= -n;
        return -ll / n;
    };
    const BfgsResult res = minimize_bfgs(obj, initial_parameters(data, spec), opts.bfgs);
    if (!std::isfinite(res.f)) throw NumericalFailure("fit: log-likelihood is not finite at the starting values");
    FittedTda model = decode(res.x, spec);
    model.marker_names = data.marker_names;
    model.loglik = -res.f * n;
    model.converged = res.converged;
    model.iterations = res.iterations;
    model.grad_norm = res.grad.lpNorm<Eigen::Infinity>();
    return model;
}

double marginal_cdf(const FittedTda& model, int d, int j, double y) {
    const double h = model.transform(d, j, y).h;
    return boost::math::cdf(boost::math::normal(), std::clamp(h, -40.0, 40.0));
}

Eigen::MatrixXd sample_class(const FittedTda& model, int d, Eigen::Index n, Rng& rng) {
    const int J = model.n_markers();
    const Eigen::MatrixXd chol = model.sigma(d).llt().matrixL();
    std::vector<BernsteinBasis> bases;
    for (int j = 0; j < J; ++j) bases.push_back(model.spec.basis(j));
    std::vector<TransformInverter> inv;
    for (int j = 0; j < J; ++j)
        inv.emplace_back(model.coeffs[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)], bases[static_cast<std::size_t>(j)]);
    const bool shifted = d == 1 && model.spec.shared_transform();
    const Eigen::VectorXd scale = model.gamma.array().exp();
    Eigen::MatrixXd out(n, J);
    Eigen::VectorXd e(J), z(J);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < J; ++j) e[j] = std_normal(rng);
        z.noalias() = chol * e;
        for (int j = 0; j < J; ++j) {
            const double h = shifted ? z[j] * scale[j] + model.delta[j] : z[j];
            out(i, j) = inv[static_cast<std::size_t>(j)](h);
        }
    }
    return out;
}

CaseControlData simulate(const FittedTda& model, Eigen::Index n0, Eigen::Index n1, Rng& rng) {
    const int J = model.n_markers();
    Eigen::MatrixXd values(n0 + n1, J);
    values.topRows(n0) = sample_class(model, 0, n0, rng);
    values.bottomRows(n1) = sample_class(model, 1, n1, rng);
    std::vector<int> disease(static_cast<std::size_t>(n0 + n1), 0);
    std::fill(disease.begin() + n0, disease.end(), 1);
    return CaseControlData(std::move(values), std::move(disease), model.marker_names);
}

} // namespace tda
