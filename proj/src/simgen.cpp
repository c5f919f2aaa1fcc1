#include "tda/simgen.hpp"

#include "tda/baselines.hpp"
#include "tda/error.hpp"
#include "tda/model.hpp"
#include "tda/score.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tda {

namespace scenario_params {

Eigen::MatrixXd sigma_a() {
    Eigen::MatrixXd s(4, 4);
    s << 1.00, 0.17, 0.36, 0.32, 0.17, 1.00, 0.41, 0.45, 0.36, 0.41, 1.00, 0.82, 0.32, 0.45, 0.82, 1.00;
    return s;
}

Eigen::VectorXd mu1_a() {
    Eigen::VectorXd m(4);
    m << -0.2, 0.3, 0.7, -0.1;
    return m;
}

Eigen::MatrixXd sigma0_c() {
    Eigen::MatrixXd s(4, 4);
    s << 1.00, 0.05, 0.24, 0.10, 0.05, 1.00, 0.23, 0.35, 0.24, 0.23, 1.00, 0.62, 0.10, 0.35, 0.62, 1.00;
    return s;
}

Eigen::MatrixXd sigma1_c() {
    Eigen::MatrixXd s(4, 4);
    s << 1.00, 0.17, 0.33, 0.31, 0.17, 1.00, 0.41, 0.40, 0.33, 0.41, 1.00, 0.92, 0.31, 0.40, 0.92, 1.00;
    return s;
}

Eigen::VectorXd e_beta() {
    Eigen::VectorXd b(4);
    b << 0.5, -0.6, 1.1, 0.4;
    return b;
}

} // namespace scenario_params

namespace {

constexpr int kDim = 4;
constexpr double kLog2Pi = 1.8378770664093454836;
const boost::math::normal kNorm;

// Mixed skewed marginals of scenario B(ii), one per class and marker.
struct SkewedMarginal {
    int d;
    int j;

    template <class F>
    auto visit(F&& f) const {
        switch (j) {
        case 0: return f(boost::math::normal(d ? 1.1 : 0.6, 1.0));
        case 1: return f(boost::math::chi_squared(d ? 3.0 : 2.5));
        case 2: return f(boost::math::exponential(d ? 1.7 : 1.0));
        default: return f(boost::math::gamma_distribution<>(d ? 2.0 : 1.2, 1.0));
        }
    }

    // Quantile at Phi(z), accurate in both tails.
    double from_normal(double z) const {
        return visit([z](const auto& dist) {
            if (z <= 0.0) return boost::math::quantile(dist, boost::math::cdf(kNorm, z));
            return boost::math::quantile(boost::math::complement(dist, boost::math::cdf(boost::math::complement(kNorm, z))));
        });
    }

    // Phi^-1(F(y)) and log f(y).
    void to_normal(double y, double& z, double& logpdf) const {
        visit([&](const auto& dist) {
            const double p = boost::math::pdf(dist, y);
            logpdf = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
            const double c = boost::math::cdf(dist, y);
            if (c <= 0.5) z = c > 0.0 ? boost::math::quantile(kNorm, c) : -40.0;
            else {
                const double q = boost::math::cdf(boost::math::complement(dist, y));
                z = q > 0.0 ? -boost::math::quantile(kNorm, q) : 40.0;
            }
            return 0;
        });
    }
};

Eigen::MatrixXd gaussian_rows(const Eigen::MatrixXd& sigma, Eigen::Index n, Rng& rng) {
    const Eigen::MatrixXd l = sigma.llt().matrixL();
    Eigen::MatrixXd z(n, sigma.rows());
    Eigen::VectorXd e(sigma.rows());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = std_normal(rng);
        z.row(i) = (l * e).transpose();
    }
    return z;
}

Eigen::MatrixXd skewed_rows(const Eigen::MatrixXd& sigma, int d, Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd z = gaussian_rows(sigma, n, rng);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < kDim; ++j) z(i, j) = SkewedMarginal{d, j}.from_normal(z(i, j));
    return z;
}

Eigen::MatrixXd class_rows(Scenario s, int d, Eigen::Index n, Rng& rng) {
    using namespace scenario_params;
    const Eigen::VectorXd mu = d ? mu1_a() : Eigen::VectorXd::Zero(kDim);
    switch (s) {
    case Scenario::A: return gaussian_rows(sigma_a(), n, rng).rowwise() + mu.transpose();
    case Scenario::B1: return (gaussian_rows(sigma_a(), n, rng).rowwise() + mu.transpose()).array().exp();
    case Scenario::B2: return skewed_rows(sigma_a(), d, n, rng);
    case Scenario::C_normal: return gaussian_rows(d ? sigma1_c() : sigma0_c(), n, rng).rowwise() + mu.transpose();
    case Scenario::C_skewed: return skewed_rows(d ? sigma1_c() : sigma0_c(), d, n, rng);
    case Scenario::D_clayton: {
        Eigen::MatrixXd u = sample_clayton(clayton_theta, kDim, n, rng);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < kDim; ++j) u(i, j) = mu[j] + boost::math::quantile(kNorm, u(i, j));
        return u;
    }
    case Scenario::D_gumbel: {
        Eigen::MatrixXd upper;
        Eigen::MatrixXd u = sample_gumbel(gumbel_theta, kDim, n, rng, &upper);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < kDim; ++j)
                u(i, j) = mu[j] + (u(i, j) < 0.5 ? boost::math::quantile(kNorm, u(i, j))
                                                 : boost::math::quantile(boost::math::complement(kNorm, upper(i, j))));
        return u;
    }
    default: break;
    }
    throw std::invalid_argument("class_rows: scenario has no class-conditional law");
}

double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const Eigen::VectorXd w = llt.matrixL().solve(x);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + logdet + w.squaredNorm());
}

// log copula density of a Gaussian copula at normal scores z.
double gaussian_copula_log_density(const Eigen::VectorXd& z, const Eigen::MatrixXd& sigma) {
    return gaussian_logpdf(z, sigma) + 0.5 * (static_cast<double>(z.size()) * kLog2Pi + z.squaredNorm());
}

double skewed_log_density(const Eigen::VectorXd& y, int d, const Eigen::MatrixXd& sigma) {
    Eigen::VectorXd z(kDim);
    double lp = 0.0;
    for (int j = 0; j < kDim; ++j) {
        double lj;
        SkewedMarginal{d, j}.to_normal(y[j], z[j], lj);
        lp += lj;
    }
    return gaussian_copula_log_density(z, sigma) + lp;
}

double archimedean_log_density(Scenario s, const Eigen::VectorXd& y, int d) {
    const Eigen::VectorXd mu = d ? scenario_params::mu1_a() : Eigen::VectorXd::Zero(kDim);
    Eigen::VectorXd u(kDim);
    double lp = 0.0;
    for (int j = 0; j < kDim; ++j) {
        const double x = y[j] - mu[j];
        u[j] = boost::math::cdf(kNorm, x);
        lp += -0.5 * (kLog2Pi + x * x);
    }
    const double lc = s == Scenario::D_clayton ? clayton_log_density(scenario_params::clayton_theta, u)
                                               : gumbel_log_density(scenario_params::gumbel_theta, u);
    return lc + lp;
}

bool is_logistic(Scenario s) { return s == Scenario::E_linear || s == Scenario::E_interaction; }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    Rng rng = make_rng(seed, (a << 32) ^ b);
    return rng();
}

double quantile_sorted(const std::vector<double>& v, double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double auc_ignoring_nan(const Eigen::VectorXd& scores, const std::vector<int>& disease) {
    std::vector<double> s0, s1;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) continue;
        (disease[static_cast<std::size_t>(i)] ? s1 : s0).push_back(scores[i]);
    }
    return empirical_auc(s0, s1);
}

// Complete rows as a matrix and NaN-scored positions for the others.
template <class Score>
Eigen::VectorXd score_complete(const CaseControlData& test, Score&& score) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(test.n_rows(), std::numeric_limits<double>::quiet_NaN());
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < test.n_rows(); ++i)
        if (test.observed.row(i).all()) idx.push_back(i);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(idx.size()), test.n_markers());
    for (std::size_t r = 0; r < idx.size(); ++r) y.row(static_cast<Eigen::Index>(r)) = test.values.row(idx[r]);
    const Eigen::VectorXd s = score(y);
    for (std::size_t r = 0; r < idx.size(); ++r) out[idx[r]] = s[static_cast<Eigen::Index>(r)];
    return out;
}

} // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
    case Scenario::A: return "A";
    case Scenario::B1: return "B1";
    case Scenario::B2: return "B2";
    case Scenario::C_normal: return "C_normal";
    case Scenario::C_skewed: return "C_skewed";
    case Scenario::D_clayton: return "D_clayton";
    case Scenario::D_gumbel: return "D_gumbel";
    case Scenario::E_linear: return "E_linear";
    case Scenario::E_interaction: return "E_interaction";
    }
    return "";
}

std::vector<Scenario> all_scenarios() {
    return {Scenario::A,         Scenario::B1,       Scenario::B2,       Scenario::C_normal,     Scenario::C_skewed,
            Scenario::D_clayton, Scenario::D_gumbel, Scenario::E_linear, Scenario::E_interaction};
}

Scenario parse_scenario(const std::string& s) {
    for (Scenario sc : all_scenarios())
        if (scenario_name(sc) == s) return sc;
    throw ParseError("unknown scenario '" + s + "'");
}

Eigen::MatrixXd sample_clayton(double theta, int dim, Eigen::Index n, Rng& rng) {
    if (!(theta > 0.0)) throw std::invalid_argument("Clayton theta must be positive");
    std::gamma_distribution<double> frailty(1.0 / theta, 1.0);
    std::exponential_distribution<double> expo(1.0);
    Eigen::MatrixXd u(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = frailty(rng);
        for (int j = 0; j < dim; ++j) u(i, j) = std::pow(1.0 + expo(rng) / v, -1.0 / theta);
    }
    return u;
}

Eigen::MatrixXd sample_gumbel(double theta, int dim, Eigen::Index n, Rng& rng, Eigen::MatrixXd* upper) {
    if (!(theta >= 1.0)) throw std::invalid_argument("Gumbel theta must be >= 1");
    const double alpha = 1.0 / theta;
    constexpr double pi = 3.14159265358979323846;
    std::exponential_distribution<double> expo(1.0);
    Eigen::MatrixXd u(n, dim);
    if (upper) upper->resize(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        // Kanter's representation of the positive stable law exp(-t^alpha)
        const double th = pi * open_uniform(rng);
        const double w = expo(rng);
        const double v = alpha == 1.0 ? 1.0
                                      : std::sin(alpha * th) / std::pow(std::sin(th), 1.0 / alpha) *
                                            std::pow(std::sin((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha);
        for (int j = 0; j < dim; ++j) {
            const double s = std::pow(expo(rng) / v, alpha);
            u(i, j) = std::exp(-s);
            if (upper) (*upper)(i, j) = -std::expm1(-s);
        }
    }
    return u;
}

double clayton_log_density(double theta, const Eigen::VectorXd& u) {
    const auto d = static_cast<double>(u.size());
    double out = 0.0, sum = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        out += std::log1p(static_cast<double>(k) * theta);
        out += (-theta - 1.0) * std::log(u[k]);
        sum += std::pow(u[k], -theta);
    }
    return out + (-1.0 / theta - d) * std::log(sum - d + 1.0);
}

double gumbel_log_density(double theta, const Eigen::VectorXd& u) {
    const double alpha = 1.0 / theta;
    const auto n = static_cast<int>(u.size());
    double s = 0.0, logjac = 0.0;
    for (int j = 0; j < n; ++j) {
        const double t = -std::log(u[j]);
        s += std::pow(t, theta);
        logjac += std::log(theta) + (theta - 1.0) * std::log(t) - std::log(u[j]);
    }
    // psi(s) = exp(g(s)), g = -s^alpha; r_k = psi^(k) / psi
    std::vector<double> g(static_cast<std::size_t>(n + 1));
    double falling = 1.0;
    for (int m = 1; m <= n; ++m) {
        falling *= alpha - (m - 1);
        g[static_cast<std::size_t>(m)] = -falling * std::pow(s, alpha - m);
    }
    std::vector<double> r(static_cast<std::size_t>(n + 1), 0.0);
    r[0] = 1.0;
    for (int m = 1; m <= n; ++m) {
        double binom = 1.0;
        for (int k = 0; k <= m - 1; ++k) {
            r[static_cast<std::size_t>(m)] += binom * g[static_cast<std::size_t>(k + 1)] * r[static_cast<std::size_t>(m - 1 - k)];
            binom = binom * (m - 1 - k) / (k + 1);
        }
    }
    return std::log(std::abs(r[static_cast<std::size_t>(n)])) - std::pow(s, alpha) + logjac;
}

CaseControlData generate(Scenario scenario, Eigen::Index n0, Eigen::Index n1, std::uint64_t seed) {
    if (n0 < 0 || n1 < 0 || n0 + n1 < 1) throw std::invalid_argument("generate: counts must be nonnegative with a positive total");
    std::vector<std::string> names{"Y1", "Y2", "Y3", "Y4"};
    if (is_logistic(scenario)) {
        Rng rng = make_rng(seed, 0);
        const Eigen::Index n = n0 + n1;
        Eigen::MatrixXd y(n, kDim);
        std::vector<int> disease(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int j = 0; j < kDim; ++j) y(i, j) = std_normal(rng);
            const double eta = true_log_lr(scenario, y.row(i).transpose());
            disease[static_cast<std::size_t>(i)] = open_uniform(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
        }
        return CaseControlData(std::move(y), std::move(disease), names);
    }
    Rng r0 = make_rng(seed, 0), r1 = make_rng(seed, 1);
    Eigen::MatrixXd y(n0 + n1, kDim);
    y.topRows(n0) = class_rows(scenario, 0, n0, r0);
    y.bottomRows(n1) = class_rows(scenario, 1, n1, r1);
    std::vector<int> disease(static_cast<std::size_t>(n0 + n1), 0);
    std::fill(disease.begin() + n0, disease.end(), 1);
    return CaseControlData(std::move(y), std::move(disease), names);
}

double true_log_lr(Scenario scenario, const Eigen::VectorXd& y) {
    using namespace scenario_params;
    switch (scenario) {
    case Scenario::A:
    case Scenario::B1: {
        const Eigen::VectorXd x = scenario == Scenario::B1 ? Eigen::VectorXd(y.array().log()) : y;
        const Eigen::VectorXd m = mu1_a();
        const Eigen::VectorXd pm = sigma_a().llt().solve(m);
        return pm.dot(x) - 0.5 * pm.dot(m);
    }
    case Scenario::B2: return skewed_log_density(y, 1, sigma_a()) - skewed_log_density(y, 0, sigma_a());
    case Scenario::C_normal: return gaussian_logpdf(y - mu1_a(), sigma1_c()) - gaussian_logpdf(y, sigma0_c());
    case Scenario::C_skewed: return skewed_log_density(y, 1, sigma1_c()) - skewed_log_density(y, 0, sigma0_c());
    case Scenario::D_clayton:
    case Scenario::D_gumbel: return archimedean_log_density(scenario, y, 1) - archimedean_log_density(scenario, y, 0);
    case Scenario::E_linear: return e_beta0 + e_beta().dot(y);
    case Scenario::E_interaction:
        return -0.5 + 1.2 * y[0] - 0.8 * y[1] + 0.6 * y[2] * y[2] - 0.4 * y[3] * y[3] + 0.7 * y[0] * y[1] -
               0.5 * y[2] * y[3];
    }
    return 0.0;
}

double true_optimal_auc(Scenario scenario, Eigen::Index n, std::uint64_t seed) {
    const CaseControlData data = is_logistic(scenario) ? generate(scenario, n / 2, n - n / 2, seed)
                                                       : generate(scenario, n, n, seed);
    Eigen::VectorXd s(data.n_rows());
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) s[i] = true_log_lr(scenario, data.values.row(i).transpose());
    return empirical_auc(s, data.disease);
}

double scenario_a_closed_form_auc() {
    const Eigen::VectorXd m = scenario_params::mu1_a();
    const double q = m.dot(scenario_params::sigma_a().llt().solve(m));
    return boost::math::cdf(kNorm, std::sqrt(q / 2.0));
}

Method make_method(const std::string& name, int order) {
    if (name == "lda")
        return {name, [](const CaseControlData& train, const CaseControlData& test) {
                    const LdaModel m = lda_fit(train);
                    return score_complete(test, [&](const Eigen::MatrixXd& y) { return lda_score(m, y); });
                }};
    if (name == "qda")
        return {name, [](const CaseControlData& train, const CaseControlData& test) {
                    const QdaModel m = qda_fit(train);
                    return score_complete(test, [&](const Eigen::MatrixXd& y) { return qda_score(m, y); });
                }};
    if (name == "logistic")
        return {name, [](const CaseControlData& train, const CaseControlData& test) {
                    const LogisticModel m = logistic_fit(train);
                    return score_complete(test, [&](const Eigen::MatrixXd& y) { return logistic_score(m, y); });
                }};
    if (name == "constant")
        return {name, [](const CaseControlData&, const CaseControlData& test) {
                    return Eigen::VectorXd(Eigen::VectorXd::Zero(test.n_rows()));
                }};
    const ModelSpec spec = spec_from_variant(name, order);
    return {name, [spec](const CaseControlData& train, const CaseControlData& test) {
                const FittedTda m = fit(train, spec);
                return score_rows(m, test);
            }};
}

std::array<double, 3> HoldoutResult::quartiles(std::size_t m) const {
    std::vector<double> v;
    for (double a : auc[m])
        if (!std::isnan(a)) v.push_back(a);
    if (v.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan};
    }
    std::sort(v.begin(), v.end());
    return {quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75)};
}

HoldoutResult holdout_eval(const CaseControlData& data, const std::vector<Method>& methods, int reps,
                           std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("holdout_eval: reps must be >= 1");
    data.validate();
    HoldoutResult res;
    for (const auto& m : methods) res.methods.push_back(m.name);
    res.auc.assign(methods.size(), std::vector<double>(static_cast<std::size_t>(reps), 0.0));
    res.n_failed.assign(methods.size(), 0);
    const auto idx0 = data.class_rows(0), idx1 = data.class_rows(1);

#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
        std::vector<Eigen::Index> train, test;
        for (const auto* idx : {&idx0, &idx1}) {
            std::vector<Eigen::Index> p = *idx;
            std::shuffle(p.begin(), p.end(), rng);
            const std::size_t half = p.size() / 2;
            train.insert(train.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(half));
            test.insert(test.end(), p.begin() + static_cast<std::ptrdiff_t>(half), p.end());
        }
        const CaseControlData tr = data.rows(train), te = data.rows(test);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            double a = std::numeric_limits<double>::quiet_NaN();
            try {
                a = auc_ignoring_nan(methods[m].run(tr, te), te.disease);
            } catch (const std::exception&) {
            }
            res.auc[m][static_cast<std::size_t>(r)] = a;
        }
    }
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (double a : res.auc[m]) res.n_failed[m] += std::isnan(a) ? 1 : 0;
    return res;
}

StudyConfig parse_study_config(const std::string& text) {
    StudyConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("study config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        try {
            if (key == "scenario") c.scenario = parse_scenario(value);
            else if (key == "n") {
                c.n.clear();
                for (const auto& s : split_list(value)) c.n.push_back(std::stoll(s));
            } else if (key == "test_n") c.test_n = std::stoll(value);
            else if (key == "reps") c.reps = std::stoi(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else if (key == "order") c.order = std::stoi(value);
            else if (key == "methods") c.methods = split_list(value);
            else throw ParseError("study config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::logic_error&) {
            throw ParseError("study config line " + std::to_string(lineno) + ": bad value '" + value + "'");
        }
    }
    if (c.n.empty() || c.reps < 1 || c.test_n < 2 || c.methods.empty())
        throw ParseError("study config: n, reps, test_n and methods must be set");
    for (auto n : c.n)
        if (n < 2) throw ParseError("study config: n must be at least 2");
    return c;
}

std::vector<StudyRow> run_study(const StudyConfig& config) {
    std::vector<Method> methods;
    for (const auto& name : config.methods) methods.push_back(make_method(name, config.order));
    const std::size_t M = methods.size();
    const std::size_t R = static_cast<std::size_t>(config.reps);
    std::vector<StudyRow> rows(config.n.size() * R * M);

    for (std::size_t k = 0; k < config.n.size(); ++k) {
        const Eigen::Index n = config.n[k];
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < config.reps; ++r) {
            const CaseControlData train =
                generate(config.scenario, n / 2, n - n / 2, derived_seed(config.seed, 2 * k, static_cast<std::uint64_t>(r)));
            const CaseControlData test = generate(config.scenario, config.test_n / 2, config.test_n - config.test_n / 2,
                                                  derived_seed(config.seed, 2 * k + 1, static_cast<std::uint64_t>(r)));
            for (std::size_t m = 0; m < M; ++m) {
                double a = std::numeric_limits<double>::quiet_NaN();
                try {
                    a = auc_ignoring_nan(methods[m].run(train, test), test.disease);
                } catch (const std::exception&) {
                }
                rows[(k * R + static_cast<std::size_t>(r)) * M + m] =
                    StudyRow{scenario_name(config.scenario), methods[m].name, n, r, a};
            }
        }
    }
    return rows;
}

std::string study_to_csv(const std::vector<StudyRow>& rows) {
    std::ostringstream out;
    out << "scenario,method,N,rep,oos_auc\n";
    for (const auto& r : rows)
        out << r.scenario << ',' << r.method << ',' << r.n << ',' << r.rep << ',' << format_real(r.oos_auc) << '\n';
    return out.str();
}

std::string holdout_to_csv(const HoldoutResult& result) {
    std::ostringstream out;
    out << "method,rep,oos_auc\n";
    for (std::size_t m = 0; m < result.methods.size(); ++m)
        for (std::size_t r = 0; r < result.auc[m].size(); ++r)
            out << result.methods[m] << ',' << r << ',' << format_real(result.auc[m][r]) << '\n';
    return out.str();
}

} // namespace tda
