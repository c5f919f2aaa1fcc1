// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: tda_acceptance [criterion numbers...]   (all criteria by default)

#include "tda/assess.hpp"
#include "tda/data.hpp"
#include "tda/inference.hpp"
#include "tda/score.hpp"
#include "tda/simgen.hpp"
#include "tda/subset_opt.hpp"
#include "test_util.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

using namespace tda;

namespace {

const boost::math::normal kNorm;

enum class Status { Pass, Fail, Waived };

struct Outcome {
    Status status;
    std::string detail;
};

std::string fmt(double x, int digits = 6) {
    std::ostringstream s;
    s << std::setprecision(digits) << x;
    return s.str();
}

Outcome verdict(bool ok, const std::string& detail) { return {ok ? Status::Pass : Status::Fail, detail}; }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::VectorXd random_point(Rng& rng, int J) {
    Eigen::VectorXd y(J);
    for (int j = 0; j < J; ++j) y[j] = 2.5 * std_normal(rng);
    return y;
}

// Kolmogorov distance between the sorted (tie-free) sample s and the CDF F,
// to within `tol` from above. With s_{-1} = -inf and F(s_{-1}) = 0, on
// [s_p, s_q) the ECDF lies in [(p + 1) / n, q / n] and F in [F(s_p), F(s_q)],
// so the gap there is at most max(F(s_q) - (p + 1) / n, q / n - F(s_p)); at an
// order statistic the gap is known exactly. Starting from `points` order
// statistics, the interval with the largest upper bound is bisected until no
// bound exceeds the best exact gap by more than tol.
template <class Cdf>
double kolmogorov_bound(const std::vector<double>& s, Cdf&& cdf, int points, double tol) {
    const auto n = static_cast<double>(s.size());
    struct Interval {
        double bound;
        std::int64_t p, q;
        double fp, fq;
        bool operator<(const Interval& o) const { return bound < o.bound; }
    };
    double exact = 0.0;
    auto evaluate = [&](std::int64_t i) {
        const double f = cdf(s[static_cast<std::size_t>(i)]);
        exact = std::max({exact, std::abs(f - static_cast<double>(i + 1) / n), std::abs(f - static_cast<double>(i) / n)});
        return f;
    };
    std::priority_queue<Interval> open;
    auto push = [&](std::int64_t p, double fp, std::int64_t q, double fq) {
        open.push({std::max(fq - static_cast<double>(p + 1) / n, static_cast<double>(q) / n - fp), p, q, fp, fq});
    };
    std::int64_t p = -1;
    double fp = 0.0;
    for (int k = 1; k <= points; ++k) {
        const auto q = static_cast<std::int64_t>(k * n / points) - 1;
        const double fq = evaluate(q);
        push(p, fp, q, fq);
        p = q;
        fp = fq;
    }
    // p is the largest order statistic: the ECDF is 1 from there on
    double settled = 1.0 - fp;
    while (!open.empty() && open.top().bound > std::max(exact, settled) + tol) {
        const Interval iv = open.top();
        open.pop();
        if (iv.q - iv.p <= 1) {
            settled = std::max(settled, iv.bound);
            continue;
        }
        const std::int64_t mid = iv.p + (iv.q - iv.p) / 2;
        const double fm = evaluate(mid);
        push(iv.p, iv.fp, mid, fm);
        push(mid, fm, iv.q, iv.fq);
    }
    return std::max({exact, settled, open.empty() ? 0.0 : open.top().bound});
}

// Criterion 1: score law against 1e6 simulated log-LR scores per class.
Outcome generalized_chi_square() {
    Rng rng = make_rng(101);
    std::vector<FittedTda> models;
    for (int t = 0; t < 50; ++t) models.push_back(test::random_lstda(rng, 1 + t % 4, 3 + t % 4));
    std::vector<double> dist(2 * models.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t task = 0; task < static_cast<std::int64_t>(dist.size()); ++task) {
        const std::size_t t = static_cast<std::size_t>(task) / 2;
        const int d = static_cast<int>(task % 2);
        const FittedTda& m = models[t];
        const Scorer scorer(m);
        Rng draw = make_rng(1000 + t, static_cast<std::uint64_t>(d));
        const Eigen::MatrixXd y = sample_class(m, d, 1000000, draw);
        std::vector<double> s(static_cast<std::size_t>(y.rows()));
        Eigen::VectorXd row(y.cols());
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            row = y.row(i).transpose();
            s[static_cast<std::size_t>(i)] = scorer(row.data());
        }
        std::sort(s.begin(), s.end());
        const GChiSqParams g = score_distribution(m, d);
        dist[static_cast<std::size_t>(task)] =
            kolmogorov_bound(s, [&](double x) { return gchisq_cdf(g, x, 1e-7); }, 200, 2e-4);
    }
    const double worst = *std::max_element(dist.begin(), dist.end());
    return verdict(worst <= 0.002,
                   "max Kolmogorov distance <= " + fmt(worst) + " over 50 models x 2 classes (limit 0.002)");
}

// Criterion 2: quadratic-form log-LR against the general density ratio.
Outcome quadratic_form_identity() {
    Rng rng = make_rng(102);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const FittedTda m = test::random_lstda(rng, 1 + t % 4, 5);
        const QuadraticForm q = quadratic_form(m);
        for (int i = 0; i < 100; ++i) {
            const Eigen::VectorXd y = random_point(rng, m.n_markers());
            Eigen::VectorXd z(y.size());
            for (Eigen::Index j = 0; j < y.size(); ++j) z[j] = m.transform(0, static_cast<int>(j), y[j]).h;
            const double general = test::direct_log_density(m, 1, y) - test::direct_log_density(m, 0, y);
            worst = std::max(worst, std::abs(q.evaluate(z) - general));
        }
    }
    return verdict(worst <= 1e-8, "max |difference| " + fmt(worst) + " over 20 models x 100 points (limit 1e-8)");
}

// Criterion 3: Location/Global closed forms.
Outcome linear_closed_forms() {
    Rng rng = make_rng(103);
    double auc_err = 0.0, roc_err = 0.0;
    for (int t = 0; t < 20; ++t) {
        const FittedTda m = test::random_model(rng, 1 + t % 4, 5, MarginalFamily::Location, CorrelationScope::Global);
        const double qd = m.delta.dot(m.sigma(0).llt().solve(m.delta));
        const RocCurve roc = model_roc(m, uniform_grid(2001));
        auc_err = std::max(auc_err, std::abs(trapezoid_auc(roc.fpr, roc.tpr) - boost::math::cdf(kNorm, std::sqrt(qd / 2))));
        for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
            const double f = roc.fpr[i];
            const double expected = f <= 0.0 ? 0.0 : f >= 1.0 ? 1.0
                                                               : boost::math::cdf(kNorm, boost::math::quantile(kNorm, f) + std::sqrt(qd));
            roc_err = std::max(roc_err, std::abs(roc.tpr[i] - expected));
        }
    }
    return verdict(auc_err <= 1e-4 && roc_err <= 1e-8,
                   "max AUC error " + fmt(auc_err) + " (limit 1e-4), max ROC error " + fmt(roc_err) + " (limit 1e-8)");
}

// Criterion 4: Scenario A at N = 1e4 with an independent 1e4-row test set.
Outcome scenario_a_recovery() {
    const CaseControlData train = generate(Scenario::A, 5000, 5000, 104);
    const CaseControlData test = generate(Scenario::A, 5000, 5000, 105);
    const FittedTda m = fit(train, spec_from_variant("lTDA"));
    const double auc = empirical_auc(score_rows(m, test), test.disease);
    const double opt = scenario_a_closed_form_auc();
    return verdict(m.converged && std::abs(auc - opt) <= 0.01,
                   "lTDA OOS AUC " + fmt(auc) + " vs optimum " + fmt(opt) + (m.converged ? "" : " (fit not converged)"));
}

std::pair<double, double> study_medians(Scenario s, const std::string& a, const std::string& b, std::uint64_t seed) {
    StudyConfig c;
    c.scenario = s;
    c.n = {200};
    c.test_n = 10000;
    c.reps = 100;
    c.seed = seed;
    c.methods = {a, b};
    std::vector<double> va, vb;
    for (const auto& r : run_study(c))
        if (!std::isnan(r.oos_auc)) (r.method == a ? va : vb).push_back(r.oos_auc);
    return {median(va), median(vb)};
}

// Criterion 5: Scenario B robustness at N = 200 over 100 replications.
Outcome scenario_b_robustness() {
    const auto [t1, l1] = study_medians(Scenario::B1, "lTDA", "lda", 106);
    const auto [t2, l2] = study_medians(Scenario::B2, "lTDA", "lda", 107);
    const double opt1 = scenario_a_closed_form_auc();
    const double opt2 = true_optimal_auc(Scenario::B2, 200000, 108);
    const bool ok = std::abs(t1 - opt1) <= 0.03 && std::abs(t2 - opt2) <= 0.03 && l1 <= t1 - 0.01;
    return verdict(ok, "B1: lTDA " + fmt(t1, 4) + ", LDA " + fmt(l1, 4) + ", optimum " + fmt(opt1, 4) + "; B2: lTDA " +
                           fmt(t2, 4) + ", LDA " + fmt(l2, 4) + ", optimum " + fmt(opt2, 4));
}

// Criterion 6: disease-specific correlations on Scenario C.
Outcome scenario_c() {
    const auto [d1, g1] = study_medians(Scenario::C_normal, "lTDA_d", "lTDA", 109);
    const auto [d2, g2] = study_medians(Scenario::C_skewed, "lTDA_d", "lTDA", 110);
    return verdict(d1 >= g1 && d2 >= g2, "C_normal: lTDA_d " + fmt(d1, 4) + " vs lTDA " + fmt(g1, 4) +
                                             "; C_skewed: lTDA_d " + fmt(d2, 4) + " vs lTDA " + fmt(g2, 4));
}

// Criterion 7: subset log-LR against quadrature over the dropped marker.
Outcome missing_marker() {
    Rng rng = make_rng(111);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const FittedTda m = test::random_lstda(rng, 3);
        const Eigen::VectorXd y = random_point(rng, 3);
        const int drop = i % 3;
        std::vector<int> keep;
        for (int j = 0; j < 3; ++j)
            if (j != drop) keep.push_back(j);
        const Eigen::Vector2d ys(y[keep[0]], y[keep[1]]);
        const double quad =
            test::quadrature_marginal_log_density(m, 1, y, drop) - test::quadrature_marginal_log_density(m, 0, y, drop);
        worst = std::max(worst, std::abs(log_lr(subset_model(m, keep), ys) - quad));
    }
    return verdict(worst <= 1e-4, "max |difference| " + fmt(worst) + " over 50 points (limit 1e-4)");
}

// Gaussian data that an lsTDA model with linear transformations fits exactly:
// controls N(0, R), cases delta + exp(gamma) * N(0, R).
CaseControlData gaussian_lstda_data(const Eigen::MatrixXd& r, const Eigen::VectorXd& delta, const Eigen::VectorXd& gamma,
                                    Eigen::Index n_per_class, Rng& rng) {
    const auto J = delta.size();
    const Eigen::MatrixXd l = r.llt().matrixL();
    Eigen::MatrixXd y(2 * n_per_class, J);
    std::vector<int> d(static_cast<std::size_t>(2 * n_per_class));
    Eigen::VectorXd z(J);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        for (Eigen::Index j = 0; j < J; ++j) z[j] = std_normal(rng);
        Eigen::VectorXd x = l * z;
        const int cls = i >= n_per_class ? 1 : 0;
        if (cls) x = delta.array() + gamma.array().exp() * x.array();
        y.row(i) = x.transpose();
        d[static_cast<std::size_t>(i)] = cls;
    }
    return CaseControlData(std::move(y), std::move(d));
}

// Criterion 8: Rosenblatt calibration on model-simulated data, and power
// against a misspecified marginal.
Outcome rosenblatt_calibration() {
    Eigen::MatrixXd r(3, 3);
    r << 1.0, 0.5, 0.2, 0.5, 1.0, 0.4, 0.2, 0.4, 1.0;
    const Eigen::Vector3d delta(0.5, 1.0, -0.4), gamma(0.2, -0.1, 0.3);
    int good = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng = make_rng(112, static_cast<std::uint64_t>(rep));
        const CaseControlData data = gaussian_lstda_data(r, delta, gamma, 2500, rng);
        const FittedTda m = fit(data, spec_from_variant("lsTDA"));
        bool all = true;
        for (int d = 0; d < 2; ++d)
            for (double p : rosenblatt(m, data, d).ks_pvalue) all = all && p > 0.001;
        good += all;
    }

    std::vector<double> mis;
    std::exponential_distribution<double> expo(1.0);
    ModelSpec spec = spec_from_variant("lsTDA", 1);
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng = make_rng(113, static_cast<std::uint64_t>(rep));
        Eigen::MatrixXd y(2000, 1);
        std::vector<int> d(2000);
        for (int i = 0; i < 2000; ++i) {
            d[static_cast<std::size_t>(i)] = i % 2;
            y(i, 0) = expo(rng) * (1 + i % 2);
        }
        const CaseControlData data(y, d);
        mis.push_back(rosenblatt(fit(data, spec), data, 0).ks_pvalue[0]);
    }
    const double med = median(mis);
    return verdict(good >= 95 && med < 0.01, std::to_string(good) +
                                                 "/100 replications with every KS p > 0.001; misspecified median p " +
                                                 fmt(med));
}

// Criterion 9: percentile bootstrap coverage for delta_j.
Outcome bootstrap_coverage() {
    Eigen::MatrixXd r(2, 2);
    r << 1.0, 0.4, 0.4, 1.0;
    const Eigen::Vector2d delta(0.6, 0.9), gamma(0.2, -0.1);
    const int outer = 200;
    std::array<int, 2> cover{0, 0};
    int failed = 0;
    for (int rep = 0; rep < outer; ++rep) {
        Rng rng = make_rng(114, static_cast<std::uint64_t>(rep));
        const CaseControlData data = gaussian_lstda_data(r, delta, gamma, 250, rng);
        const FittedTda m = fit(data, spec_from_variant("lsTDA"));
        const std::vector<NamedStatistic> stats{parse_statistic("delta:1", m), parse_statistic("delta:2", m)};
        const auto res = parametric_bootstrap(m, 250, 250, 200, stats, 0.95, 115 + static_cast<std::uint64_t>(rep));
        for (int j = 0; j < 2; ++j) {
            cover[static_cast<std::size_t>(j)] += res[static_cast<std::size_t>(j)].ci_low <= delta[j] &&
                                                  delta[j] <= res[static_cast<std::size_t>(j)].ci_high;
            failed += res[static_cast<std::size_t>(j)].n_failed;
        }
    }
    const double c1 = cover[0] / static_cast<double>(outer), c2 = cover[1] / static_cast<double>(outer);
    const bool ok = c1 >= 0.90 && c1 <= 0.99 && c2 >= 0.90 && c2 <= 0.99;
    return verdict(ok, "coverage delta_1 " + fmt(c1, 3) + ", delta_2 " + fmt(c2, 3) + " over " + std::to_string(outer) +
                           " replications (" + std::to_string(failed / 2) + " failed refits excluded)");
}

// Criterion 10: subset optimizer against explicit enumeration.
Outcome subset_optimizer() {
    Rng rng = make_rng(116);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int matched = 0, full = 0;
    for (int t = 0; t < 20; ++t) {
        const int J = 6, K = 2;
        Eigen::MatrixXd g(J, J + 2);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = std_normal(rng);
        const Eigen::MatrixXd cov = g * g.transpose();
        const Eigen::VectorXd sd = cov.diagonal().array().sqrt();
        ResourceProblem p;
        p.sigma = cov.array() / (sd * sd.transpose()).array();
        p.delta = Eigen::VectorXd::NullaryExpr(J, [&] { return 2.0 * unif(rng) - 1.0; });
        p.a = Eigen::MatrixXd::NullaryExpr(K, J, [&] { return unif(rng); });
        p.b = p.a.rowwise().sum() * (0.2 + 0.5 * unif(rng));

        double best = -1.0;
        int best_mask = -1;
        for (int mask = 0; mask < (1 << J); ++mask) {
            std::vector<int> cols;
            for (int j = 0; j < J; ++j)
                if (mask >> j & 1) cols.push_back(j);
            bool feasible = true;
            for (int k = 0; k < K; ++k) {
                double use = 0.0;
                for (int j : cols) use += p.a(k, j);
                feasible = feasible && use <= p.b[k];
            }
            if (!feasible) continue;
            double auc = 0.5;
            if (!cols.empty()) {
                const auto n = static_cast<Eigen::Index>(cols.size());
                Eigen::VectorXd ds(n);
                Eigen::MatrixXd ss(n, n);
                for (Eigen::Index a = 0; a < n; ++a) {
                    ds[a] = p.delta[cols[static_cast<std::size_t>(a)]];
                    for (Eigen::Index b = 0; b < n; ++b)
                        ss(a, b) = p.sigma(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
                }
                auc = boost::math::cdf(kNorm, std::sqrt(ds.dot(ss.inverse() * ds) / 2.0));
            }
            if (auc > best) {
                best = auc;
                best_mask = mask;
            }
        }
        const SubsetResult res = optimize_subset(p);
        int mask = 0;
        for (int j : res.selected) mask |= 1 << j;
        matched += mask == best_mask && std::abs(res.auc - best) <= 1e-10;

        p.b.setConstant(1e12);
        full += optimize_subset(p).selected.size() == static_cast<std::size_t>(J);
    }
    return verdict(matched == 20 && full == 20, std::to_string(matched) + "/20 optima match enumeration; " +
                                                    std::to_string(full) + "/20 unconstrained optima are the full set");
}

// Criterion 11: published HCC results, only when the data are supplied.
Outcome hcc_reproduction() {
    const char* path = std::getenv("TDA_HCC_DATA");
    if (!path || !*path) return {Status::Waived, "TDA_HCC_DATA not set; the HCC dataset is not available"};
    const char* col = std::getenv("TDA_HCC_DISEASE_COL");
    CaseControlData data = read_csv(path, col && *col ? col : "disease");
    // markers are analysed on the log scale
    data.values = data.values.array().log();
    data = CaseControlData(data.values, data.disease, data.marker_names);
    const FittedTda m = fit(data, spec_from_variant("lsTDA"));
    const auto it = std::find(m.marker_names.begin(), m.marker_names.end(), "AFP");
    if (it == m.marker_names.end()) return {Status::Fail, "no AFP column in " + std::string(path)};
    const double afp = model_auc(subset_model(m, {static_cast<int>(it - m.marker_names.begin())}));
    const double all = model_auc(m);
    const bool signs = (m.delta.array() > 0).all() && (m.gamma.array() > 0).all();
    return verdict(std::abs(afp - 0.814) <= 0.01 && std::abs(all - 0.883) <= 0.01 && signs,
                   "AFP AUC " + fmt(afp, 4) + " (0.814), full panel AUC " + fmt(all, 4) +
                       " (0.883), location and scale terms " + (signs ? "positive" : "not all positive"));
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"generalized chi-square score law", generalized_chi_square},
        {"quadratic-form log-LR identity", quadratic_form_identity},
        {"closed-form ROC and AUC", linear_closed_forms},
        {"scenario A recovery", scenario_a_recovery},
        {"scenario B robustness", scenario_b_robustness},
        {"scenario C disease-specific correlation", scenario_c},
        {"missing-marker marginalization", missing_marker},
        {"Rosenblatt calibration", rosenblatt_calibration},
        {"bootstrap coverage", bootstrap_coverage},
        {"subset optimizer", subset_optimizer},
        {"HCC reproduction", hcc_reproduction},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty())
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

    int failures = 0;
    for (int k : selected) {
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::cerr << "unknown criterion " << k << '\n';
            return 2;
        }
        const auto& [name, run] = criteria[static_cast<std::size_t>(k - 1)];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "WAIVED";
        std::cout << "criterion " << k << " " << tag << " " << name << ": " << o.detail << " [" << fmt(secs, 3) << " s]"
                  << std::endl;
        failures += o.status == Status::Fail;
    }
    return failures ? 1 : 0;
}
