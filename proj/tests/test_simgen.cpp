#include "tda/baselines.hpp"
#include "tda/error.hpp"
#include "tda/score.hpp"
#include "tda/simgen.hpp"
#include "test_util.hpp"

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include <cmath>

using namespace tda;
namespace sp = tda::scenario_params;

namespace {

Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
    const Eigen::VectorXd s = cov.diagonal().array().sqrt();
    return cov.array() / (s * s.transpose()).array();
}

std::vector<double> column(const Eigen::MatrixXd& x, int j) {
    return std::vector<double>(x.col(j).data(), x.col(j).data() + x.rows());
}

double clayton_cdf(double t, const Eigen::VectorXd& u) {
    double s = 1.0 - static_cast<double>(u.size());
    for (double x : u) s += std::pow(x, -t);
    return std::pow(s, -1.0 / t);
}

double gumbel_cdf(double t, const Eigen::VectorXd& u) {
    double s = 0.0;
    for (double x : u) s += std::pow(-std::log(x), t);
    return std::exp(-std::pow(s, 1.0 / t));
}

// Central mixed difference of a copula CDF over every coordinate.
template <class F>
double mixed_partial(F&& cdf, const Eigen::VectorXd& u, double h) {
    const int J = static_cast<int>(u.size());
    double s = 0.0;
    for (int mask = 0; mask < (1 << J); ++mask) {
        Eigen::VectorXd v = u;
        int sign = 1;
        for (int j = 0; j < J; ++j) {
            if (mask & (1 << j)) {
                v[j] += h;
            } else {
                v[j] -= h;
                sign = -sign;
            }
        }
        s += sign * cdf(v);
    }
    return s / std::pow(2.0 * h, J);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TEST_CASE("scenario names round trip") {
    for (Scenario s : all_scenarios()) CHECK(parse_scenario(scenario_name(s)) == s);
    CHECK_THROWS_AS(parse_scenario("Z"), ParseError);
}

TEST_CASE("scenario A moments") {
    const CaseControlData data = generate(Scenario::A, 1000000, 1000000, 3);
    const Eigen::MatrixXd x0 = data.class_values(0), x1 = data.class_values(1);
    CHECK((x0.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 0.005);
    CHECK((x1.colwise().mean().transpose() - sp::mu1_a()).cwiseAbs().maxCoeff() < 0.005);
    CHECK((sample_correlation(x0) - sp::sigma_a()).cwiseAbs().maxCoeff() < 0.005);
    CHECK((sample_correlation(x1) - sp::sigma_a()).cwiseAbs().maxCoeff() < 0.005);
}

TEST_CASE("scenario B marginals") {
    const CaseControlData b1 = generate(Scenario::B1, 200000, 0, 4);
    const Eigen::MatrixXd logs = b1.values.array().log();
    CHECK((sample_correlation(logs) - sp::sigma_a()).cwiseAbs().maxCoeff() < 0.01);
    const CaseControlData b2 = generate(Scenario::B2, 200000, 200000, 5);
    const Eigen::MatrixXd x0 = b2.class_values(0), x1 = b2.class_values(1);
    // N(0.6,1), chi2(2.5), Exp(1), Gamma(1.2) versus N(1.1,1), chi2(3), Exp(1.7), Gamma(2)
    const Eigen::Vector4d m0(0.6, 2.5, 1.0, 1.2), m1(1.1, 3.0, 1.0 / 1.7, 2.0);
    CHECK((x0.colwise().mean().transpose() - m0).cwiseAbs().maxCoeff() < 0.02);
    CHECK((x1.colwise().mean().transpose() - m1).cwiseAbs().maxCoeff() < 0.02);
    CHECK((x0.array() > 0).rightCols(3).all());
}

TEST_CASE("Archimedean copulas have the expected Kendall tau") {
    Rng rng = make_rng(6);
    const Eigen::MatrixXd c = sample_clayton(sp::clayton_theta, 2, 1000000, rng);
    CHECK(std::abs(test::kendall_tau(column(c, 0), column(c, 1)) - 0.4146 / 2.4146) < 0.005);
    const Eigen::MatrixXd g = sample_gumbel(sp::gumbel_theta, 2, 1000000, rng);
    CHECK(std::abs(test::kendall_tau(column(g, 0), column(g, 1)) - (1.0 - 1.0 / sp::gumbel_theta)) < 0.005);

    // the scenario applies monotone marginals, which leave tau unchanged
    for (Scenario s : {Scenario::D_clayton, Scenario::D_gumbel}) {
        const CaseControlData data = generate(s, 1000000, 0, 7);
        const double tau = s == Scenario::D_clayton ? sp::clayton_theta / (sp::clayton_theta + 2.0)
                                                    : 1.0 - 1.0 / sp::gumbel_theta;
        CHECK(std::abs(test::kendall_tau(column(data.values, 0), column(data.values, 3)) - tau) < 0.005);
    }
}

TEST_CASE("tail dependence of the copula samplers") {
    Rng rng = make_rng(8);
    const double tc = sp::clayton_theta, tg = sp::gumbel_theta;
    // the finite-threshold values converge to the limiting coefficients
    CHECK(std::abs(std::pow(2.0 - std::pow(1e-9, tc), -1.0 / tc) - std::pow(2.0, -1.0 / tc)) < 0.01);
    {
        const double q = 1.0 - 1e-9;
        const double lam = (1.0 - 2.0 * q + std::pow(q, std::pow(2.0, 1.0 / tg))) / (1.0 - q);
        CHECK(std::abs(lam - (2.0 - std::pow(2.0, 1.0 / tg))) < 0.01);
    }

    const Eigen::Index n = 4000000;
    const Eigen::MatrixXd c = sample_clayton(tc, 2, n, rng);
    const double q = 0.01;
    const double lower = ((c.col(0).array() < q) && (c.col(1).array() < q)).count() / (q * static_cast<double>(n));
    CHECK(std::abs(lower - std::pow(2.0 - std::pow(q, tc), -1.0 / tc)) < 0.01);

    Eigen::MatrixXd upper;
    const Eigen::MatrixXd g = sample_gumbel(tg, 2, n, rng, &upper);
    CHECK((upper + g - Eigen::MatrixXd::Ones(n, 2)).cwiseAbs().maxCoeff() < 1e-12);
    const double p = 0.01; // upper tail 1 - q
    const double emp = ((upper.col(0).array() < p) && (upper.col(1).array() < p)).count() / (p * static_cast<double>(n));
    const double qq = 1.0 - p;
    const double exact = (1.0 - 2.0 * qq + std::pow(qq, std::pow(2.0, 1.0 / tg))) / p;
    CHECK(std::abs(emp - exact) < 0.01);
}

TEST_CASE("copula densities match the mixed partials of the CDF") {
    const double h = 1e-4;
    Rng rng = make_rng(9);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (int J : {2, 3}) {
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd u(J);
            for (int j = 0; j < J; ++j) u[j] = unif(rng);
            const double fc = mixed_partial([&](const Eigen::VectorXd& v) { return clayton_cdf(sp::clayton_theta, v); }, u, h);
            CHECK(std::exp(clayton_log_density(sp::clayton_theta, u)) == doctest::Approx(fc).epsilon(2e-4));
            const double fg = mixed_partial([&](const Eigen::VectorXd& v) { return gumbel_cdf(sp::gumbel_theta, v); }, u, h);
            CHECK(std::exp(gumbel_log_density(sp::gumbel_theta, u)) == doctest::Approx(fg).epsilon(2e-4));
            for (double t : {1.0, 2.5}) {
                const double f = mixed_partial([&](const Eigen::VectorXd& v) { return gumbel_cdf(t, v); }, u, h);
                CHECK(std::exp(gumbel_log_density(t, u)) == doctest::Approx(f).epsilon(2e-4));
            }
        }
    }
    // theta = 1 is the independence copula
    Eigen::VectorXd u(4);
    u << 0.3, 0.5, 0.6, 0.8;
    CHECK(std::abs(gumbel_log_density(1.0, u)) < 1e-12);
}

TEST_CASE("optimal AUC of the scenarios") {
    const Eigen::VectorXd m = sp::mu1_a();
    const double q = m.dot(sp::sigma_a().inverse() * m);
    const double closed = boost::math::cdf(boost::math::normal(), std::sqrt(q / 2.0));
    CHECK(scenario_a_closed_form_auc() == doctest::Approx(closed).epsilon(1e-14));
    // the printed parameters give about 0.85, described only as roughly 0.8
    CHECK(closed == doctest::Approx(0.8496921172290244).epsilon(1e-12));
    // standard error of a 1e6 x 1e6 two-sample AUC is about 3.2e-4
    CHECK(std::abs(true_optimal_auc(Scenario::A, 1000000, 11) - closed) < 1.5e-3);
    CHECK(std::abs(true_optimal_auc(Scenario::B1, 1000000, 12) - closed) < 1.5e-3);
    CHECK(std::abs(true_optimal_auc(Scenario::E_linear, 1000000, 13) - 0.80) < 0.01);
    for (Scenario s : all_scenarios()) {
        const double a = true_optimal_auc(s, 20000, 14);
        CHECK(a > 0.55);
        CHECK(a < 1.0);
    }
}

TEST_CASE("scenario E draws Bernoulli labels from the logit") {
    const CaseControlData data = generate(Scenario::E_linear, 100000, 100000, 15);
    CHECK(data.n_rows() == 200000);
    double expected = 0.0;
    for (Eigen::Index i = 0; i < data.n_rows(); ++i)
        expected += 1.0 / (1.0 + std::exp(-true_log_lr(Scenario::E_linear, data.values.row(i).transpose())));
    CHECK(std::abs(static_cast<double>(data.count(1)) - expected) < 4.0 * std::sqrt(0.25 * 200000));
}

TEST_CASE("baselines") {
    SUBCASE("identical classes give a constant LDA score") {
        const CaseControlData a = generate(Scenario::A, 500, 0, 16);
        Eigen::MatrixXd y(1000, 4);
        y << a.values, a.values;
        std::vector<int> d(1000, 0);
        std::fill(d.begin() + 500, d.end(), 1);
        const CaseControlData data(y, d);
        const Eigen::VectorXd s = lda_score(lda_fit(data), y);
        CHECK(s.cwiseAbs().maxCoeff() < 1e-10);
        CHECK(empirical_auc(s, d) == doctest::Approx(0.5));
    }
    SUBCASE("LDA on scenario A approaches the optimum") {
        const CaseControlData train = generate(Scenario::A, 5000, 5000, 17);
        const CaseControlData test = generate(Scenario::A, 5000, 5000, 18);
        const double auc = empirical_auc(lda_score(lda_fit(train), test.values), test.disease);
        CHECK(std::abs(auc - scenario_a_closed_form_auc()) < 0.01);
    }
    SUBCASE("logistic regression recovers scenario E coefficients") {
        const CaseControlData data = generate(Scenario::E_linear, 5000, 5000, 19);
        const LogisticModel m = logistic_fit(data);
        CHECK(m.converged);
        CHECK(std::abs(m.coef[0] - sp::e_beta0) < 0.1);
        CHECK((m.coef.tail(4) - sp::e_beta()).cwiseAbs().maxCoeff() < 0.1);
    }
    SUBCASE("QDA with equal covariances is LDA") {
        const CaseControlData data = generate(Scenario::A, 300, 200, 20);
        Eigen::VectorXd m0, m1;
        Eigen::MatrixXd c0, c1;
        class_moments(data, 0, m0, c0);
        class_moments(data, 1, m1, c1);
        const Eigen::MatrixXd pooled = (299.0 * c0 + 199.0 * c1) / 498.0;
        const QdaModel q = qda_from_moments(m0, pooled, m1, pooled);
        const Eigen::VectorXd diff = qda_score(q, data.values) - lda_score(lda_fit(data), data.values);
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("singular covariance") {
        Eigen::MatrixXd y(6, 2);
        y << 1, 2, 2, 4, 3, 6, 1, 2, 2, 4, 4, 8;
        const CaseControlData data(y, {0, 0, 0, 1, 1, 1});
        CHECK_THROWS_AS(lda_fit(data), SingularCovariance);
        CHECK_THROWS_AS(qda_fit(data), SingularCovariance);
    }
}

TEST_CASE("generation and holdout are deterministic") {
    const CaseControlData a = generate(Scenario::D_gumbel, 50, 60, 21), b = generate(Scenario::D_gumbel, 50, 60, 21);
    CHECK(a.values == b.values);
    CHECK(a.disease == b.disease);
    CHECK(generate(Scenario::D_gumbel, 50, 60, 22).values != a.values);
    // class streams are independent of the other class count
    CHECK(generate(Scenario::A, 10, 5, 23).values.topRows(10) == generate(Scenario::A, 10, 9, 23).values.topRows(10));

    const CaseControlData data = generate(Scenario::A, 60, 60, 24);
    const std::vector<Method> methods{make_method("lda"), make_method("lTDA", 3), make_method("constant")};
    const HoldoutResult r1 = holdout_eval(data, methods, 8, 5), r2 = holdout_eval(data, methods, 8, 5);
    CHECK(holdout_to_csv(r1) == holdout_to_csv(r2));
    CHECK(holdout_to_csv(r1).rfind("method,rep,oos_auc\n", 0) == 0);
    for (double x : r1.auc[2]) CHECK(x == 0.5);
    const auto qs = r1.quartiles(0);
    CHECK(qs[0] <= qs[1]);
    CHECK(qs[1] <= qs[2]);
    CHECK_THROWS_AS(holdout_eval(data, methods, 0, 5), std::invalid_argument);
}

TEST_CASE("failed fits are recorded per method") {
    Eigen::MatrixXd y(20, 2);
    for (int i = 0; i < 20; ++i) y.row(i) << i, 2.0 * i;
    std::vector<int> d(20);
    for (int i = 0; i < 20; ++i) d[static_cast<std::size_t>(i)] = i % 2;
    const HoldoutResult r = holdout_eval(CaseControlData(y, d), {make_method("lda"), make_method("constant")}, 3, 1);
    CHECK(r.n_failed[0] == 3);
    CHECK(r.n_failed[1] == 0);
    CHECK(std::isnan(r.quartiles(0)[1]));
}

TEST_CASE("study configuration") {
    const StudyConfig c = parse_study_config("# comment\nscenario = C_skewed\nn = 100, 200\nreps=3\n"
                                             "test_n = 500\nseed = 9\norder = 4\nmethods = lTDA, lTDA_d , lda\n");
    CHECK(c.scenario == Scenario::C_skewed);
    CHECK(c.n == std::vector<Eigen::Index>{100, 200});
    CHECK(c.reps == 3);
    CHECK(c.test_n == 500);
    CHECK(c.seed == 9);
    CHECK(c.order == 4);
    CHECK(c.methods == std::vector<std::string>{"lTDA", "lTDA_d", "lda"});
    CHECK_THROWS_WITH_AS(parse_study_config("n = 10\nreps = x\n"), doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_study_config("scenario = A\ncolor = red\n"), doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_AS(parse_study_config("just words\n"), ParseError);

    StudyConfig small;
    small.scenario = Scenario::B1;
    small.n = {40};
    small.test_n = 200;
    small.reps = 2;
    small.methods = {"lda", "constant"};
    const auto rows = run_study(small);
    CHECK(rows.size() == 4);
    CHECK(study_to_csv(rows) == study_to_csv(run_study(small)));
    CHECK(study_to_csv(rows).rfind("scenario,method,N,rep,oos_auc\n", 0) == 0);
}

TEST_CASE("scenario A: lTDA and LDA are equivalent at N=200") {
    StudyConfig c;
    c.scenario = Scenario::A;
    c.n = {200};
    c.test_n = 10000;
    c.reps = 60;
    c.seed = 25;
    c.methods = {"lTDA", "lda"};
    std::vector<double> tda_auc, lda_auc;
    for (const auto& r : run_study(c)) (r.method == "lda" ? lda_auc : tda_auc).push_back(r.oos_auc);
    CHECK(std::abs(median(tda_auc) - median(lda_auc)) < 0.01);
}
