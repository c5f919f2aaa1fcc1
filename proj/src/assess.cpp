#include "tda/assess.hpp"

#include "tda/error.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tda {

RosenblattReport rosenblatt(const FittedTda& model, const CaseControlData& data, int d, std::vector<int> order) {
    const int J = model.n_markers();
    if (data.n_markers() != J) throw std::invalid_argument("data and model disagree on the number of markers");
    if (d != 0 && d != 1) throw std::invalid_argument("class must be 0 or 1");
    if (order.empty())
        for (int j = 0; j < J; ++j) order.push_back(j);
    if (static_cast<int>(order.size()) != J) throw std::invalid_argument("order must list every marker once");
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int j = 0; j < J; ++j)
        if (sorted[static_cast<std::size_t>(j)] != j) throw std::invalid_argument("order must list every marker once");

    Eigen::MatrixXd sub(J, J);
    for (int a = 0; a < J; ++a)
        for (int b = 0; b < J; ++b)
            sub(a, b) = model.sigma(d)(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
    const Eigen::MatrixXd lt = CorrelationParam::from_correlation(sub).std_lower();

    RosenblattReport rep;
    rep.d = d;
    rep.order = order;
    for (int j : order) rep.marker_names.push_back(model.marker_names[static_cast<std::size_t>(j)]);
    rep.u.assign(static_cast<std::size_t>(J), {});
    const boost::math::normal norm;
    const double eps = std::numeric_limits<double>::epsilon();
    Eigen::VectorXd z(J);
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        if (data.disease[static_cast<std::size_t>(i)] != d) continue;
        if (!data.observed.row(i).all()) {
            ++rep.n_skipped;
            continue;
        }
        for (int a = 0; a < J; ++a) {
            const int j = order[static_cast<std::size_t>(a)];
            z[a] = model.transform(d, j, data.values(i, j)).h;
        }
        const Eigen::VectorXd w = lt.triangularView<Eigen::Lower>() * z;
        for (int a = 0; a < J; ++a) {
            const double u = boost::math::cdf(norm, std::clamp(w[a], -37.0, 37.0));
            rep.u[static_cast<std::size_t>(a)].push_back(std::clamp(u, eps, 1.0 - eps));
        }
        ++rep.n_used;
    }
    if (rep.n_used < 10)
        throw InsufficientData("rosenblatt: " + std::to_string(rep.n_used) + " complete rows in class " +
                               std::to_string(d) + "; at least 10 are required");
    const double rootn = std::sqrt(static_cast<double>(rep.n_used));
    for (const auto& col : rep.u) {
        const double ks = ks_uniform_statistic(col);
        rep.ks_stat.push_back(ks);
        rep.ks_pvalue.push_back(kolmogorov_pvalue(rootn * ks));
    }
    return rep;
}

double ks_uniform_statistic(std::vector<double> u) {
    if (u.empty()) throw std::invalid_argument("ks_uniform_statistic: empty sample");
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = std::clamp(u[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
    }
    return d;
}

double kolmogorov_pvalue(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    constexpr double pi = boost::math::constants::pi<double>();
    if (lambda < 1.18) {
        // theta-function form converges fast for small lambda
        const double x = pi * pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) s += std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * x);
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

std::string rosenblatt_to_csv(const RosenblattReport& report) {
    std::ostringstream out;
    out << "coordinate,marker,u,ecdf\n";
    for (std::size_t j = 0; j < report.u.size(); ++j) {
        std::vector<double> u = report.u[j];
        std::sort(u.begin(), u.end());
        const double n = static_cast<double>(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            out << j + 1 << ',' << report.marker_names[j] << ',' << format_real(u[i]) << ','
                << format_real(static_cast<double>(i + 1) / n) << '\n';
    }
    return out.str();
}

} // namespace tda
