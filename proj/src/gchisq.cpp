#include "tda/gchisq.hpp"

#include "tda/error.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tda {

namespace {

constexpr double kDropWeight = 1e-12;
constexpr double kDecayed = 45.0;
constexpr double kPi = boost::math::constants::pi<double>();

struct Reduced {
    std::vector<double> w;
    std::vector<double> nu;
    double offset = 0.0;
    double normal_sd = 0.0;
};

Reduced reduce(const GChiSqParams& p) {
    if (p.weights.size() != p.noncentrality.size())
        throw std::invalid_argument("gchisq: weights and noncentralities differ in length");
    Reduced r;
    r.offset = p.offset;
    r.normal_sd = std::abs(p.normal_sd);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        if (!(p.noncentrality[i] >= 0.0)) throw std::invalid_argument("gchisq: noncentrality must be >= 0");
        if (std::abs(p.weights[i]) < kDropWeight) {
            r.offset += p.weights[i] * (1.0 + p.noncentrality[i]);
        } else {
            r.w.push_back(p.weights[i]);
            r.nu.push_back(p.noncentrality[i]);
        }
    }
    return r;
}

// Imhof phase without the -x u / 2 term, and log modulus.
struct Imhof {
    const Reduced& r;

    double phase(double u) const {
        double t = 0.0;
        for (std::size_t i = 0; i < r.w.size(); ++i) {
            const double lu = r.w[i] * u;
            t += 0.5 * (std::atan(lu) + r.nu[i] * lu / (1.0 + lu * lu));
        }
        return t;
    }

    double log_modulus(double u) const {
        double m = 0.0;
        for (std::size_t i = 0; i < r.w.size(); ++i) {
            const double l2 = r.w[i] * r.w[i] * u * u;
            m += 0.25 * std::log1p(l2) + 0.5 * r.nu[i] * l2 / (1.0 + l2);
        }
        return m + r.normal_sd * r.normal_sd * u * u / 8.0;
    }
};

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::ooura_fourier_cos;
using boost::math::quadrature::ooura_fourier_sin;

ooura_fourier_sin<double>& sin_rule() {
    thread_local ooura_fourier_sin<double> rule(1e-8);
    return rule;
}

ooura_fourier_cos<double>& cos_rule() {
    thread_local ooura_fourier_cos<double> rule(1e-8);
    return rule;
}

double imhof_cdf(const Reduced& r, double x, double tol) {
    const Imhof im{r};
    const double shifted = x - r.offset;
    const double omega = 0.5 * shifted;
    double mean = 0.0, wmax = 0.0;
    for (std::size_t i = 0; i < r.w.size(); ++i) {
        mean += r.w[i] * (1.0 + r.nu[i]);
        wmax = std::max(wmax, std::abs(r.w[i]));
    }
    if (wmax == 0.0) wmax = r.normal_sd;
    // beyond U0 every chi-square term is in its asymptotic regime
    double u0 = 8.0 / wmax;
    // large noncentralities or a normal term make the integrand negligible
    // well before U0; then no tail integral is needed
    bool decayed = false;
    if (im.log_modulus(u0) >= kDecayed) {
        decayed = true;
        while (im.log_modulus(0.5 * u0) >= kDecayed) u0 *= 0.5;
    }

    auto integrand = [&](double u) {
        if (u == 0.0) return 0.5 * (mean - shifted);
        return std::sin(im.phase(u) - omega * u) / (u * std::exp(im.log_modulus(u)));
    };
    double err = 0.0;
    const double head = gauss_kronrod<double, 31>::integrate(integrand, 0.0, u0, 15, std::min(tol, 1e-6), &err);

    double tail = 0.0;
    const double aom = std::abs(omega);
    if (decayed) {
        tail = 0.0;
    } else if (aom * u0 < 1e-3) {
        exp_sinh<double> es;
        auto g = [&](double s) { return integrand(u0 + s); };
        tail = es.integrate(g, 0.0, std::numeric_limits<double>::infinity());
    } else {
        // sin(phase - omega u) split into Fourier integrals over s = u - U0
        auto gs = [&](double s) {
            const double u = u0 + s;
            return std::sin(im.phase(u)) / (u * std::exp(im.log_modulus(u)));
        };
        auto gc = [&](double s) {
            const double u = u0 + s;
            return std::cos(im.phase(u)) / (u * std::exp(im.log_modulus(u)));
        };
        const double ca = std::cos(aom * u0), sa = std::sin(aom * u0);
        const double i_sc = cos_rule().integrate(gs, aom).first;
        const double i_ss = sin_rule().integrate(gs, aom).first;
        const double i_cc = cos_rule().integrate(gc, aom).first;
        const double i_cs = sin_rule().integrate(gc, aom).first;
        const double sign = omega >= 0.0 ? 1.0 : -1.0;
        tail = (ca * i_sc - sa * i_ss) - sign * (sa * i_cc + ca * i_cs);
    }
    const double p = 0.5 - (head + tail) / kPi;
    return std::clamp(p, 0.0, 1.0);
}

double reduced_cdf(const Reduced& r, double x, double tol) {
    if (r.w.empty()) {
        if (r.normal_sd == 0.0) return x >= r.offset ? 1.0 : 0.0;
        return boost::math::cdf(boost::math::normal(r.offset, r.normal_sd), x);
    }
    return imhof_cdf(r, x, tol);
}

} // namespace

double GChiSqParams::mean() const {
    double m = offset;
    for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * (1.0 + noncentrality[i]);
    return m;
}

double GChiSqParams::variance() const {
    double v = normal_sd * normal_sd;
    for (std::size_t i = 0; i < weights.size(); ++i)
        v += 2.0 * weights[i] * weights[i] * (1.0 + 2.0 * noncentrality[i]);
    return v;
}

double gchisq_cdf(const GChiSqParams& params, double x, double tol) {
    if (!(tol > 0.0 && tol <= 1e-2)) throw std::invalid_argument("gchisq_cdf: tol must lie in (0, 1e-2]");
    return reduced_cdf(reduce(params), x, tol);
}

double gchisq_quantile(const GChiSqParams& params, double p, double tol) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gchisq_quantile: p must lie in (0, 1)");
    const Reduced r = reduce(params);
    const double cdf_tol = std::min(1e-2, 1e-2 * tol);
    if (r.w.empty()) {
        if (r.normal_sd == 0.0) return r.offset;
        return boost::math::quantile(boost::math::normal(r.offset, r.normal_sd), p);
    }
    auto f = [&](double x) { return reduced_cdf(r, x, cdf_tol) - p; };

    const double mean = params.mean();
    const double sd = std::sqrt(std::max(params.variance(), 1e-300));
    double k = 1.0;
    double lo = mean - k * sd, hi = mean + k * sd;
    double flo = f(lo), fhi = f(hi);
    int doublings = 0;
    while (!(flo < 0.0 && fhi > 0.0)) {
        if (++doublings > 60) throw NumericalFailure("gchisq_quantile: bracket expansion failed");
        k *= 2.0;
        if (!(flo < 0.0)) {
            lo = mean - k * sd;
            flo = f(lo);
        }
        if (!(fhi > 0.0)) {
            hi = mean + k * sd;
            fhi = f(hi);
        }
    }
    if (std::abs(flo) <= tol) return lo;
    if (std::abs(fhi) <= tol) return hi;

    // Illinois regula falsi with bisection safeguard
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        double x = hi - fhi * (hi - lo) / (fhi - flo);
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        const double fx = f(x);
        if (std::abs(fx) <= tol) return x;
        if (fx < 0.0) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
    }
    return 0.5 * (lo + hi);
}

} // namespace tda
