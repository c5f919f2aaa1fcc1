#pragma once

#include <vector>

namespace tda {

/// Law of  offset + sum_i w_i * chi2_1(nu_i) + normal_sd * Z  with independent terms.
///
/// The normal component is zero for the composite scores of non-degenerate
/// location-scale models; it carries the directions in which the quadratic
/// score degenerates to a linear one.
struct GChiSqParams {
    std::vector<double> weights;
    std::vector<double> noncentrality;
    double offset = 0.0;
    double normal_sd = 0.0;

    double mean() const;
    double variance() const;
};

/// P(L <= x) by Imhof's inversion of the characteristic function.
///
/// The integral over [0, U0] uses adaptive Gauss-Kronrod quadrature; the
/// oscillatory tail beyond U0 is integrated with Ooura's double-exponential
/// Fourier rule (or exp-sinh when the oscillation frequency vanishes). Terms
/// with |w| < 1e-12 are folded into the offset. If nothing random remains the
/// step function at the offset is returned.
double gchisq_cdf(const GChiSqParams& params, double x, double tol = 1e-8);

/// Returns x with |gchisq_cdf(x) - p| <= tol. Throws NumericalFailure when the
/// bracket cannot be established within 60 doublings.
double gchisq_quantile(const GChiSqParams& params, double p, double tol = 1e-6);

} // namespace tda
