#include "tda/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tda {

namespace {

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

struct LinePoint {
    double t = 0.0;
    double f = 0.0;
    double slope = 0.0;
    Eigen::VectorXd g;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), kept
// inside the interval with a safeguard.
double cubic_step(const LinePoint& a, const LinePoint& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.t - b.t);
    const double disc = d1 * d1 - a.slope * b.slope;
    const double lo = std::min(a.t, b.t), hi = std::max(a.t, b.t);
    double t = 0.5 * (lo + hi);
    if (disc >= 0.0 && std::isfinite(disc)) {
        const double d2 = std::copysign(std::sqrt(disc), b.t - a.t);
        const double denom = b.slope - a.slope + 2.0 * d2;
        if (denom != 0.0) {
            const double c = b.t - (b.t - a.t) * (b.slope + d2 - d1) / denom;
            if (std::isfinite(c)) t = c;
        }
    }
    const double margin = 0.1 * (hi - lo);
    if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (lo + hi);
    return t;
}

class LineSearch {
public:
    LineSearch(const Objective& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, int& evals)
        : fn_(fn), x_(x), dir_(dir), evals_(evals) {}

    LinePoint eval(double t) {
        LinePoint p;
        p.t = t;
        p.g.resize(x_.size());
        p.f = fn_(x_ + t * dir_, p.g);
        ++evals_;
        if (!std::isfinite(p.f) || !p.g.allFinite()) {
            p.f = std::numeric_limits<double>::infinity();
            p.slope = std::numeric_limits<double>::quiet_NaN();
        } else {
            p.slope = p.g.dot(dir_);
        }
        return p;
    }

    // Returns false when no acceptable step is found.
    bool search(const LinePoint& start, double t_init, LinePoint& out) {
        LinePoint prev = start;
        double t = t_init;
        for (int it = 0; it < 40; ++it) {
            LinePoint cur = eval(t);
            if (!std::isfinite(cur.f)) {
                // infeasible: shrink toward the last good point
                t = prev.t + 0.2 * (t - prev.t);
                if (t - prev.t < 1e-20) return false;
                continue;
            }
            if (cur.f > start.f + kC1 * t * start.slope || (it > 0 && cur.f >= prev.f))
                return zoom(start, prev, cur, out);
            if (std::abs(cur.slope) <= -kC2 * start.slope) {
                out = std::move(cur);
                return true;
            }
            if (cur.slope >= 0.0) return zoom(start, cur, prev, out);
            prev = std::move(cur);
            t *= 2.0;
        }
        return false;
    }

private:
    bool zoom(const LinePoint& start, LinePoint lo, LinePoint hi, LinePoint& out) {
        for (int it = 0; it < 40; ++it) {
            double t = std::isfinite(hi.f) && std::isfinite(hi.slope) ? cubic_step(lo, hi) : 0.5 * (lo.t + hi.t);
            if (std::abs(hi.t - lo.t) < 1e-16 * std::max(1.0, std::abs(lo.t))) break;
            LinePoint cur = eval(t);
            if (!std::isfinite(cur.f) || cur.f > start.f + kC1 * t * start.slope || cur.f >= lo.f) {
                hi = std::move(cur);
                continue;
            }
            if (std::abs(cur.slope) <= -kC2 * start.slope) {
                out = std::move(cur);
                return true;
            }
            if (cur.slope * (hi.t - lo.t) >= 0.0) hi = lo;
            lo = std::move(cur);
        }
        // accept a point with sufficient decrease even if curvature failed
        if (lo.t > 0.0 && lo.f < start.f) {
            out = std::move(lo);
            return true;
        }
        return false;
    }

    const Objective& fn_;
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& dir_;
    int& evals_;
};

} // namespace

BfgsResult minimize_bfgs(const Objective& fn, Eigen::VectorXd x0, const BfgsOptions& opts) {
    const Eigen::Index n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    res.grad.resize(n);
    res.f = fn(res.x, res.grad);
    res.evaluations = 1;
    if (!std::isfinite(res.f) || !res.grad.allFinite()) return res;
    if (n == 0) {
        res.converged = true;
        return res;
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    int failures = 0;
    while (res.iterations < opts.max_iterations) {
        Eigen::VectorXd dir = -h * res.grad;
        double slope = dir.dot(res.grad);
        if (!(slope < 0.0)) {
            h.setIdentity();
            scaled = false;
            dir = -res.grad;
            slope = dir.dot(res.grad);
        }
        LinePoint start;
        start.f = res.f;
        start.slope = slope;
        double t0 = 1.0;
        if (!scaled) t0 = std::min(1.0, 1.0 / std::max(1e-12, dir.lpNorm<Eigen::Infinity>()));

        LineSearch ls(fn, res.x, dir, res.evaluations);
        LinePoint next;
        if (!ls.search(start, t0, next)) {
            // retry once from steepest descent before giving up
            if (++failures > 1 || !scaled) break;
            h.setIdentity();
            scaled = false;
            continue;
        }
        failures = 0;
        ++res.iterations;

        const Eigen::VectorXd s = next.t * dir;
        const Eigen::VectorXd y = next.g - res.grad;
        const double f_prev = res.f;
        res.x += s;
        res.f = next.f;
        res.grad = next.g;

        const double rel = std::abs(f_prev - res.f) / std::max(1.0, std::abs(res.f));
        const double gmax = res.grad.lpNorm<Eigen::Infinity>();
        if (rel < opts.rel_tol && gmax < opts.grad_tol) {
            res.converged = true;
            return res;
        }

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                h = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h * y;
            const double yhy = y.dot(hy);
            h += ((1.0 + rho * yhy) * rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
        }
    }
    res.converged = res.grad.lpNorm<Eigen::Infinity>() < opts.grad_tol;
    return res;
}

} // namespace tda
