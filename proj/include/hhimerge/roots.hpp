#pragma once

// Scalar root finders used by the equilibrium solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace hhimerge::roots {

struct Result {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Newton iteration kept inside [lo, hi]. `f_df(x)` returns {f(x), f'(x)};
// f must change sign on the bracket. Steps that leave the current bracket, or
// fail to halve |f|, are replaced by bisection. Converges when |f| <= ftol.
template <class FDf>
Result safeguarded_newton(FDf&& f_df, double lo, double hi, double x0, double ftol, int max_iter) {
    auto [flo, dlo] = f_df(lo);
    if (std::abs(flo) <= ftol) return {lo, flo, 0, true};
    auto [fhi, dhi] = f_df(hi);
    if (std::abs(fhi) <= ftol) return {hi, fhi, 0, true};
    (void)dlo;
    (void)dhi;
    if ((flo > 0) == (fhi > 0)) return {x0, flo, 0, false};
    const bool increasing = fhi > 0;

    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    double prev_abs = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        auto [fx, dfx] = f_df(x);
        if (std::abs(fx) <= ftol) return {x, fx, it, true};
        if ((fx > 0) == increasing)
            hi = x;
        else
            lo = x;

        double next = x - fx / dfx;
        const bool newton_ok = std::isfinite(next) && next > lo && next < hi &&
                               std::abs(fx) < 0.5 * prev_abs;
        if (!newton_ok) next = 0.5 * (lo + hi);
        prev_abs = std::abs(fx);
        if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
            auto [fn, dn] = f_df(next);
            (void)dn;
            return {next, fn, it, std::abs(fn) <= ftol};
        }
        x = next;
    }
    auto [fx, dfx] = f_df(x);
    (void)dfx;
    return {x, fx, max_iter, std::abs(fx) <= ftol};
}

// Brent's method on a sign-changing bracket [a, b]: inverse quadratic and
// secant steps with bisection fallback. Converges when |f| <= ftol or the
// bracket shrinks to machine precision.
template <class F>
Result brent(F&& f, double a, double b, double fa, double fb, double ftol, int max_iter) {
    if (std::abs(fa) <= ftol) return {a, fa, 0, true};
    if (std::abs(fb) <= ftol) return {b, fb, 0, true};
    if ((fa > 0) == (fb > 0)) return {b, fb, 0, false};

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 1; it <= max_iter; ++it) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
        const double xm = 0.5 * (c - b);
        if (std::abs(fb) <= ftol) return {b, fb, it, true};
        if (std::abs(xm) <= tol1) return {b, fb, it, false};

        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
    }
    return {b, fb, max_iter, std::abs(fb) <= ftol};
}

}  // namespace hhimerge::roots
