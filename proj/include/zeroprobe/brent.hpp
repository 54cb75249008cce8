#pragma once

#include <cfloat>
#include <cmath>

namespace zeroprobe {

struct MinimizeResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Brent's bounded scalar minimizer (golden section with parabolic steps).
///
/// Terminates when the bracket around the current best point is within
/// 2 * (sqrt(eps) * |x| + abs_tol / 3). The endpoints themselves are never
/// evaluated; callers that care about boundary optima compare them separately.
template <class F>
MinimizeResult brent_minimize(F&& f, double lo, double hi, double abs_tol, int max_iterations) {
    const double golden = 0.5 * (3.0 - std::sqrt(5.0));
    const double eps = std::sqrt(DBL_EPSILON);
    const double tol3 = abs_tol / 3.0;

    double a = lo;
    double b = hi;
    double v = a + golden * (b - a);
    double w = v;
    double x = v;
    double d = 0.0;
    double e = 0.0;
    double fx = f(x);
    double fv = fx;
    double fw = fx;

    MinimizeResult out;
    for (int iter = 0;; ++iter) {
        const double xm = 0.5 * (a + b);
        const double tol1 = eps * std::fabs(x) + tol3;
        const double t2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= t2 - 0.5 * (b - a)) {
            out.converged = true;
            out.iterations = iter;
            break;
        }
        if (iter >= max_iterations) {
            out.iterations = iter;
            break;
        }

        double p = 0.0;
        double q = 0.0;
        double r = 0.0;
        if (std::fabs(e) > tol1) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) {
                p = -p;
            } else {
                q = -q;
            }
            r = e;
            e = d;
        }

        double u;
        if (std::fabs(p) >= std::fabs(0.5 * q * r) || p <= q * (a - x) || p >= q * (b - x)) {
            e = (x < xm) ? b - x : a - x;
            d = golden * e;
        } else {
            d = p / q;
            u = x + d;
            if (u - a < t2 || b - u < t2) d = (x < xm) ? tol1 : -tol1;
        }

        if (std::fabs(d) >= tol1) {
            u = x + d;
        } else {
            u = d > 0.0 ? x + tol1 : x - tol1;
        }
        const double fu = f(u);

        if (fu <= fx) {
            if (u < x) {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x) {
                a = u;
            } else {
                b = u;
            }
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    out.x = x;
    out.fx = fx;
    return out;
}

}  // namespace zeroprobe
