#include "fuchsian/ode.hpp"

#include <algorithm>
#include <cmath>

namespace fuchsian {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b*, the embedded 4th order difference
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Vec integrate_dopri(const OdeRhs& f, double t0, double t1, Vec y, const OdeOptions& opt,
                    OdeStats* stats) {
    const double span = t1 - t0;
    if (span == 0.0) return y;
    const double dir = span > 0 ? 1.0 : -1.0;
    const double len = std::abs(span);
    const long dim = y.size();

    Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim), ynew(dim);
    f(t0, y, k1);

    double t = t0;
    double h = len * 1e-3;
    double err_prev = 1.0;
    long steps = 0;
    OdeStats local;

    while (dir * (t1 - t) > 0) {
        if (++steps > opt.max_steps) throw NumericError("ODE step budget exhausted");
        if (h > std::abs(t1 - t)) h = std::abs(t1 - t);
        const double hs = dir * h;

        tmp = y + hs * a21 * k1;
        f(t + c2 * hs, tmp, k2);
        tmp = y + hs * (a31 * k1 + a32 * k2);
        f(t + c3 * hs, tmp, k3);
        tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * hs, tmp, k4);
        tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * hs, tmp, k5);
        tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + hs, tmp, k6);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + hs, ynew, k7);

        double err = 0.0;
        for (long i = 0; i < dim; ++i) {
            cplx e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        if (!std::isfinite(err) || !ynew.allFinite()) {
            err = 1e10;
        }

        if (err <= 1.0) {
            t += hs;
            y = ynew;
            k1 = k7;
            ++local.accepted;
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
            h *= std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-4);
        } else {
            ++local.rejected;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
        }
        if (h < opt.min_step * len) {
            if (stats) *stats = local;
            throw StepUnderflow("ODE step size underflow", t, y);
        }
    }
    if (stats) *stats = local;
    return y;
}

}  // namespace fuchsian
