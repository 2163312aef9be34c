#pragma once

#include "fuchsian/core.hpp"

#include <functional>

namespace fuchsian {

struct OdeOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double min_step = 1e-14;  // relative to the interval length
    long max_steps = 2000000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
};

// Thrown when the step size collapses; carries where it happened so callers
// can turn it into a more specific diagnostic.
struct StepUnderflow : NumericError {
    double t;
    Vec state;
    StepUnderflow(const std::string& what, double t_, Vec y)
        : NumericError(what), t(t_), state(std::move(y)) {}
};

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dy)>;

// Dormand-Prince 5(4) with PI step control, complex state, real parameter.
Vec integrate_dopri(const OdeRhs& f, double t0, double t1, Vec y, const OdeOptions& opt,
                    OdeStats* stats = nullptr);

}  // namespace fuchsian
