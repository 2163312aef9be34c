#pragma once

#include "fuchsian/core.hpp"
#include "fuchsian/poly.hpp"

#include <string>

namespace fuchsian {

// y'' = d1 y' + d0 y for one component of a 2×2 system; v = d0 + d1²/2
struct ScalarEquation {
    int m = 2;
    int component = 0;
    std::vector<cplx> u;
    std::vector<cplx> q;   // apparent singularities
    RationalFunction d1, d0, v;
};

struct DarbouxChart {
    int m = 2;
    int g = 0;
    std::vector<cplx> q, p, u;
    std::vector<std::vector<cplx>> exponents;  // per finite pole
    std::vector<cplx> lambda_inf;
    std::vector<cplx> hamiltonians;
    // set by apply_Sinf: pole 0 of this chart is the former point at infinity
    bool infinity_swapped = false;
};

int darboux_genus(int m, int n);

// component 0 eliminates Φ_2 and keeps y = Φ_1; component 1 the reverse
ScalarEquation to_scalar(const FuchsianSystem& sys, int component = 0);
std::vector<cplx> apparent_singularities(const ScalarEquation& eq, double clearance = 0.0);
std::vector<cplx> momenta(const ScalarEquation& eq, const std::vector<cplx>& q);
std::vector<cplx> darboux_hamiltonians(const ScalarEquation& eq);

struct NoLogCertificate {
    cplx q;
    double exponent_residual;  // |Res d1 - 1|, exponents {0, 2}
    double residual;           // Frobenius obstruction to a log term
};
std::vector<NoLogCertificate> no_log_certificate(const ScalarEquation& eq);

// m = 2 only; A_inf must be diagonal
DarbouxChart darboux_chart(const FuchsianSystem& sys);

// Solves for the Hamiltonians from (q, p, u, exponents) alone (m = 2).
std::vector<cplx> hamiltonians_from_chart(const DarbouxChart& c);

// A 2×2 system with the chart's poles, exponents and (q, p); unique up to
// diagonal conjugation, normalized so the (1,2) numerator is monic.
FuchsianSystem reconstruct_m2(const DarbouxChart& c);

// k is a pole index 1..n-1 (the partner of pole 0)
DarbouxChart apply_Sk(const DarbouxChart& c, int k);
DarbouxChart apply_Sinf(const DarbouxChart& c);

}  // namespace fuchsian
