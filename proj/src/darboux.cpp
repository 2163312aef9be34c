#include "fuchsian/darboux.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace fuchsian {

int darboux_genus(int m, int n) { return m * (m - 1) * (n - 1) / 2 - (m - 1); }

namespace {

struct PolyMat {
    Poly p11, p12, p21, p22;
};

// P(z) = Q(z) A(z)
PolyMat numerator_matrix(const FuchsianSystem& sys) {
    PolyMat pm{Poly({0.0}), Poly({0.0}), Poly({0.0}), Poly({0.0})};
    for (int k = 0; k < sys.n(); ++k) {
        Poly rest = Poly::constant(1.0);
        for (int l = 0; l < sys.n(); ++l)
            if (l != k) rest = rest * Poly::linear_root(sys.poles[l]);
        const Mat& a = sys.residues[k];
        pm.p11 = pm.p11 + a(0, 0) * rest;
        pm.p12 = pm.p12 + a(0, 1) * rest;
        pm.p21 = pm.p21 + a(1, 0) * rest;
        pm.p22 = pm.p22 + a(1, 1) * rest;
    }
    return pm;
}

RationalFunction with_den(Poly num, cplx lead, const std::vector<cplx>& u, int mu,
                          const std::vector<cplx>& q, int mq) {
    RationalFunction r;
    r.num = std::move(num);
    r.lead = lead;
    for (auto x : u) r.den_roots.push_back(x), r.mult.push_back(mu);
    for (auto x : q) r.den_roots.push_back(x), r.mult.push_back(mq);
    return r;
}

}  // namespace

ScalarEquation to_scalar(const FuchsianSystem& sys, int component) {
    if (sys.m != 2) throw ValidationError("scalar reduction is implemented for 2×2 systems only");
    if (component != 0 && component != 1) throw ValidationError("component must be 0 or 1");
    FuchsianSystem s = sys;
    if (component == 1)
        for (auto& a : s.residues) a = conjugate(a, permutation_matrix({1, 0}));
    PolyMat P = numerator_matrix(s);
    double scale = 0;
    for (const auto& a : s.residues) scale = std::max(scale, max_abs(a));
    const Poly p12 = P.p12.trimmed(1e-10);
    if (p12.degree() < 0 || std::abs(p12.c.back()) <= 1e-13 * std::max(1.0, scale))
        throw ValidationError("(1,2) entry of A(z) vanishes identically; eliminate the other component");

    ScalarEquation eq;
    eq.component = component;
    eq.u = s.poles;
    eq.q = roots(p12);
    const cplx c = p12.c.back();
    const Poly Q = from_roots(s.poles);
    const Poly dQ = Q.derivative();
    const Poly n1 = (P.p11 + P.p22) * P.p12 + P.p12.derivative() * Q - dQ * P.p12;
    const Poly det = P.p11 * P.p22 - P.p12 * P.p21;
    const Poly n0 = (P.p11.derivative() * P.p12 - P.p11 * P.p12.derivative()) * Q - det * P.p12;
    eq.d1 = with_den(n1, c, eq.u, 1, eq.q, 1);
    eq.d0 = with_den(n0, c, eq.u, 2, eq.q, 1);
    eq.v = with_den(2.0 * n0 * P.p12 + n1 * n1, 2.0 * c * c, eq.u, 2, eq.q, 2);
    return eq;
}

std::vector<cplx> apparent_singularities(const ScalarEquation& eq, double clearance) {
    if (clearance <= 0) clearance = eq.u.size() > 1 ? 1e-3 * min_pole_distance(eq.u) : 1e-9;
    for (size_t i = 0; i < eq.q.size(); ++i) {
        for (auto u : eq.u)
            if (std::abs(eq.q[i] - u) < clearance)
                throw ValidationError("apparent singularity collides with a pole (non-generic stratum)");
        for (size_t j = 0; j < i; ++j)
            if (std::abs(eq.q[i] - eq.q[j]) < clearance)
                throw ValidationError("apparent singularities coincide (non-generic stratum)");
    }
    return eq.q;
}

std::vector<cplx> momenta(const ScalarEquation& eq, const std::vector<cplx>& q) {
    std::vector<cplx> p;
    const int base = static_cast<int>(eq.u.size());
    for (auto qi : q) {
        const int idx = eq.v.root_index(qi);
        if (idx < base || std::abs(eq.v.den_roots[idx] - qi) > 1e-8 * (1 + std::abs(qi)))
            throw ValidationError("point is not an apparent singularity of the equation");
        p.push_back(eq.v.residue(idx));
    }
    return p;
}

std::vector<cplx> darboux_hamiltonians(const ScalarEquation& eq) {
    std::vector<cplx> h;
    for (size_t k = 0; k < eq.u.size(); ++k) h.push_back(-eq.v.residue(static_cast<int>(k)));
    return h;
}

std::vector<NoLogCertificate> no_log_certificate(const ScalarEquation& eq) {
    std::vector<NoLogCertificate> out;
    const int base = static_cast<int>(eq.u.size());
    for (size_t i = 0; i < eq.q.size(); ++i) {
        const auto e = eq.d1.laurent(base + static_cast<int>(i), 2);  // e_{-1}, e_0
        const auto f = eq.d0.laurent(base + static_cast<int>(i), 2);  // f_{-1}, f_0
        out.push_back({eq.q[i], std::abs(e[0] - 1.0), std::abs(f[1] - f[0] * (e[1] + f[0]))});
    }
    return out;
}

DarbouxChart darboux_chart(const FuchsianSystem& sys) {
    if (sys.m != 2) throw ValidationError("Darboux charts are implemented for 2×2 systems only");
    const Mat ainf = residue_at_infinity(sys);
    double scale = 1;
    for (const auto& a : sys.residues) scale = std::max(scale, max_abs(a));
    if (std::abs(ainf(0, 1)) > 1e-10 * scale || std::abs(ainf(1, 0)) > 1e-10 * scale)
        throw ValidationError("A_inf must be diagonal for a Darboux chart");
    const auto eq = to_scalar(sys);
    DarbouxChart c;
    c.m = 2;
    c.g = darboux_genus(2, sys.n());
    c.u = sys.poles;
    c.q = apparent_singularities(eq);
    if (static_cast<int>(c.q.size()) != c.g)
        throw ValidationError("found " + std::to_string(c.q.size()) + " apparent singularities, expected g = " +
                              std::to_string(c.g));
    c.p = momenta(eq, c.q);
    c.hamiltonians = darboux_hamiltonians(eq);
    for (const auto& a : sys.residues) c.exponents.push_back(spectrum(a));
    c.lambda_inf = {ainf(0, 0), ainf(1, 1)};
    return c;
}

namespace {

void require_m2(const DarbouxChart& c) {
    if (c.m != 2) throw ValidationError("operation is implemented for m = 2 charts only");
    if (c.exponents.size() != c.u.size() || c.lambda_inf.size() != 2)
        throw ValidationError("chart lacks exponent data");
    if (static_cast<int>(c.q.size()) != c.g || c.p.size() != c.q.size())
        throw ValidationError("chart has inconsistent (q, p) lengths");
}

cplx tr_k(const DarbouxChart& c, int k) { return c.exponents[k][0] + c.exponents[k][1]; }
cplx det_k(const DarbouxChart& c, int k) { return c.exponents[k][0] * c.exponents[k][1]; }

// e0 = Res-free part of d1 at q_i, e1 its next coefficient
std::pair<cplx, cplx> d1_expansion(const DarbouxChart& c, int i) {
    cplx e0 = 0, e1 = 0;
    for (size_t k = 0; k < c.u.size(); ++k) {
        const cplx t = tr_k(c, static_cast<int>(k)) - 1.0, w = c.q[i] - c.u[k];
        e0 += t / w;
        e1 -= t / (w * w);
    }
    for (int j = 0; j < c.g; ++j)
        if (j != i) {
            const cplx w = c.q[i] - c.q[j];
            e0 += 1.0 / w;
            e1 -= 1.0 / (w * w);
        }
    return {e0, e1};
}

}  // namespace

std::vector<cplx> hamiltonians_from_chart(const DarbouxChart& c) {
    require_m2(c);
    const int n = static_cast<int>(c.u.size()), g = c.g;
    if (g != n - 2) throw ValidationError("chart genus does not match the pole count");
    std::vector<cplx> ak(n);
    for (int k = 0; k < n; ++k) {
        const cplx t = tr_k(c, k) - 1.0;
        ak[k] = -det_k(c, k) + t * t / 2.0;
    }
    const cplx l1 = c.lambda_inf[0], l2 = c.lambda_inf[1];
    const cplx vinf = -l1 * (l2 + 1.0) + (l1 + l2 + 2.0) * (l1 + l2 + 2.0) / 2.0;
    Mat M = Mat::Zero(n, n);
    Vec rhs = Vec::Zero(n);
    // z^-1 and z^-2 coefficients of v at infinity
    for (int k = 0; k < n; ++k) {
        M(0, k) = -1.0;
        M(1, k) = -c.u[k];
    }
    for (int i = 0; i < g; ++i) rhs(0) -= c.p[i];
    rhs(1) = vinf;
    for (int k = 0; k < n; ++k) rhs(1) -= ak[k];
    for (int i = 0; i < g; ++i) rhs(1) -= 0.5 + c.p[i] * c.q[i];
    // regular part of v at each q_i is fixed by the apparent-point condition
    for (int i = 0; i < g; ++i) {
        const auto [e0, e1] = d1_expansion(c, i);
        cplx target = c.p[i] * c.p[i] - e0 * c.p[i] + e0 * e0 / 2.0 + e1;
        for (int k = 0; k < n; ++k) {
            const cplx w = c.q[i] - c.u[k];
            M(2 + i, k) = -1.0 / w;
            target -= ak[k] / (w * w);
        }
        for (int j = 0; j < g; ++j)
            if (j != i) {
                const cplx w = c.q[i] - c.q[j];
                target -= 0.5 / (w * w) + c.p[j] / w;
            }
        rhs(2 + i) = target;
    }
    const Vec h = M.fullPivLu().solve(rhs);
    if (max_abs(M * h - rhs) > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
        throw NumericError("Hamiltonian system is singular for this chart");
    return std::vector<cplx>(h.data(), h.data() + n);
}

FuchsianSystem reconstruct_m2(const DarbouxChart& c) {
    require_m2(c);
    const int n = static_cast<int>(c.u.size()), g = c.g;
    if (g != n - 2) throw ValidationError("chart genus does not match the pole count");
    const cplx l1 = c.lambda_inf[0], l2 = c.lambda_inf[1];
    if (std::abs(l1 - l2) < 1e-12) throw ValidationError("reconstruction needs distinct exponents at infinity");
    const Poly N = from_roots(c.q);
    const Poly dQ = from_roots(c.u).derivative();
    Vec y(n);
    for (int k = 0; k < n; ++k) y(k) = N(c.u[k]) / dQ(c.u[k]);

    // sum x = -λ1 and sum x_k/(q_i - u_k) = e0 - p_i; y spans the kernel
    Mat L = Mat::Zero(g + 1, n);
    Vec b(g + 1);
    for (int k = 0; k < n; ++k) L(0, k) = 1.0;
    b(0) = -l1;
    for (int i = 0; i < g; ++i) {
        for (int k = 0; k < n; ++k) L(1 + i, k) = 1.0 / (c.q[i] - c.u[k]);
        b(1 + i) = d1_expansion(c, i).first - c.p[i];
    }
    Vec x = L.completeOrthogonalDecomposition().solve(b);
    // the (2,1) entries must sum to zero: fixes the kernel component
    cplx f0 = 0;
    for (int k = 0; k < n; ++k) f0 += (x(k) * tr_k(c, k) - x(k) * x(k) - det_k(c, k)) / y(k);
    x += (-f0 / (l1 - l2)) * y;

    FuchsianSystem s;
    s.m = 2;
    s.poles = c.u;
    for (int k = 0; k < n; ++k) {
        Mat a(2, 2);
        a << x(k), y(k), (x(k) * (tr_k(c, k) - x(k)) - det_k(c, k)) / y(k), tr_k(c, k) - x(k);
        s.residues.push_back(a);
    }
    return s;
}

DarbouxChart apply_Sk(const DarbouxChart& c, int k) {
    const int n = static_cast<int>(c.u.size());
    if (k < 1 || k >= n) throw ValidationError("S_k needs 2 <= k <= n");
    const cplx s = c.u[0] + c.u[k];
    DarbouxChart t = c;
    for (auto& q : t.q) q = s - q;
    for (auto& p : t.p) p = -p;
    for (auto& u : t.u) u = s - u;
    for (auto& h : t.hamiltonians) h = -h;
    return t;
}

DarbouxChart apply_Sinf(const DarbouxChart& c) {
    const int n = static_cast<int>(c.u.size());
    const double m = c.m;
    const cplx u1 = c.u[0];
    for (auto q : c.q)
        if (q == u1) throw ValidationError("S_inf is singular: q_i = u_1");
    for (int l = 1; l < n; ++l)
        if (c.u[l] == u1) throw ValidationError("S_inf is singular: u_l = u_1");
    DarbouxChart t = c;
    for (int i = 0; i < c.g; ++i) {
        const cplx w = c.q[i] - u1;
        t.q[i] = 1.0 / w;
        t.p[i] = -c.p[i] * w * w - (2 * m * m - 1) / m * w;
    }
    t.u[0] = 0.0;
    for (int l = 1; l < n; ++l) t.u[l] = 1.0 / (c.u[l] - u1);
    if (c.hamiltonians.size() == c.u.size()) {
        for (int l = 1; l < n; ++l) {
            cplx d0 = 0;
            for (auto q : c.q) d0 += 1.0 / (c.u[l] - q);
            for (int j = 0; j < n; ++j)
                if (j != l) d0 -= m * (m - 1) / 2 * (1.0 / (c.u[l] - c.u[j]));
            const cplx w = c.u[l] - u1;
            t.hamiltonians[l] = -c.hamiltonians[l] * w * w + w * d0 * d0 -
                                w * (m - 1) * (m * m - m - 1) / m * d0;
        }
    }
    // exponents: the old point at infinity becomes pole 0 with the twist z^(1/m)
    if (c.exponents.size() == c.u.size() && static_cast<int>(c.lambda_inf.size()) == c.m) {
        const int mi = c.m;
        std::vector<cplx> at0(mi), atinf(mi);
        for (int i = 0; i < mi; ++i) {
            at0[i] = c.lambda_inf[i] - 1.0 / m;
            atinf[i] = c.exponents[0][i] + 1.0 / m;
        }
        if (mi == 2) {
            // the scalar equation keeps {λ1, λ2 + 1} at infinity: move the integer into the second slot
            at0[1] += 1.0;
            atinf[1] -= 1.0;
        }
        t.exponents[0] = at0;
        t.lambda_inf = atinf;
    }
    t.infinity_swapped = !c.infinity_swapped;
    return t;
}

}  // namespace fuchsian
