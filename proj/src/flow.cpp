#include "fuchsian/flow.hpp"
#include "fuchsian/ode.hpp"

#include <algorithm>
#include <cmath>

namespace fuchsian {

std::vector<std::vector<Mat>> schlesinger_rhs(const FuchsianSystem& sys) {
    const int n = sys.n(), m = sys.m;
    std::vector<std::vector<Mat>> d(n, std::vector<Mat>(n, Mat::Zero(m, m)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Mat& a = sys.residues[i];
            const Mat& b = sys.residues[j];
            d[i][j] = (a * b - b * a) / (sys.poles[i] - sys.poles[j]);
            d[i][i] -= d[i][j];
        }
    return d;
}

cplx hamiltonian(const FuchsianSystem& sys, int k) {
    if (k < 0 || k >= sys.n()) throw ValidationError("pole index out of range");
    cplx h = 0.0;
    for (int l = 0; l < sys.n(); ++l)
        if (l != k) h += (sys.residues[k] * sys.residues[l]).trace() / (sys.poles[k] - sys.poles[l]);
    return h;
}

DeformationState initial_state(const FuchsianSystem& sys, const LeveltOptions& opt) {
    const auto e = levelt_at_infinity(sys, 2, opt);
    return {sys, e.psi[1], e.psi[2], 0.0};
}

namespace {

// Packs A_1..A_n, Ψ_1, Ψ_2.
Vec pack(const DeformationState& s) {
    const int m = s.system.m, n = s.system.n();
    Vec y((n + 2) * m * m);
    for (int k = 0; k < n; ++k) y.segment(k * m * m, m * m) = Eigen::Map<const Vec>(s.system.residues[k].data(), m * m);
    y.segment(n * m * m, m * m) = Eigen::Map<const Vec>(s.psi1.data(), m * m);
    y.segment((n + 1) * m * m, m * m) = Eigen::Map<const Vec>(s.psi2.data(), m * m);
    return y;
}

Mat block(const Vec& y, int k, int m) { return Eigen::Map<const Mat>(y.data() + k * m * m, m, m); }

void unpack(const Vec& y, DeformationState& s) {
    const int m = s.system.m, n = s.system.n();
    for (int k = 0; k < n; ++k) s.system.residues[k] = block(y, k, m);
    s.psi1 = block(y, n, m);
    s.psi2 = block(y, n + 1, m);
}

// One leg u(s) = u0 + s (u1 - u0), s ∈ [0,1].
DeformationState leg(const DeformationState& start, const std::vector<cplx>& u1,
                     const ToleranceConfig& tol, int moving) {
    const int m = start.system.m, n = start.system.n();
    const std::vector<cplx> u0 = start.system.poles;
    std::vector<cplx> du(n);
    for (int k = 0; k < n; ++k) du[k] = u1[k] - u0[k];

    DeformationState work = start;
    OdeRhs f = [&](double s, const Vec& y, Vec& dy) {
        FuchsianSystem sys;
        sys.m = m;
        sys.poles.resize(n);
        sys.residues.resize(n);
        for (int k = 0; k < n; ++k) {
            sys.poles[k] = u0[k] + s * du[k];
            sys.residues[k] = block(y, k, m);
        }
        const Mat psi1 = block(y, n, m);
        dy.resize(y.size());
        Mat dp1 = Mat::Zero(m, m), dp2 = Mat::Zero(m, m);
        std::vector<Mat> da(n, Mat::Zero(m, m));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j || (du[i] == 0.0 && du[j] == 0.0)) continue;
                // [A_i, A_j]/(u_i - u_j) enters ∂_j A_i with + and ∂_i A_i with -
                const Mat c = (sys.residues[i] * sys.residues[j] - sys.residues[j] * sys.residues[i]) /
                              (sys.poles[i] - sys.poles[j]);
                da[i] += c * (du[j] - du[i]);
            }
            if (du[i] != 0.0) {
                dp1 -= sys.residues[i] * du[i];
                dp2 -= (sys.residues[i] * psi1 + sys.poles[i] * sys.residues[i]) * du[i];
            }
        }
        for (int k = 0; k < n; ++k) dy.segment(k * m * m, m * m) = Eigen::Map<const Vec>(da[k].data(), m * m);
        dy.segment(n * m * m, m * m) = Eigen::Map<const Vec>(dp1.data(), m * m);
        dy.segment((n + 1) * m * m, m * m) = Eigen::Map<const Vec>(dp2.data(), m * m);
    };

    OdeOptions opt;
    opt.rel_tol = tol.ode_rel_tol;
    opt.abs_tol = tol.ode_abs_tol;
    Vec y;
    try {
        y = integrate_dopri(f, 0.0, 1.0, pack(start), opt);
    } catch (const StepUnderflow& e) {
        const double big = e.state.cwiseAbs().maxCoeff();
        const cplx where = moving >= 0 ? u0[moving] + e.t * du[moving] : cplx(e.t, 0.0);
        if (big > 1e8)
            throw BlowUpError("residues blow up (movable singularity) near u = " +
                                  std::to_string(where.real()) + (where.imag() < 0 ? "" : "+") +
                                  std::to_string(where.imag()) + "i",
                              where);
        throw NumericError("step size underflow in the Schlesinger flow (near collision?)");
    }
    work.system.poles = u1;
    unpack(y, work);
    return work;
}

double seg_dist(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    const double s = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

}  // namespace

DeformationState integrate_schlesinger(const DeformationState& state, int moving, cplx u_target,
                                       const PathSpec& path, const ToleranceConfig& tol) {
    tol.validate();
    const auto& sys = state.system;
    if (moving < 0 || moving >= sys.n()) throw ValidationError("moving pole index out of range");
    if (state.psi1.rows() != sys.m || state.psi2.rows() != sys.m)
        throw ValidationError("deformation state lacks Ψ_1, Ψ_2");
    std::vector<cplx> pts = path.vertices;
    if (pts.empty() || std::abs(pts.front() - sys.poles[moving]) > 1e-14 * (1 + std::abs(pts.front())))
        pts.insert(pts.begin(), sys.poles[moving]);
    if (std::abs(pts.back() - u_target) > 0) pts.push_back(u_target);

    const double clearance = tol.clearance_for(sys.poles);
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        for (int l = 0; l < sys.n(); ++l)
            if (l != moving && seg_dist(sys.poles[l], pts[i], pts[i + 1]) < clearance)
                throw ValidationError("deformation path collides with pole " + std::to_string(l + 1));

    DeformationState s = state;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        auto target = s.system.poles;
        target[moving] = pts[i + 1];
        s = leg(s, target, tol, moving);
        s.position += 1.0;
    }
    s.system.poles[moving] = u_target;
    return s;
}

DeformationState integrate_schlesinger_all(const DeformationState& state,
                                           const std::vector<cplx>& targets,
                                           const ToleranceConfig& tol) {
    tol.validate();
    if (static_cast<int>(targets.size()) != state.system.n())
        throw ValidationError("target list has the wrong length");
    if (targets.size() > 1 && min_pole_distance(targets) <= 0)
        throw ValidationError("target poles collide");
    auto s = leg(state, targets, tol, -1);
    s.position += 1.0;
    return s;
}

PsiPair isomonodromic_psi(const FuchsianSystem& sys, const DeformationState& reference,
                          const ToleranceConfig& tol) {
    if (reference.system.n() != sys.n() || reference.system.m != sys.m)
        throw ValidationError("reference state has a different shape");
    const auto moved = integrate_schlesinger_all(reference, sys.poles, tol);
    double drift = 0;
    for (int k = 0; k < sys.n(); ++k)
        drift = std::max(drift, max_abs(moved.system.residues[k] - sys.residues[k]));
    const double limit = std::max(1e-6, 1e4 * tol.ode_rel_tol);
    if (drift > limit)
        throw ValidationError("reference does not lie on the isomonodromic family of the system "
                              "(residue mismatch " + std::to_string(drift) + ")");

    LeveltOptions opt;
    opt.resonance_eps = tol.resonance_eps;
    const auto probe = levelt_at_infinity(sys, 2, opt);
    for (const auto& slot : probe.free_slots) {
        const auto [k, i, j] = slot;
        opt.overrides[slot] = k == 1 ? moved.psi1(i, j) : moved.psi2(i, j);
    }
    const auto e = levelt_at_infinity(sys, 2, opt);
    PsiPair out{e.psi[1], e.psi[2], 0.0};
    out.consistency = std::max(max_abs(out.psi1 - moved.psi1), max_abs(out.psi2 - moved.psi2));
    if (out.consistency > limit)
        throw ValidationError("deformation equations disagree with the recursion (mismatch " +
                              std::to_string(out.consistency) + ")");
    return out;
}

}  // namespace fuchsian
