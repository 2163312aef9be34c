#include "closed_forms.hpp"
#include "fuchsian/document.hpp"
#include "fuchsian/monodromy.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace fuchsian;
using namespace testing_helpers;

namespace {

const ToleranceConfig kTol{};

FuchsianSystem attached_fixture() { return load_document(std::string(FUCHSIAN_FIXTURE_DIR) + "/b_attached.json").system; }

}  // namespace

TEST_SUITE("monodromy") {

TEST_CASE("transport: zero-length path, scalar loop, reversal") {
    const auto s = generic_2x2(2, 3);
    std::mt19937 rng(1);
    const Mat init = random_matrix(rng, 2, 1.0, 1.0);
    PathSpec none;
    none.vertices = {cplx(5, 5)};
    CHECK(max_abs(transport(s, none, init, kTol) - init) == 0.0);

    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.3, a(1, 1) = cplx(-0.45, 0.1);
    const auto one = build_system({0.0}, {a});
    PathSpec loop;
    loop.kind = PathSpec::Kind::Loop;
    loop.anchor = 0;
    loop.vertices = {1.0};
    const Mat m = transport(one, loop, Mat::Identity(2, 2), kTol);
    CHECK(std::abs(m(0, 0) - std::exp(cplx(0, 2 * M_PI) * a(0, 0))) < 1e-8);
    CHECK(std::abs(m(1, 1) - std::exp(cplx(0, 2 * M_PI) * a(1, 1))) < 1e-8);
    CHECK(std::abs(m(0, 1)) + std::abs(m(1, 0)) < 1e-12);

    PathSpec fwd, back;
    fwd.vertices = {cplx(4, 4), cplx(-4, 4), cplx(-4, -4), cplx(4, -4), cplx(4, 4)};
    back.vertices.assign(fwd.vertices.rbegin(), fwd.vertices.rend());
    const Mat round = transport(s, back, transport(s, fwd, Mat::Identity(2, 2), kTol), kTol);
    CHECK(max_abs(round - Mat::Identity(2, 2)) < 1e-10);

    PathSpec hit;
    hit.vertices = {cplx(-1, 0), cplx(2, 0)};
    CHECK_THROWS_AS(transport(s, hit, Mat::Identity(2, 2), kTol), ValidationError);
}

TEST_CASE("triangular family: structure, traces, closure, connection consistency") {
    const auto d = connection_matrices(closed_forms::b_system(4.0), {}, kTol);
    const cplx want[] = {-2.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(d.monodromies[k](1, 0)) < 1e-6);
        CHECK(std::abs(d.monodromies[k].trace() - want[k]) < 1e-6);
    }
    CHECK(d.closure_residual < 1e-5);
    CHECK(d.inf_check < 1e-6);
    CHECK(d.n4_residual < 1e-6);
    CHECK(d.connections.size() == 3);
}

TEST_CASE("single diagonal pole: connection matrix is diagonal") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.2, a(1, 1) = -0.35;
    const auto d = connection_matrices(build_system({0.5}, {a}), {}, kTol);
    CHECK(std::abs(d.connections[0](0, 1)) + std::abs(d.connections[0](1, 0)) < 1e-10);
}

TEST_CASE("diagonal conjugation keeps traces") {
    const auto s = generic_2x2(4, 3);
    Mat dg = Mat::Zero(2, 2);
    dg(0, 0) = cplx(2, 1), dg(1, 1) = 0.5;
    std::vector<Mat> r;
    for (const auto& a : s.residues) r.push_back(conjugate(a, dg));
    const auto d1 = connection_matrices(s, {}, kTol), d2 = connection_matrices(build_system(s.poles, r), {}, kTol);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(d1.monodromies[k].trace() - d2.monodromies[k].trace()) < 1e-8);
}

TEST_CASE("equivalence: identical, conjugated, and shifted at infinity") {
    const auto d = monodromy_matrices(generic_2x2(6, 3), {}, kTol);
    auto w = monodromy_equivalent(d, d, 1e-8);
    REQUIRE(w);
    CHECK(w->shift.cwiseAbs().maxCoeff() < 1e-12);

    std::mt19937 rng(3);
    const Mat p = random_matrix(rng, 2, 1.0, 1.0) + 2.0 * Mat::Identity(2, 2);
    auto d2 = d;
    for (auto& mk : d2.monodromies) mk = conjugate(mk, p);
    d2.m_inf = conjugate(d2.m_inf, p);
    w = monodromy_equivalent(d, d2, 1e-8);
    REQUIRE(w);
    for (int k = 0; k < 3; ++k)
        CHECK(max_abs(w->conjugator.inverse() * d.monodromies[k] * w->conjugator - d2.monodromies[k]) < 1e-8);

    const auto da = connection_matrices(closed_forms::a_corrected(4.0), {}, kTol);
    const auto db = connection_matrices(closed_forms::b_system(4.0), {}, kTol);
    w = monodromy_equivalent(da, db, 1e-6);
    REQUIRE(w);
    CHECK(std::abs(w->shift(0) - 1.0) < 1e-8);
    CHECK(std::abs(w->shift(1) + 1.0) < 1e-8);

    CHECK_FALSE(monodromy_equivalent(d, db, 1e-6));
}

TEST_CASE("invariant subspaces") {
    const auto db = monodromy_matrices(closed_forms::b_system(4.0), {}, kTol);
    const auto x = invariant_subspace(db, 1, 1e-6);
    REQUIRE(x);
    CHECK(std::abs(std::abs((*x)(0, 0)) - 1.0) < 1e-8);
    CHECK(std::abs((*x)(1, 0)) < 1e-8);

    // a tuple with no common eigenvector
    Mat m1 = mat2(1, 1, 0, 1), m2 = mat2(1, 0, 1, 1);
    CHECK_FALSE(common_invariant_subspace({m1, m2}, 1, 1e-8));

    // equivariance under conjugation
    std::mt19937 rng(8);
    const Mat p = random_matrix(rng, 2, 1.0, 1.0) + 2.0 * Mat::Identity(2, 2);
    std::vector<Mat> conj;
    for (const auto& mk : db.monodromies) conj.push_back(conjugate(mk, p));
    const auto y = common_invariant_subspace(conj, 1, 1e-6);
    REQUIRE(y);
    const Vec v = p.inverse() * x->col(0);
    CHECK(std::abs(std::abs(v.normalized().dot(y->col(0))) - 1.0) < 1e-8);
}

TEST_CASE("scalar monodromy detection") {
    const auto att = attached_fixture();
    auto s = scalar_monodromy_indices(monodromy_matrices(att, {}, kTol), 1e-6);
    REQUIRE(s.size() == 1);
    CHECK(s[0].index == 3);
    CHECK(std::abs(s[0].mu - 1.0) < 1e-6);
    CHECK(s[0].consistent);

    CHECK(scalar_monodromy_indices(monodromy_matrices(generic_2x2(6, 3), {}, kTol), 1e-6).empty());

    // a scalar factor (z - u)^{1/2} turns μ = 1 into μ = -1
    auto r = att.residues;
    r[3] += 0.5 * Mat::Identity(2, 2);
    s = scalar_monodromy_indices(monodromy_matrices(build_system(att.poles, r), {}, kTol), 1e-6);
    REQUIRE(s.size() == 1);
    CHECK(s[0].index == 3);
    CHECK(std::abs(s[0].mu + 1.0) < 1e-6);
}

TEST_CASE("trace invariants list") {
    const Mat a = mat2(1, 2, 3, 4), b = mat2(0, 1, 1, 0), c = mat2(2, 0, 0, 3);
    const auto t = trace_invariants({a, b, c});
    REQUIRE(t.size() == 7);
    CHECK(t[0] == a.trace());
    CHECK(t[3] == (a * b).trace());
    CHECK(t[6] == (a * b * c).trace());
}

TEST_CASE("property: determinants, closure, basepoint and cut independence") {
    for (unsigned seed : {21u, 22u, 23u}) {
        const auto s = random_system(seed, {0.0, 1.0, cplx(0.3, 1.4)}, {0.21, -0.43});
        const auto d = monodromy_matrices(s, {}, kTol);
        CHECK(d.closure_residual < 10 * 1e4 * kTol.ode_rel_tol);
        for (int k = 0; k < 3; ++k)
            CHECK(std::abs(d.monodromies[k].determinant() - std::exp(cplx(0, 2 * M_PI) * s.residues[k].trace())) < 1e-6);

        LoopBasis far;
        far.basepoint_radius = 2 * make_loop_basis(s).basepoint_radius;
        const auto d2 = monodromy_matrices(s, far, kTol);
        LoopBasis turned;
        turned.cut_direction = std::polar(1.0, 1.1 + 0.07);
        const auto d3 = monodromy_matrices(s, turned, kTol);
        const auto t1 = trace_invariants(d.monodromies), t2 = trace_invariants(d2.monodromies),
                   t3 = trace_invariants(d3.monodromies);
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(t1[i] - t2[i]) < 1e-6);
            CHECK(std::abs(t1[i] - t3[i]) < 1e-6);
        }
    }
}

TEST_CASE("property: parallel and serial loops agree") {
    const auto s = random_system(31, {0.0, 1.0, cplx(0.3, 1.4), cplx(-1.2, 0.5)}, {0.21, -0.43, 0.6});
    const auto a = monodromy_matrices(s, {}, kTol), b = monodromy_matrices_serial(s, {}, kTol);
    for (int k = 0; k < 4; ++k) CHECK(max_abs(a.monodromies[k] - b.monodromies[k]) == 0.0);
}

}
