#include "closed_forms.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace fuchsian;
using namespace testing_helpers;

TEST_SUITE("core") {

TEST_CASE("build_system accepts the triangular family") {
    const auto b = closed_forms::b_system(4.0);
    CHECK(b.m == 2);
    CHECK(b.n() == 3);
}

TEST_CASE("build_system rejects bad input") {
    const Mat a = Mat::Identity(2, 2);
    CHECK_THROWS_AS(build_system({0.0, 0.0}, {a, a}), ValidationError);
    CHECK_THROWS_AS(build_system({0.0, 1.0}, {a, Mat::Identity(3, 3)}), ValidationError);
    CHECK_THROWS_AS(build_system({0.0}, {a, a}), ValidationError);
    CHECK_THROWS_AS(build_system({0.0}, {Mat::Identity(1, 1)}), ValidationError);
    Mat bad = a;
    bad(0, 1) = cplx(NAN, 0);
    CHECK_THROWS_AS(build_system({0.0}, {bad}), ValidationError);
}

TEST_CASE("residue at infinity") {
    Mat want = Mat::Zero(2, 2);
    want(0, 0) = 0.5;
    want(1, 1) = -0.5;
    CHECK(max_abs(residue_at_infinity(closed_forms::b_system(4.0)) - want) < 1e-14);
    CHECK(max_abs(residue_at_infinity(closed_forms::ex211(4.0)) - want) < 1e-14);
    const auto z = build_system({0.0, 1.0}, {Mat::Zero(2, 2), Mat::Zero(2, 2)});
    CHECK(max_abs(residue_at_infinity(z)) == 0.0);
}

TEST_CASE("spectrum values and ordering") {
    const auto ev = spectrum(closed_forms::b_system(4.0).residues[0]);
    REQUIRE(ev.size() == 2);
    CHECK(std::abs(ev[0] - 0.5) < 1e-14);
    CHECK(std::abs(ev[1] + 0.5) < 1e-14);
    for (auto e : spectrum(closed_forms::ex211(4.0).residues[0])) CHECK(std::abs(e) < 1e-7);
    for (auto e : spectrum(Mat::Identity(2, 2))) CHECK(std::abs(e - 1.0) < 1e-15);
    // real part descending, then imaginary part descending
    Mat d = Mat::Zero(3, 3);
    d(0, 0) = cplx(-1, 0);
    d(1, 1) = cplx(2, -1);
    d(2, 2) = cplx(2, 3);
    const auto s = spectrum(d);
    CHECK(s[0] == cplx(2, 3));
    CHECK(s[1] == cplx(2, -1));
    CHECK(s[2] == cplx(-1, 0));
}

TEST_CASE("tolerance config validation") {
    ToleranceConfig t;
    CHECK_NOTHROW(t.validate());
    t.series_order = 1;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t = {};
    t.ode_rel_tol = 0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t = {};
    CHECK(t.clearance_for({0.0, 2.0, cplx(0, 1)}) == doctest::Approx(1e-3));
}

TEST_CASE("property: total trace including infinity vanishes") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
        std::mt19937 rng(seed);
        const int m = 2 + seed % 2, n = 2 + seed % 3;
        std::vector<cplx> u;
        std::vector<Mat> a;
        for (int k = 0; k < n; ++k) {
            u.push_back(std::polar(1.0 + k, 0.9 * k));
            a.push_back(random_matrix(rng, m, 2.0, 2.0));
        }
        const auto s = build_system(u, a);
        cplx t = residue_at_infinity(s).trace();
        for (const auto& r : s.residues) t += r.trace();
        CHECK(std::abs(t) < 1e-13);
        // appending A_inf as a finite pole closes the residue sum
        u.push_back(cplx(17.0, -3.0));
        a.push_back(residue_at_infinity(s));
        CHECK(max_abs(residue_at_infinity(build_system(u, a))) < 1e-13);
    }
}

TEST_CASE("property: spectrum is similarity invariant") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 2 + trial % 3;
        const Mat a = random_matrix(rng, m, 1.0, 1.0);
        const Mat p = random_matrix(rng, m, 1.0, 1.0) + 2.0 * Mat::Identity(m, m);
        const auto s1 = spectrum(a), s2 = spectrum(conjugate(a, p));
        for (int i = 0; i < m; ++i) CHECK(std::abs(s1[i] - s2[i]) < 1e-9);
    }
}

TEST_CASE("diagonal conjugation distance recovers the diagonal") {
    const auto b = closed_forms::b_system(4.0);
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = cplx(0, -3);
    std::vector<Mat> c;
    for (const auto& r : b.residues) c.push_back(conjugate(r, d));
    CHECK(diagonal_conjugation_distance(b.residues, c) < 1e-13);
    auto wrong = c;
    wrong[1](0, 1) += 0.1;
    CHECK(diagonal_conjugation_distance(b.residues, wrong) > 1e-3);
}

TEST_CASE("permutation matrix convention") {
    const Mat p = permutation_matrix({2, 0, 1});
    Mat d = Mat::Zero(3, 3);
    d(0, 0) = 10.0, d(1, 1) = 20.0, d(2, 2) = 30.0;
    const Mat c = conjugate(d, p);
    CHECK(c(0, 0) == 30.0);
    CHECK(c(1, 1) == 10.0);
    CHECK(c(2, 2) == 20.0);
}

}
