#pragma once

#include "fuchsian/core.hpp"

#include <map>
#include <tuple>

namespace fuchsian {

struct AdmissiblePair {
    Vec lambda;                  // diagonal of the semisimple part
    std::vector<Mat> r_parts;    // R_0 .. R_K
    int K = 0;

    Mat R() const;
    Mat Lambda() const { return lambda.asDiagonal(); }
};

// Slot (k, i, j): Psi_k entry (i, j) left free by an integer exponent gap.
using FreeSlot = std::tuple<int, int, int>;

struct LeveltExpansion {
    int anchor = -1;              // pole index, -1 for infinity
    cplx center = 0.0;            // u_anchor (unused at infinity)
    Mat frame;                    // T; identity at infinity
    std::vector<Mat> psi;         // psi[0] = 1, psi[k] = Psi_k
    AdmissiblePair pair;
    int order = 0;
    double validity_radius = 0.0; // |z - u| bound, or |z| lower bound at infinity
    std::vector<FreeSlot> free_slots;
    std::vector<FreeSlot> near_resonances;  // gaps inside the resonance band but not exactly integer

    bool at_infinity() const { return anchor < 0; }
    Mat psi_at(cplx z) const;     // truncated series value
};

struct LeveltOptions {
    double resonance_eps = 1e-8;
    // Repeated diagonal entries of A_inf are normally rejected; the ζ-chart
    // constructions need Λ = 0 and integer ties.
    bool allow_repeated = false;
    std::map<FreeSlot, cplx> overrides;
};

LeveltExpansion levelt_at_infinity(const FuchsianSystem& sys, int order,
                                   const LeveltOptions& opt = {});
LeveltExpansion levelt_at_pole(const FuchsianSystem& sys, int k, int order,
                               const LeveltOptions& opt = {});

// Φ(z) = Ψ z^{-Λ} z^{-R} at infinity, T Ψ (z-u)^Λ (z-u)^R at a pole.
// log_branch adds 2πi·branch to the principal logarithm.
Mat evaluate_levelt(const LeveltExpansion& e, cplx z, int log_branch = 0);
// Same with the logarithm of z (or z-u) supplied by the caller.
Mat evaluate_levelt_log(const LeveltExpansion& e, cplx z, cplx log_value);

// exp(s R) for nilpotent R, as a finite sum.
Mat nilpotent_exp(const Mat& r, cplx s);

bool centralizer_membership(const Mat& g, const Vec& lambda, bool at_infinity = false,
                            double eps = 1e-8, double zero_tol = 1e-12);

}  // namespace fuchsian
