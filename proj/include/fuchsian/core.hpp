#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fuchsian {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Bad input: wrong shapes, violated preconditions. CLI exit code 1.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: eigensolver, step underflow, lost normalization. CLI exit code 2.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FuchsianSystem {
    int m = 0;
    std::vector<cplx> poles;
    std::vector<Mat> residues;

    int n() const { return static_cast<int>(poles.size()); }
    // A(z) = sum A_k / (z - u_k)
    Mat eval(cplx z) const;
};

struct ToleranceConfig {
    double ode_rel_tol = 1e-12;
    double ode_abs_tol = 1e-14;
    double resonance_eps = 1e-8;
    // 0 means "derive from the poles": 1e-3 * min pairwise distance
    double pole_clearance = 0.0;
    int series_order = 24;

    void validate() const;
    double clearance_for(const std::vector<cplx>& poles) const;
};

// Either an open polyline through `vertices`, or a loop around pole `anchor`
// starting and ending at vertices.front().
struct PathSpec {
    enum class Kind { Polyline, Loop };
    Kind kind = Kind::Polyline;
    std::optional<int> anchor;
    std::vector<cplx> vertices;
    double radius = 0.0;
};

FuchsianSystem build_system(std::vector<cplx> poles, std::vector<Mat> residues,
                            double separation = 0.0);
Mat residue_at_infinity(const FuchsianSystem& sys);
std::vector<cplx> spectrum(const Mat& a);

// Sorting rule shared by spectrum() and the Levelt frames.
bool exponent_order(cplx a, cplx b);

double min_pole_distance(const std::vector<cplx>& poles);

// Finds diagonal D with D^-1 A_k D ~ B_k for all k and returns the largest
// entrywise residual; `d_out` receives the diagonal when non-null.
double diagonal_conjugation_distance(const std::vector<Mat>& a, const std::vector<Mat>& b,
                                     Vec* d_out = nullptr);

Mat permutation_matrix(const std::vector<int>& perm);
Mat conjugate(const Mat& a, const Mat& p);  // P^-1 A P
double max_abs(const Mat& a);

}  // namespace fuchsian
