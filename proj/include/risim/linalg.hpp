// linalg.hpp — dense complex linear algebra and superoperator calculus
//
// Matrices act on C^n. A superoperator acts on the n x n matrix space and is
// stored as an n^2 x n^2 matrix in the elementary basis u_kl = |k><l|, ordered
// lexicographically by (k, l); equivalently vec() is row-major vectorization.
// With this ordering the sandwich x -> a x b has matrix kron(a, b^T).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace risim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

// max_{jk} |A_jk - conj(A_kj)|
double hermitian_asymmetry(const ComplexMatrix& a);

// Hermitian within rel_tol * max|A| (absolute rel_tol for the zero matrix).
bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12);

bool all_finite(const ComplexMatrix& a);

// Elementary matrix |k><l| of size n.
ComplexMatrix unit_matrix(int n, int k, int l);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Row-major vectorization and its inverse.
ComplexVector vec(const ComplexMatrix& x);
ComplexMatrix unvec(const ComplexVector& v, int n);

// Scaling-and-squaring exponential. Throws InputError on non-finite entries.
ComplexMatrix matrix_exp(const ComplexMatrix& a);

// Largest singular value.
double spectral_norm(const ComplexMatrix& a);

// Smallest eigenvalue of the Hermitian part (a + a^dagger)/2.
double min_hermitian_eigenvalue(const ComplexMatrix& a);

// Trace norm distance 1/2 ||rho - sigma||_1 between Hermitian matrices.
double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma);

class Superoperator {
public:
    // m must be square with side n^2 for some n >= 1.
    explicit Superoperator(ComplexMatrix m);

    static Superoperator identity(int n);
    static Superoperator zero(int n);
    // x -> a x b
    static Superoperator sandwich(const ComplexMatrix& a, const ComplexMatrix& b);

    int dim() const noexcept { return dim_; }
    const ComplexMatrix& matrix() const noexcept { return m_; }

    ComplexMatrix apply(const ComplexMatrix& x) const;

    // Schrodinger-picture dual: Tr(rho S(x)) = Tr(S*(rho) x) for all rho, x.
    Superoperator dual() const;

    Superoperator pow(std::uint64_t k) const;

    Superoperator operator*(const Superoperator& rhs) const;  // composition (this after rhs)
    Superoperator operator+(const Superoperator& rhs) const;
    Superoperator operator-(const Superoperator& rhs) const;
    Superoperator operator-() const;
    friend Superoperator operator*(Complex s, const Superoperator& op);
    friend Superoperator operator*(double s, const Superoperator& op);

private:
    int dim_;
    ComplexMatrix m_;
};

Superoperator matrix_exp(const Superoperator& s);

// x -> [v, x]
Superoperator commutator_superop(const ComplexMatrix& v);

// Heisenberg derivation x -> i[h, x]; exp(t delta)(x) = e^{ith} x e^{-ith}.
// Throws InputError when h is not Hermitian.
Superoperator derivation_superop(const ComplexMatrix& h);

// Operator norm induced by the Hilbert-Schmidt norm on matrices.
double superop_norm(const Superoperator& s);

// C = sum_kl u_kl (x) S(u_kl); S is completely positive iff C >= 0.
ComplexMatrix choi_matrix(const Superoperator& s);

// ---------------------------------------------------------------------------
// Spectral decompositions

struct SpectralCluster {
    Complex eigenvalue;       // mean of the merged eigenvalues
    ComplexMatrix projection; // spectral projection of the cluster
    int multiplicity = 0;
};

enum class SpectralMode {
    normal,  // Schur vectors; orthogonal (Hermitian) projections
    general, // right/left eigenvector pairs normalized to biorthogonality
};

struct SpectralDecomposition {
    std::vector<SpectralCluster> clusters;
    double cluster_tolerance = 1e-8;
    // Condition number of the eigenvector matrix (1 in normal mode).
    double condition_number = 1.0;
    // Near-degeneracy notices: eigenvalues in (tol, 2 tol] of one another.
    std::vector<std::string> warnings;

    ComplexMatrix reconstruct() const;
    // Cluster whose eigenvalue lies within tol of z, or nullptr.
    const SpectralCluster* find(Complex z, double tol) const;
};

// Eigenvalues closer than tol (single linkage) share a cluster.
// Normal mode requires ||AA^dagger - A^dagger A|| <= 1e-10 max(1, ||A||^2).
// General mode throws DefectError when the eigenvector matrix is numerically singular.
SpectralDecomposition spectral_decompose(const ComplexMatrix& a, double tol = 1e-8,
                                         SpectralMode mode = SpectralMode::normal);
SpectralDecomposition spectral_decompose(const Superoperator& s, double tol = 1e-8,
                                         SpectralMode mode = SpectralMode::normal);

// Bisector of the largest angular gap between the arguments of points on the circle.
double largest_gap_bisector(std::span<const Complex> points);

// Branch logarithm of a Hilbert-Schmidt unitary superoperator. Eigenvalue arguments
// are mapped into the 2 pi window bounded by the cut that contains angle 0:
// (cut - 2 pi, cut) for cut > 0, (cut, cut + 2 pi) otherwise. Without a cut, the largest-gap bisector is used.
// Throws BranchCutError when an eigenvalue is within 1e-8 rad of the cut and
// InputError when u is not unitary to 1e-10.
Superoperator matrix_log_unitary(const Superoperator& u,
                                 std::optional<double> branch_cut_angle = std::nullopt);

} // namespace risim
