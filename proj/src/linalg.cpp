// linalg.cpp — dense complex linear algebra and superoperator calculus

#include "risim/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "risim/errors.hpp"

namespace risim {

namespace {

int side_from_square(Eigen::Index size) {
    const auto n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(size))));
    if (n < 1 || static_cast<Eigen::Index>(n) * n != size) {
        throw InputError("superoperator matrix side " + std::to_string(size) +
                         " is not a perfect square");
    }
    return n;
}

double wrap_angle(double phi) {
    // into (-pi, pi]
    double r = std::remainder(phi, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Groups eigenvalue indices; clusters ordered by (real, imag) of their mean.
std::vector<std::vector<int>> cluster_eigenvalues(const ComplexVector& ev, double tol,
                                                  std::vector<std::string>& warnings) {
    const int n = static_cast<int>(ev.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(ev(i) - ev(j)) <= tol) uf.unite(i, j);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = std::abs(ev(i) - ev(j));
            if (d > tol && d <= 2.0 * tol) {
                std::ostringstream os;
                os << "near-degenerate eigenvalues " << ev(i) << " and " << ev(j)
                   << " at distance " << d << " (cluster tolerance " << tol << ")";
                warnings.push_back(os.str());
            }
        }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int r = uf.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[slot[r]].push_back(i);
    }
    auto mean = [&](const std::vector<int>& g) {
        Complex s{0.0, 0.0};
        for (int i : g) s += ev(i);
        return s / static_cast<double>(g.size());
    };
    std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
        const Complex ma = mean(a), mb = mean(b);
        if (ma.real() != mb.real()) return ma.real() < mb.real();
        return ma.imag() < mb.imag();
    });
    return groups;
}

} // namespace

double hermitian_asymmetry(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    if (a.size() == 0) return true;
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
    return hermitian_asymmetry(a) <= rel_tol * scale;
}

bool all_finite(const ComplexMatrix& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const Complex z = a.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

ComplexMatrix unit_matrix(int n, int k, int l) {
    ComplexMatrix u = ComplexMatrix::Zero(n, n);
    u(k, l) = 1.0;
    return u;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

ComplexVector vec(const ComplexMatrix& x) {
    ComplexVector v(x.size());
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
        for (Eigen::Index l = 0; l < x.cols(); ++l) v(k * x.cols() + l) = x(k, l);
    }
    return v;
}

ComplexMatrix unvec(const ComplexVector& v, int n) {
    if (static_cast<Eigen::Index>(n) * n != v.size()) {
        throw InputError("unvec: vector length does not match n*n");
    }
    ComplexMatrix x(n, n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) x(k, l) = v(k * n + l);
    }
    return x;
}

ComplexMatrix matrix_exp(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw InputError("matrix_exp: matrix is not square");
    if (!all_finite(a)) throw InputError("matrix_exp: non-finite entries");
    if (a.isZero(0.0)) return ComplexMatrix::Identity(a.rows(), a.cols());
    return a.exp();
}

double spectral_norm(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    return svd.singularValues()(0);
}

double min_hermitian_eigenvalue(const ComplexMatrix& a) {
    const ComplexMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    const ComplexMatrix d = rho - sigma;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(ComplexMatrix m) : dim_(0), m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InputError("superoperator matrix must be square");
    dim_ = side_from_square(m_.rows());
}

Superoperator Superoperator::identity(int n) {
    return Superoperator(ComplexMatrix::Identity(n * n, n * n));
}

Superoperator Superoperator::zero(int n) {
    return Superoperator(ComplexMatrix::Zero(n * n, n * n));
}

Superoperator Superoperator::sandwich(const ComplexMatrix& a, const ComplexMatrix& b) {
    return Superoperator(kron(a, b.transpose()));
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) {
        throw InputError("Superoperator::apply: dimension mismatch");
    }
    return unvec(m_ * vec(x), dim_);
}

Superoperator Superoperator::dual() const {
    // vec(S*(rho)) = K M^T K vec(rho), K the transpose permutation.
    const int n = dim_;
    ComplexMatrix d(n * n, n * n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) d(k * n + l, i * n + j) = m_(j * n + i, l * n + k);
    return Superoperator(std::move(d));
}

Superoperator Superoperator::pow(std::uint64_t k) const {
    ComplexMatrix result = ComplexMatrix::Identity(m_.rows(), m_.cols());
    ComplexMatrix base = m_;
    while (k > 0) {
        if (k & 1u) result = result * base;
        k >>= 1u;
        if (k > 0) base = base * base;
    }
    return Superoperator(std::move(result));
}

Superoperator Superoperator::operator*(const Superoperator& rhs) const {
    if (rhs.dim_ != dim_) throw InputError("superoperator composition: dimension mismatch");
    return Superoperator(m_ * rhs.m_);
}

Superoperator Superoperator::operator+(const Superoperator& rhs) const {
    if (rhs.dim_ != dim_) throw InputError("superoperator sum: dimension mismatch");
    return Superoperator(m_ + rhs.m_);
}

Superoperator Superoperator::operator-(const Superoperator& rhs) const {
    if (rhs.dim_ != dim_) throw InputError("superoperator difference: dimension mismatch");
    return Superoperator(m_ - rhs.m_);
}

Superoperator Superoperator::operator-() const { return Superoperator(-m_); }

Superoperator operator*(Complex s, const Superoperator& op) { return Superoperator(s * op.m_); }

Superoperator operator*(double s, const Superoperator& op) { return Superoperator(s * op.m_); }

Superoperator matrix_exp(const Superoperator& s) { return Superoperator(matrix_exp(s.matrix())); }

Superoperator commutator_superop(const ComplexMatrix& v) {
    if (v.rows() != v.cols()) throw InputError("commutator_superop: matrix is not square");
    const auto n = v.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    return Superoperator(kron(v, id) - kron(id, v.transpose()));
}

Superoperator derivation_superop(const ComplexMatrix& h) {
    if (!is_hermitian(h)) {
        std::ostringstream os;
        os << "derivation_superop: h is not Hermitian (max asymmetry " << hermitian_asymmetry(h) << ")";
        throw InputError(os.str());
    }
    return Complex{0.0, 1.0} * commutator_superop(h);
}

double superop_norm(const Superoperator& s) { return spectral_norm(s.matrix()); }

ComplexMatrix choi_matrix(const Superoperator& s) {
    const int n = s.dim();
    ComplexMatrix c = ComplexMatrix::Zero(n * n, n * n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            const ComplexMatrix u = unit_matrix(n, k, l);
            c += kron(u, s.apply(u));
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Spectral decompositions

ComplexMatrix SpectralDecomposition::reconstruct() const {
    if (clusters.empty()) return {};
    ComplexMatrix a = ComplexMatrix::Zero(clusters.front().projection.rows(),
                                          clusters.front().projection.cols());
    for (const auto& c : clusters) a += c.eigenvalue * c.projection;
    return a;
}

const SpectralCluster* SpectralDecomposition::find(Complex z, double tol) const {
    const SpectralCluster* best = nullptr;
    double best_d = tol;
    for (const auto& c : clusters) {
        const double d = std::abs(c.eigenvalue - z);
        if (d <= best_d) {
            best = &c;
            best_d = d;
        }
    }
    return best;
}

SpectralDecomposition spectral_decompose(const ComplexMatrix& a, double tol, SpectralMode mode) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw InputError("spectral_decompose: matrix must be square and non-empty");
    }
    if (!all_finite(a)) throw InputError("spectral_decompose: non-finite entries");
    if (!(tol >= 0.0)) throw InputError("spectral_decompose: tolerance must be >= 0");

    SpectralDecomposition out;
    out.cluster_tolerance = tol;
    const auto n = a.rows();

    if (mode == SpectralMode::normal) {
        const double scale = std::max(1.0, spectral_norm(a) * spectral_norm(a));
        const double defect = (a * a.adjoint() - a.adjoint() * a).cwiseAbs().maxCoeff();
        if (defect > 1e-10 * scale) {
            std::ostringstream os;
            os << "spectral_decompose: input is not normal (||AA* - A*A|| = " << defect
               << "); use SpectralMode::general";
            throw InputError(os.str());
        }
        Eigen::ComplexSchur<ComplexMatrix> schur(a);
        const ComplexMatrix& u = schur.matrixU();
        const ComplexVector ev = schur.matrixT().diagonal();
        for (const auto& g : cluster_eigenvalues(ev, tol, out.warnings)) {
            ComplexMatrix basis(n, static_cast<Eigen::Index>(g.size()));
            Complex mean{0.0, 0.0};
            for (std::size_t j = 0; j < g.size(); ++j) {
                basis.col(static_cast<Eigen::Index>(j)) = u.col(g[j]);
                mean += ev(g[j]);
            }
            mean /= static_cast<double>(g.size());
            out.clusters.push_back({mean, basis * basis.adjoint(), static_cast<int>(g.size())});
        }
        return out;
    }

    Eigen::ComplexEigenSolver<ComplexMatrix> es(a);
    if (es.info() != Eigen::Success) throw Error("spectral_decompose: eigensolver failed");
    const ComplexMatrix& v = es.eigenvectors();
    const ComplexVector& ev = es.eigenvalues();
    Eigen::JacobiSVD<ComplexMatrix> svd(v);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition_number < 1e13)) {
        std::ostringstream os;
        os << "spectral_decompose: eigenvector matrix is numerically singular (condition number "
           << out.condition_number << "); input is not diagonalizable";
        throw DefectError(os.str());
    }
    const ComplexMatrix w = v.partialPivLu().inverse(); // rows: left eigenvectors, W V = I
    for (const auto& g : cluster_eigenvalues(ev, tol, out.warnings)) {
        ComplexMatrix p = ComplexMatrix::Zero(n, n);
        Complex mean{0.0, 0.0};
        for (int j : g) {
            p += v.col(j) * w.row(j);
            mean += ev(j);
        }
        mean /= static_cast<double>(g.size());
        out.clusters.push_back({mean, std::move(p), static_cast<int>(g.size())});
    }
    return out;
}

SpectralDecomposition spectral_decompose(const Superoperator& s, double tol, SpectralMode mode) {
    return spectral_decompose(s.matrix(), tol, mode);
}

double largest_gap_bisector(std::span<const Complex> points) {
    if (points.empty()) return kPi;
    std::vector<double> angles;
    angles.reserve(points.size());
    for (const Complex& z : points) angles.push_back(std::arg(z));
    std::sort(angles.begin(), angles.end());
    double best_gap = -1.0;
    double best_start = angles.front();
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double next = (i + 1 < angles.size()) ? angles[i + 1] : angles.front() + 2.0 * kPi;
        const double gap = next - angles[i];
        if (gap > best_gap) {
            best_gap = gap;
            best_start = angles[i];
        }
    }
    return wrap_angle(best_start + 0.5 * best_gap);
}

Superoperator matrix_log_unitary(const Superoperator& u, std::optional<double> branch_cut_angle) {
    const ComplexMatrix& m = u.matrix();
    const auto n = m.rows();
    const double unitarity = spectral_norm(m.adjoint() * m - ComplexMatrix::Identity(n, n));
    if (!(unitarity <= 1e-10)) {
        std::ostringstream os;
        os << "matrix_log_unitary: input is not unitary (||u*u - I|| = " << unitarity << ")";
        throw InputError(os.str());
    }
    Eigen::ComplexSchur<ComplexMatrix> schur(m);
    const ComplexMatrix& q = schur.matrixU();
    const ComplexVector ev = schur.matrixT().diagonal();

    std::vector<Complex> points(ev.data(), ev.data() + ev.size());
    const double suggested = largest_gap_bisector(points);
    double cut = suggested;
    if (branch_cut_angle) {
        cut = *branch_cut_angle;
        if (!std::isfinite(cut) || cut <= -kPi - 1e-15 || cut > kPi + 1e-15) {
            throw InputError("matrix_log_unitary: branch cut angle must lie in (-pi, pi]");
        }
        cut = wrap_angle(cut);
    }

    ComplexVector logs(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double phi = std::arg(ev(i));
        if (std::abs(std::remainder(phi - cut, 2.0 * kPi)) < 1e-8) {
            std::ostringstream os;
            os << "matrix_log_unitary: eigenvalue " << ev(i) << " lies on the branch cut at angle "
               << cut << "; largest spectral gap is bisected by " << suggested;
            throw BranchCutError(os.str(), suggested);
        }
        // the 2 pi window bounded by the cut that contains angle 0
        const double lower = cut > 0.0 ? cut - 2.0 * kPi : cut;
        double shifted = std::fmod(phi - lower, 2.0 * kPi);
        if (shifted < 0.0) shifted += 2.0 * kPi;
        logs(i) = Complex{std::log(std::abs(ev(i))), lower + shifted};
    }
    return Superoperator(q * logs.asDiagonal() * q.adjoint());
}

} // namespace risim
