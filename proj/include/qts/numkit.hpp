// numkit.hpp: dense complex linear algebra: matrices, Kronecker products,
// column-stacking vectorization and a non-Hermitian eigensolver.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qts {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

/// Dense complex matrix with row-major storage.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    /// Entries are given in row-major order.
    ComplexMatrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> entries);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const cplx> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conj() const;

    /// Sum of the diagonal; throws std::invalid_argument on non-square input.
    cplx trace() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(cplx scale);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexVector operator*(const ComplexMatrix& a, std::span<const cplx> v);

/// out = a * b without allocating; out must not alias a or b.
void multiply_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out);
/// out = a * b^dagger without allocating; out must not alias a or b.
void multiply_adjoint_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out);

double frobenius_norm(const ComplexMatrix& m);
double norm1(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);
double norm2(std::span<const cplx> v);

/// max |m - m^dagger|
double hermiticity_defect(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Column stacking: v[i + dim*j] = m(i, j).
ComplexVector vectorize(const ComplexMatrix& m);
ComplexMatrix unvectorize(std::span<const cplx> v, std::size_t dim);

/// Inverse by LU with partial pivoting; throws SolverFailure when singular.
ComplexMatrix inverse(const ComplexMatrix& m);

/// Matrix exponential by scaling and squaring with a Taylor core.
ComplexMatrix expm(const ComplexMatrix& m);

/// Ascending real eigenvalues of a Hermitian matrix (the input is symmetrized first).
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

struct SolverFailure : std::runtime_error {
    SolverFailure(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

struct DefectiveSpectrum : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Condition estimates above this mark a spectrum as (numerically) defective.
inline constexpr double kDefectiveCondition = 1e8;
/// Eigenvalues closer than this times ||M|| form a cluster.
inline constexpr double kClusterTolerance = 1e-10;
inline constexpr std::size_t kMaxEigenDimension = 256;

struct SpectralDecomposition {
    ComplexVector eigenvalues;
    ComplexMatrix right;    // columns are right eigenvectors, unit 2-norm
    ComplexMatrix left;     // rows are left eigenvectors, left * right == I
    double condition = 0.0; // ||R||_1 ||R^-1||_1
    bool has_cluster = false;
    double matrix_norm = 0.0;

    bool defective() const { return !(condition <= kDefectiveCondition); }
};

/// Full eigendecomposition via Hessenberg reduction and shifted complex QR.
SpectralDecomposition eig_general(const ComplexMatrix& m);

/// Sum_k f(lambda_k) |r_k><l_k|. Throws DefectiveSpectrum when the decomposition
/// is too ill-conditioned to be trusted.
ComplexMatrix matrix_function_via_spectrum(const SpectralDecomposition& d,
                                           const std::function<cplx(cplx)>& f);

} // namespace qts
