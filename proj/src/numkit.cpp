#include "qts/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qts {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
           << "x" << b.cols();
        throw std::invalid_argument(os.str());
    }
}

} // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> entries)
    : rows_(rows), cols_(cols), data_(entries) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

ComplexMatrix ComplexMatrix::conj() const {
    ComplexMatrix out(*this);
    for (auto& z : out.data_) z = std::conj(z);
    return out;
}

cplx ComplexMatrix::trace() const {
    if (!is_square()) throw std::invalid_argument("trace: matrix is not square");
    cplx t{0.0, 0.0};
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx scale) {
    for (auto& z : data_) z *= scale;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows(), b.cols());
    multiply_into(a, b, out);
    return out;
}

void multiply_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimensions differ");
    if (out.rows() != a.rows() || out.cols() != b.cols()) out = ComplexMatrix(a.rows(), b.cols());
    const std::size_t n = a.rows(), m = b.cols(), k = a.cols();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) out(i, j) = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const cplx ail = a(i, l);
            if (ail == cplx{}) continue;
            for (std::size_t j = 0; j < m; ++j) out(i, j) += ail * b(l, j);
        }
    }
}

void multiply_adjoint_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out) {
    if (a.cols() != b.cols()) throw std::invalid_argument("multiply_adjoint: inner dimensions differ");
    if (out.rows() != a.rows() || out.cols() != b.rows()) out = ComplexMatrix(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            cplx s{0.0, 0.0};
            for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * std::conj(b(j, l));
            out(i, j) = s;
        }
}

ComplexVector operator*(const ComplexMatrix& a, std::span<const cplx> v) {
    if (a.cols() != v.size()) throw std::invalid_argument("matvec: dimension mismatch");
    ComplexVector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx s{0.0, 0.0};
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

double frobenius_norm(const ComplexMatrix& m) {
    double s = 0.0;
    for (const auto& z : m.data()) s += std::norm(z);
    return std::sqrt(s);
}

double norm1(const ComplexMatrix& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

double max_abs(const ComplexMatrix& m) {
    double best = 0.0;
    for (const auto& z : m.data()) best = std::max(best, std::abs(z));
    return best;
}

double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("hermiticity_defect: matrix is not square");
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    return worst;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

ComplexVector vectorize(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("vectorize: matrix is not square");
    const std::size_t dim = m.rows();
    ComplexVector v(dim * dim);
    for (std::size_t j = 0; j < dim; ++j)
        for (std::size_t i = 0; i < dim; ++i) v[i + dim * j] = m(i, j);
    return v;
}

ComplexMatrix unvectorize(std::span<const cplx> v, std::size_t dim) {
    if (v.size() != dim * dim) {
        std::ostringstream os;
        os << "unvectorize: vector of length " << v.size() << " cannot form a " << dim << "x"
           << dim << " matrix";
        throw std::invalid_argument(os.str());
    }
    ComplexMatrix m(dim, dim);
    for (std::size_t j = 0; j < dim; ++j)
        for (std::size_t i = 0; i < dim; ++i) m(i, j) = v[i + dim * j];
    return m;
}

ComplexMatrix inverse(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("inverse: matrix is not square");
    const std::size_t n = m.rows();
    ComplexMatrix lu(m);
    ComplexMatrix inv = ComplexMatrix::identity(n);
    const double scale = std::max(max_abs(m), std::numeric_limits<double>::min());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
        if (std::abs(lu(piv, k)) <= kEps * kEps * scale) {
            throw SolverFailure("inverse: matrix is singular to working precision", 0.0);
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(lu(k, j), lu(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        }
        const cplx pivot = lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = lu(i, k) / pivot;
            if (f == cplx{}) continue;
            for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (std::size_t j = 0; j < n; ++j) inv(i, j) -= f * inv(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = inv(kk, j);
            for (std::size_t l = kk + 1; l < n; ++l) s -= lu(kk, l) * inv(l, j);
            inv(kk, j) = s / lu(kk, kk);
        }
    }
    return inv;
}

ComplexMatrix expm(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("expm: matrix is not square");
    const std::size_t n = m.rows();
    const double nrm = norm1(m);
    int squarings = 0;
    if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    ComplexMatrix a = m * cplx(std::ldexp(1.0, -squarings), 0.0);

    ComplexMatrix result = ComplexMatrix::identity(n);
    ComplexMatrix term = ComplexMatrix::identity(n);
    ComplexMatrix scratch(n, n);
    for (int k = 1; k <= 30; ++k) {
        multiply_into(term, a, scratch);
        scratch *= cplx(1.0 / k, 0.0);
        std::swap(term, scratch);
        result += term;
        if (max_abs(term) <= kEps * max_abs(result)) break;
    }
    for (int s = 0; s < squarings; ++s) {
        multiply_into(result, result, scratch);
        std::swap(result, scratch);
    }
    return result;
}

namespace {

// Reduce to upper Hessenberg form in place, accumulating the unitary into q.
void hessenberg_reduce(ComplexMatrix& h, ComplexMatrix& q) {
    const std::size_t n = h.rows();
    if (n < 3) return;
    std::vector<cplx> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
        xnorm = std::sqrt(xnorm);
        if (xnorm == 0.0) continue;
        const cplx x0 = h(k + 1, k);
        const cplx phase = (std::abs(x0) == 0.0) ? cplx(1.0, 0.0) : x0 / std::abs(x0);
        const cplx alpha = -phase * xnorm;
        std::fill(v.begin(), v.end(), cplx{});
        for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
        v[k + 1] -= alpha;
        double vnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm += std::norm(v[i]);
        vnorm = std::sqrt(vnorm);
        if (vnorm == 0.0) continue;
        for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

        // h <- (I - 2 v v^H) h
        for (std::size_t j = 0; j < n; ++j) {
            cplx s{};
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
            s *= 2.0;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i] * s;
        }
        // h <- h (I - 2 v v^H), q <- q (I - 2 v v^H)
        for (ComplexMatrix* target : {&h, &q}) {
            ComplexMatrix& t = *target;
            for (std::size_t i = 0; i < n; ++i) {
                cplx s{};
                for (std::size_t j = k + 1; j < n; ++j) s += t(i, j) * v[j];
                s *= 2.0;
                for (std::size_t j = k + 1; j < n; ++j) t(i, j) -= s * std::conj(v[j]);
            }
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

struct Givens {
    double c;
    cplx s;
};

// Rotation G with G [x; y] = [r; 0].
Givens make_givens(cplx x, cplx y) {
    const double ax = std::abs(x);
    const double r = std::hypot(ax, std::abs(y));
    if (r == 0.0) return {1.0, cplx{}};
    if (ax == 0.0) return {0.0, cplx(1.0, 0.0)};
    return {ax / r, (x / ax) * std::conj(y) / r};
}

void rotate_rows(ComplexMatrix& m, std::size_t k, const Givens& g, std::size_t col_begin) {
    for (std::size_t j = col_begin; j < m.cols(); ++j) {
        const cplx a = m(k, j), b = m(k + 1, j);
        m(k, j) = g.c * a + g.s * b;
        m(k + 1, j) = -std::conj(g.s) * a + g.c * b;
    }
}

void rotate_cols(ComplexMatrix& m, std::size_t k, const Givens& g, std::size_t row_end) {
    for (std::size_t i = 0; i < row_end; ++i) {
        const cplx a = m(i, k), b = m(i, k + 1);
        m(i, k) = a * g.c + b * std::conj(g.s);
        m(i, k + 1) = -a * g.s + b * g.c;
    }
}

cplx wilkinson_shift(const ComplexMatrix& t, std::size_t iu) {
    const cplx a = t(iu - 1, iu - 1), b = t(iu - 1, iu), c = t(iu, iu - 1), d = t(iu, iu);
    const cplx half = 0.5 * (a - d);
    const cplx disc = std::sqrt(half * half + b * c);
    const cplx mu1 = 0.5 * (a + d) + disc;
    const cplx mu2 = 0.5 * (a + d) - disc;
    return std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
}

// Complex Schur form by single-shift QR on a Hessenberg matrix.
void schur_reduce(ComplexMatrix& t, ComplexMatrix& q) {
    const std::size_t n = t.rows();
    if (n < 2) return;
    const double anorm = std::max(frobenius_norm(t), std::numeric_limits<double>::min());
    const std::size_t max_iter = 30 * n;
    std::size_t iu = n - 1;
    std::size_t iter = 0, total = 0;
    while (iu > 0) {
        std::size_t il = iu;
        while (il > 0) {
            double scale = std::abs(t(il - 1, il - 1)) + std::abs(t(il, il));
            if (scale == 0.0) scale = anorm;
            if (std::abs(t(il, il - 1)) <= kEps * scale) break;
            --il;
        }
        if (il > 0) t(il, il - 1) = 0.0;
        if (il == iu) {
            --iu;
            iter = 0;
            continue;
        }
        ++iter;
        if (++total > max_iter) {
            throw SolverFailure("eig_general: QR iteration did not converge",
                                std::abs(t(iu, iu - 1)));
        }
        cplx shift;
        if (iter == 10 || iter == 20) {
            shift = std::abs(t(iu, iu - 1).real()) +
                    (iu >= 2 ? std::abs(t(iu - 1, iu - 2).real()) : 0.0);
        } else {
            shift = wilkinson_shift(t, iu);
        }

        cplx x = t(il, il) - shift;
        cplx y = t(il + 1, il);
        for (std::size_t k = il; k < iu; ++k) {
            if (k > il) {
                x = t(k, k - 1);
                y = t(k + 1, k - 1);
            }
            const Givens g = make_givens(x, y);
            rotate_rows(t, k, g, k > il ? k - 1 : il);
            rotate_cols(t, k, g, std::min(k + 3, iu + 1));
            rotate_cols(q, k, g, n);
            if (k > il) t(k + 1, k - 1) = 0.0;
        }
    }
}

// Eigenvectors of an upper-triangular matrix, columns with unit diagonal entry.
ComplexMatrix triangular_eigenvectors(const ComplexMatrix& t) {
    const std::size_t n = t.rows();
    const double smin = std::max(kEps * frobenius_norm(t), std::numeric_limits<double>::min());
    ComplexMatrix x(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        x(k, k) = 1.0;
        const cplx lambda = t(k, k);
        for (std::size_t i = k; i-- > 0;) {
            cplx s{};
            for (std::size_t j = i + 1; j <= k; ++j) s += t(i, j) * x(j, k);
            cplx denom = t(i, i) - lambda;
            if (std::abs(denom) < smin) denom = smin;
            x(i, k) = -s / denom;
        }
    }
    return x;
}

} // namespace

SpectralDecomposition eig_general(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("eig_general: matrix is not square");
    const std::size_t n = m.rows();
    if (n > kMaxEigenDimension) throw std::invalid_argument("eig_general: dimension exceeds 256");
    for (const auto& z : m.data())
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("eig_general: non-finite entry");

    SpectralDecomposition d;
    d.matrix_norm = frobenius_norm(m);
    if (n == 0) return d;

    ComplexMatrix t(m);
    ComplexMatrix q = ComplexMatrix::identity(n);
    hessenberg_reduce(t, q);
    schur_reduce(t, q);

    d.eigenvalues.resize(n);
    for (std::size_t k = 0; k < n; ++k) d.eigenvalues[k] = t(k, k);

    ComplexMatrix r = q * triangular_eigenvectors(t);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::norm(r(i, k));
        s = std::sqrt(s);
        for (std::size_t i = 0; i < n; ++i) r(i, k) /= s;
    }
    d.right = r;
    try {
        d.left = inverse(r);
        d.condition = norm1(r) * norm1(d.left);
    } catch (const SolverFailure&) {
        d.left = ComplexMatrix(n, n);
        d.condition = std::numeric_limits<double>::infinity();
    }

    const double tol = kClusterTolerance * d.matrix_norm;
    for (std::size_t i = 0; i < n && !d.has_cluster; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(d.eigenvalues[i] - d.eigenvalues[j]) <= tol) {
                d.has_cluster = true;
                break;
            }
    return d;
}

ComplexMatrix matrix_function_via_spectrum(const SpectralDecomposition& d,
                                           const std::function<cplx(cplx)>& f) {
    if (d.defective()) {
        std::ostringstream os;
        os << "matrix_function_via_spectrum: eigenvector condition " << d.condition
           << " exceeds " << kDefectiveCondition << "; use the ODE propagator instead";
        throw DefectiveSpectrum(os.str());
    }
    const std::size_t n = d.eigenvalues.size();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx fk = f(d.eigenvalues[k]);
        if (fk == cplx{}) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx ri = fk * d.right(i, k);
            for (std::size_t j = 0; j < n; ++j) out(i, j) += ri * d.left(k, j);
        }
    }
    return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
    ComplexMatrix h = m + m.adjoint();
    h *= 0.5;
    const auto d = eig_general(h);
    std::vector<double> out;
    out.reserve(d.eigenvalues.size());
    for (const auto& z : d.eigenvalues) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace qts
