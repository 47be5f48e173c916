#include "neurodyn/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "neurodyn/kernels.hpp"

namespace neurodyn {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

[[noreturn]] void mismatch(const char* op, std::size_t a, std::size_t b) {
    throw Error(Errc::DimensionMismatch,
                std::string(op) + ": dimension mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

bool finite_all(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

DenseMatrix symmetrized(const DenseMatrix& s) {
    DenseMatrix out = s;
    const std::size_t n = s.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (s(i, j) + s(j, i));
            out(i, j) = m;
            out(j, i) = m;
        }
    return out;
}

void require_symmetric(const DenseMatrix& s, const char* op) {
    if (!s.square()) mismatch(op, s.rows(), s.cols());
    if (!is_symmetric(s)) throw Error(Errc::NonSymmetric, std::string(op) + ": matrix is not symmetric");
}

}  // namespace

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::NonSymmetric: return "NonSymmetric";
        case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
        case Errc::NonPositiveGamma: return "NonPositiveGamma";
        case Errc::DaeNotIntegrable: return "DaeNotIntegrable";
        case Errc::FactorizationFailed: return "FactorizationFailed";
        case Errc::NonFiniteState: return "NonFiniteState";
        case Errc::UnsupportedKind: return "UnsupportedKind";
        case Errc::NotUnique: return "NotUnique";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::NotSettled: return "NotSettled";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// DenseVector / DenseMatrix

DenseVector::DenseVector(std::vector<double> entries) : data_(std::move(entries)) {
    if (!finite_all(data_)) throw Error(Errc::InvalidArgument, "DenseVector: non-finite entry");
}

DenseVector::DenseVector(std::initializer_list<double> entries) : DenseVector(std::vector<double>(entries)) {}

bool DenseVector::all_finite() const noexcept { return finite_all(data_); }

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) mismatch("DenseMatrix", data_.size(), rows * cols);
    if (!finite_all(data_)) throw Error(Errc::InvalidArgument, "DenseMatrix: non-finite entry");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) mismatch("DenseMatrix", r.size(), cols_);
        data_.insert(data_.end(), r.begin(), r.end());
    }
    if (!finite_all(data_)) throw Error(Errc::InvalidArgument, "DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool DenseMatrix::all_finite() const noexcept { return finite_all(data_); }

// ---------------------------------------------------------------------------
// Products and elementwise helpers

DenseVector mat_vec(const DenseMatrix& a, const DenseVector& x) {
    if (a.cols() != x.dim()) mismatch("mat_vec", a.cols(), x.dim());
    DenseVector y(a.rows());
    kernels::gemv(a.values(), a.rows(), a.cols(), x.values(), y.values());
    return y;
}

DenseVector mat_t_vec(const DenseMatrix& a, const DenseVector& x) {
    if (a.rows() != x.dim()) mismatch("mat_t_vec", a.rows(), x.dim());
    DenseVector y(a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) kernels::axpy(x[r], a.row(r), y.values());
    return y;
}

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) mismatch("mat_mul", a.cols(), b.rows());
    DenseMatrix c(a.rows(), b.cols());
    auto cv = c.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::span<double> crow = cv.subspan(i * b.cols(), b.cols());
        for (std::size_t k = 0; k < a.cols(); ++k) kernels::axpy(a(i, k), b.row(k), crow);
    }
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

DenseMatrix gram(const DenseMatrix& a) {
    // Built from the transpose so each entry is a contiguous dot product;
    // the result is exactly symmetric.
    const DenseMatrix at = transpose(a);
    const std::size_t n = a.cols();
    DenseMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernels::dot(at.row(i), at.row(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) mismatch("add", a.rows() * a.cols(), b.rows() * b.cols());
    DenseMatrix c = a;
    kernels::axpy(1.0, b.values(), c.values());
    return c;
}

DenseMatrix add_identity(const DenseMatrix& a, double scale) {
    if (!a.square()) mismatch("add_identity", a.rows(), a.cols());
    DenseMatrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i) c(i, i) += scale;
    return c;
}

DenseMatrix hstack(const DenseMatrix& a, const DenseVector& b) {
    if (a.rows() != b.dim()) mismatch("hstack", a.rows(), b.dim());
    DenseMatrix c(a.rows(), a.cols() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
        c(i, a.cols()) = b[i];
    }
    return c;
}

DenseVector add(const DenseVector& a, const DenseVector& b) {
    if (a.dim() != b.dim()) mismatch("add", a.dim(), b.dim());
    DenseVector c = a;
    kernels::axpy(1.0, b.values(), c.values());
    return c;
}

DenseVector sub(const DenseVector& a, const DenseVector& b) {
    if (a.dim() != b.dim()) mismatch("sub", a.dim(), b.dim());
    DenseVector c = a;
    kernels::axpy(-1.0, b.values(), c.values());
    return c;
}

DenseVector scaled(const DenseVector& a, double s) {
    DenseVector c = a;
    for (double& v : c.values()) v *= s;
    return c;
}

double dot(const DenseVector& a, const DenseVector& b) {
    if (a.dim() != b.dim()) mismatch("dot", a.dim(), b.dim());
    return kernels::dot(a.values(), b.values());
}

double norm2(const DenseVector& a) {
    // Scaled to avoid overflow for states near the divergence guard.
    const double m = max_abs(a);
    if (m == 0.0 || !std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : a.values()) {
        const double q = v / m;
        s += q * q;
    }
    return m * std::sqrt(s);
}

double max_abs(const DenseVector& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

bool is_symmetric(const DenseMatrix& s, double rel_tol) {
    if (!s.square()) return false;
    const double scale = s.max_abs();
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > rel_tol * scale) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Cholesky

CholeskyFactor cholesky(const DenseMatrix& s_in) {
    require_symmetric(s_in, "cholesky");
    const DenseMatrix s = symmetrized(s_in);
    const std::size_t n = s.rows();
    CholeskyFactor f;
    f.dim_ = n;
    f.l_.assign(n * n, 0.0);
    auto& l = f.l_;
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
        if (!(d > 0.0))
            throw Error(Errc::NotPositiveDefinite,
                        "cholesky: non-positive pivot " + std::to_string(d) + " at column " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = v / ljj;
        }
    }
    return f;
}

DenseMatrix CholeskyFactor::lower_matrix() const { return DenseMatrix(dim_, dim_, l_); }

DenseVector CholeskyFactor::solve(const DenseVector& r) const {
    if (r.dim() != dim_) mismatch("chol_solve", dim_, r.dim());
    const std::size_t n = dim_;
    DenseVector y = r;
    for (std::size_t i = 0; i < n; ++i) {
        double v = y[i];
        for (std::size_t k = 0; k < i; ++k) v -= l_[i * n + k] * y[k];
        y[i] = v / l_[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= l_[k * n + ii] * y[k];
        y[ii] = v / l_[ii * n + ii];
    }
    return y;
}

DenseVector chol_solve(const CholeskyFactor& f, const DenseVector& r) { return f.solve(r); }

// ---------------------------------------------------------------------------
// LU

LuFactor lu(const DenseMatrix& a) {
    if (!a.square()) mismatch("lu", a.rows(), a.cols());
    const std::size_t n = a.rows();
    LuFactor f;
    f.dim_ = n;
    f.lu_.assign(a.values().begin(), a.values().end());
    f.perm_.resize(n);
    std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
    auto& m = f.lu_;
    const double tiny = static_cast<double>(std::max<std::size_t>(n, 1)) * kEps * a.max_abs();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m[i * n + k]) > std::abs(m[p * n + k])) p = i;
        if (!(std::abs(m[p * n + k]) > tiny))
            throw Error(Errc::FactorizationFailed, "lu: matrix is numerically singular at column " + std::to_string(k));
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[p * n + j]);
            std::swap(f.perm_[k], f.perm_[p]);
        }
        const double piv = m[k * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = m[i * n + k] / piv;
            m[i * n + k] = factor;
            for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= factor * m[k * n + j];
        }
    }
    return f;
}

DenseVector LuFactor::solve(const DenseVector& r) const {
    if (r.dim() != dim_) mismatch("lu_solve", dim_, r.dim());
    const std::size_t n = dim_;
    DenseVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = r[perm_[i]];
        for (std::size_t k = 0; k < i; ++k) v -= lu_[i * n + k] * y[k];
        y[i] = v;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= lu_[ii * n + k] * y[k];
        y[ii] = v / lu_[ii * n + ii];
    }
    return y;
}

DenseVector solve_dense(const DenseMatrix& a, const DenseVector& b) {
    if (a.rows() != b.dim()) mismatch("solve_dense", a.rows(), b.dim());
    return lu(a).solve(b);
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver

SymEigen sym_eigen(const DenseMatrix& s_in, JacobiOptions opts) {
    require_symmetric(s_in, "sym_eigen");
    DenseMatrix s = symmetrized(s_in);
    const std::size_t n = s.rows();
    DenseMatrix q = DenseMatrix::identity(n);

    double fro = 0.0;
    for (double v : s.values()) fro += v * v;
    fro = std::sqrt(fro);

    auto off_norm = [&] {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * s(i, j) * s(i, j);
        return std::sqrt(off);
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        if (off_norm() <= opts.rel_tol * fro) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double apr = s(p, r);
                if (apr == 0.0) continue;
                const double theta = (s(r, r) - s(p, p)) / (2.0 * apr);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p);
                    const double skr = s(k, r);
                    s(k, p) = c * skp - sn * skr;
                    s(k, r) = sn * skp + c * skr;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k);
                    const double srk = s(r, k);
                    s(p, k) = c * spk - sn * srk;
                    s(r, k) = sn * spk + c * srk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q(k, p);
                    const double qkr = q(k, r);
                    q(k, p) = c * qkp - sn * qkr;
                    q(k, r) = sn * qkp + c * qkr;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s(a, a) < s(b, b); });

    SymEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = s(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = q(i, order[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD, rank, null space, least squares

SvdResult svd(const DenseMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t k = a.cols();
    // Columns of A and V stored contiguously.
    std::vector<std::vector<double>> w(k, std::vector<double>(m));
    std::vector<std::vector<double>> v(k, std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < m; ++i) w[j][i] = a(i, j);
        v[j][j] = 1.0;
    }

    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double alpha = kernels::dot(w[p], w[p]);
                const double beta = kernels::dot(w[q], w[q]);
                const double gamma = kernels::dot(w[p], w[q]);
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[p][i];
                    const double wq = w[q][i];
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vp = v[p][i];
                    const double vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(k);
    for (std::size_t j = 0; j < k; ++j) sigma[j] = std::sqrt(kernels::dot(w[j], w[j]));
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    SvdResult out;
    out.singular_values.resize(k);
    out.u = DenseMatrix(m, k);
    out.v = DenseMatrix(k, k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t j = order[c];
        out.singular_values[c] = sigma[j];
        for (std::size_t i = 0; i < m; ++i) out.u(i, c) = sigma[j] > 0.0 ? w[j][i] / sigma[j] : 0.0;
        for (std::size_t i = 0; i < k; ++i) out.v(i, c) = v[j][i];
    }
    return out;
}

double default_rank_tol(std::size_t n) {
    return std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)) * kEps);
}

namespace {

std::size_t count_above(const std::vector<double>& sigma, double tol) {
    if (sigma.empty() || sigma.front() == 0.0) return 0;
    // sigma_i > tol * sigma_max  <=>  lambda_i(A^T A) > tol^2 * lambda_max
    const double cut = tol * sigma.front();
    return static_cast<std::size_t>(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cut; }));
}

}  // namespace

std::size_t rank(const DenseMatrix& a, double tol) {
    if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "rank: tol must be positive");
    return count_above(svd(a).singular_values, tol);
}

std::size_t rank(const DenseMatrix& a) { return rank(a, default_rank_tol(std::max(a.rows(), a.cols()))); }

DenseMatrix null_space(const DenseMatrix& a) {
    const SvdResult d = svd(a);
    const std::size_t r = count_above(d.singular_values, default_rank_tol(std::max(a.rows(), a.cols())));
    const std::size_t k = a.cols();
    DenseMatrix basis(k, k - r);
    for (std::size_t c = r; c < k; ++c)
        for (std::size_t i = 0; i < k; ++i) basis(i, c - r) = d.v(i, c);
    return basis;
}

LeastSquares least_squares(const DenseMatrix& a, const DenseVector& b) {
    if (a.rows() != b.dim()) mismatch("least_squares", a.rows(), b.dim());
    const SvdResult d = svd(a);
    const std::size_t r = count_above(d.singular_values, default_rank_tol(std::max(a.rows(), a.cols())));
    DenseVector x(a.cols());
    for (std::size_t c = 0; c < r; ++c) {
        double coef = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) coef += d.u(i, c) * b[i];
        coef /= d.singular_values[c];
        for (std::size_t i = 0; i < a.cols(); ++i) x[i] += coef * d.v(i, c);
    }
    const double res = norm2(sub(mat_vec(a, x), b));
    return {std::move(x), res};
}

}  // namespace neurodyn
