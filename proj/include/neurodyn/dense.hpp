#pragma once

// Dense real linear algebra at desk scale (n up to a few hundred).
//
// Storage is row-major double. Value types are immutable in spirit: the
// mutable accessors exist for builders and are not used after construction.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "neurodyn/error.hpp"

namespace neurodyn {

class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t dim) : data_(dim, 0.0) {}
    // Throws InvalidArgument on non-finite entries.
    explicit DenseVector(std::vector<double> entries);
    DenseVector(std::initializer_list<double> entries);

    std::size_t dim() const noexcept { return data_.size(); }
    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }
    const std::vector<double>& vec() const noexcept { return data_; }

    bool all_finite() const noexcept;

    friend bool operator==(const DenseVector&, const DenseVector&) = default;

private:
    std::vector<double> data_;
};

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    // Row-major entries; throws DimensionMismatch / InvalidArgument.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    // Nested rows; all rows must have the same length.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    double max_abs() const noexcept;
    bool all_finite() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Elementwise and BLAS-like helpers. Dimension errors throw DimensionMismatch.
DenseVector mat_vec(const DenseMatrix& a, const DenseVector& x);
DenseVector mat_t_vec(const DenseMatrix& a, const DenseVector& x);  // A^T x
DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix gram(const DenseMatrix& a);  // A^T A
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix add_identity(const DenseMatrix& a, double scale = 1.0);
DenseMatrix hstack(const DenseMatrix& a, const DenseVector& b);

DenseVector add(const DenseVector& a, const DenseVector& b);
DenseVector sub(const DenseVector& a, const DenseVector& b);
DenseVector scaled(const DenseVector& a, double s);
double dot(const DenseVector& a, const DenseVector& b);
double norm2(const DenseVector& a);
double max_abs(const DenseVector& a);

bool is_symmetric(const DenseMatrix& s, double rel_tol = 1e-12);

class CholeskyFactor {
public:
    std::size_t dim() const noexcept { return dim_; }
    double lower(std::size_t r, std::size_t c) const { return l_[r * dim_ + c]; }
    DenseMatrix lower_matrix() const;

    // Returns y with S y = r.
    DenseVector solve(const DenseVector& r) const;

private:
    friend CholeskyFactor cholesky(const DenseMatrix& s);
    std::size_t dim_ = 0;
    std::vector<double> l_;
};

// S = L L^T. Input is symmetrized first; throws NonSymmetric or
// NotPositiveDefinite (pivot <= 0).
CholeskyFactor cholesky(const DenseMatrix& s);
DenseVector chol_solve(const CholeskyFactor& f, const DenseVector& r);

// P A = L U with partial pivoting.
class LuFactor {
public:
    std::size_t dim() const noexcept { return dim_; }
    DenseVector solve(const DenseVector& r) const;

private:
    friend LuFactor lu(const DenseMatrix& a);
    std::size_t dim_ = 0;
    std::vector<double> lu_;
    std::vector<std::size_t> perm_;
};

// Throws FactorizationFailed for a numerically singular matrix.
LuFactor lu(const DenseMatrix& a);

// Gaussian elimination with partial pivoting.
DenseVector solve_dense(const DenseMatrix& a, const DenseVector& b);

struct SymEigen {
    std::vector<double> eigenvalues;  // ascending
    DenseMatrix eigenvectors;         // column k pairs with eigenvalues[k]
};

struct JacobiOptions {
    double rel_tol = 1e-12;
    int max_sweeps = 100;
};

// Cyclic Jacobi rotations. Throws NonSymmetric.
SymEigen sym_eigen(const DenseMatrix& s, JacobiOptions opts = {});

// Singular values of A, descending, via one-sided (Hestenes) Jacobi.
struct SvdResult {
    std::vector<double> singular_values;  // descending
    DenseMatrix u;                        // rows x k, columns paired with singular values
    DenseMatrix v;                        // cols x k
};
SvdResult svd(const DenseMatrix& a);

// Default relative tolerance used by rank(): eigenvalues of A^T A below
// n * eps * lambda_max count as zero, i.e. tol = sqrt(n * eps).
double default_rank_tol(std::size_t n);

// Number of eigenvalues of A^T A exceeding tol^2 * lambda_max.
std::size_t rank(const DenseMatrix& a, double tol);
std::size_t rank(const DenseMatrix& a);

// Orthonormal basis (columns) of the numerical null space of A.
DenseMatrix null_space(const DenseMatrix& a);

struct LeastSquares {
    DenseVector x;        // minimum-norm minimizer of ||A x - b||
    double min_residual;  // ||A x - b||_2
};

LeastSquares least_squares(const DenseMatrix& a, const DenseVector& b);

}  // namespace neurodyn
