#ifndef FISSIONLAB_MATRIX_HPP
#define FISSIONLAB_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "fissionlab/errors.hpp"

namespace fissionlab {

// Dense row-major matrix of doubles. Count data is stored as exact integral
// doubles so the thinning sum identity x1 + x2 == x holds bit-for-bit.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw DimMismatchError("matrix data size does not match rows*cols");
    }
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& r : rows) {
            if (r.size() != m.cols_)
                throw DimMismatchError("ragged initializer for Matrix");
            std::size_t j = 0;
            for (double v : r) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Symmetric positive semi-definite matrix with a clamped Cholesky factor.
// Pivots in [-PSD_TOL, 0] are treated as exactly zero; anything below fails.
class CovMatrix {
public:
    static constexpr double SYM_TOL = 1e-12;
    static constexpr double PSD_TOL = 1e-10;

    CovMatrix() = default;
    explicit CovMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw DimMismatchError("covariance matrix must be square");
        for (std::size_t i = 0; i < m_.rows(); ++i)
            for (std::size_t j = i + 1; j < m_.cols(); ++j) {
                if (std::abs(m_(i, j) - m_(j, i)) > SYM_TOL * std::max(1.0, std::abs(m_(i, j))))
                    throw DimMismatchError("covariance matrix is not symmetric");
                double s = 0.5 * (m_(i, j) + m_(j, i));
                m_(i, j) = m_(j, i) = s;
            }
    }
    static CovMatrix identity(std::size_t p) {
        Matrix m(p, p);
        for (std::size_t i = 0; i < p; ++i) m(i, i) = 1.0;
        return CovMatrix(std::move(m));
    }
    static CovMatrix scaled_identity(std::size_t p, double s) {
        Matrix m(p, p);
        for (std::size_t i = 0; i < p; ++i) m(i, i) = s;
        return CovMatrix(std::move(m));
    }
    // Common pairwise correlation rho, unit (or given) variances.
    static CovMatrix equicorrelated(std::size_t p, double rho, double var = 1.0) {
        Matrix m(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) m(i, j) = (i == j) ? var : rho * var;
        return CovMatrix(std::move(m));
    }

    std::size_t dim() const { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    const Matrix& matrix() const { return m_; }

    CovMatrix scaled(double c) const {
        Matrix m = m_;
        for (double& v : m.data()) v *= c;
        return CovMatrix(std::move(m));
    }

    // Lower-triangular factor L with LL^T equal to the matrix up to pivot
    // clamping. Throws DecompositionError if a pivot falls below -PSD_TOL.
    Matrix cholesky() const {
        const std::size_t p = dim();
        Matrix L(p, p);
        for (std::size_t j = 0; j < p; ++j) {
            double d = m_(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
            if (d < -PSD_TOL)
                throw DecompositionError("covariance matrix is not positive semi-definite");
            if (d < 0.0) d = 0.0;
            L(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < p; ++i) {
                double s = m_(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
                L(i, j) = (L(j, j) > 0.0) ? s / L(j, j) : 0.0;
            }
        }
        return L;
    }

    CovMatrix plus(const CovMatrix& o, double sign = 1.0) const {
        if (o.dim() != dim()) throw DimMismatchError("covariance dimension mismatch");
        Matrix m = m_;
        for (std::size_t i = 0; i < m.data().size(); ++i)
            m.data()[i] += sign * o.m_.data()[i];
        return CovMatrix(std::move(m));
    }

private:
    Matrix m_;
};

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance_of(std::span<const double> v, bool unbiased = true) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(unbiased ? n - 1 : n);
}

// Pearson correlation; 0 when either side is constant.
inline double correlation_of(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw LengthMismatchError("correlation inputs differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace fissionlab

#endif
