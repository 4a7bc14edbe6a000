#pragma once

// Small dense linear algebra for the detectors. Every matrix the receiver
// touches is at most 8x8 (4 layers, doubled by the real-valued model), so the
// storage is a plain row-major vector and the kernels are straight loops.

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace rcsmld {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

class NotPositiveDefinite : public std::runtime_error {
public:
    explicit NotPositiveDefinite(std::size_t pivot)
        : std::runtime_error("hpd_solve: matrix is not positive definite (pivot " +
                             std::to_string(pivot) + ")"),
          pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

namespace detail {
inline double conj_of(double v) { return v; }
inline cdouble conj_of(const cdouble& v) { return std::conj(v); }
inline double real_of(double v) { return v; }
inline double real_of(const cdouble& v) { return v.real(); }
inline double abs2(double v) { return v * v; }
inline double abs2(const cdouble& v) { return std::norm(v); }
inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const cdouble& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
}  // namespace detail

template <typename T>
class DenseMatrix {
public:
    using value_type = T;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("DenseMatrix: entry count does not match rows*cols");
    }
    DenseMatrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<const T> data() const noexcept { return data_; }
    std::span<T> data() noexcept { return data_; }
    std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<T> column(std::size_t c) const {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    DenseMatrix adjoint() const {
        DenseMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = detail::conj_of((*this)(r, c));
        return out;
    }

    bool all_finite() const {
        for (const auto& v : data_)
            if (!detail::finite(v)) return false;
        return true;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += detail::abs2(v);
        return std::sqrt(s);
    }

    DenseMatrix& operator+=(const DenseMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    DenseMatrix& operator-=(const DenseMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    DenseMatrix& operator*=(T s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
    friend DenseMatrix operator*(DenseMatrix a, T s) { return a *= s; }
    friend DenseMatrix operator*(T s, DenseMatrix a) { return a *= s; }

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: inner dimensions differ");
        DenseMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend std::vector<T> operator*(const DenseMatrix& a, std::span<const T> x) {
        if (a.cols_ != x.size()) throw std::invalid_argument("matrix-vector product: dimension mismatch");
        std::vector<T> out(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            T acc{};
            for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * x[k];
            out[i] = acc;
        }
        return out;
    }
    friend std::vector<T> operator*(const DenseMatrix& a, const std::vector<T>& x) {
        return a * std::span<const T>(x);
    }

private:
    void require_same_shape(const DenseMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CMatrix = DenseMatrix<cdouble>;
using RMatrix = DenseMatrix<double>;

/// G = H^H H.
template <typename T>
DenseMatrix<T> gram(const DenseMatrix<T>& h) {
    const std::size_t n = h.cols();
    DenseMatrix<T> g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            T acc{};
            for (std::size_t r = 0; r < h.rows(); ++r) acc += detail::conj_of(h(r, i)) * h(r, j);
            g(i, j) = acc;
            g(j, i) = detail::conj_of(acc);
        }
        g(i, i) = T(detail::real_of(g(i, i)));
    }
    return g;
}

/// z = H^H y.
template <typename T>
std::vector<T> matched_filter(const DenseMatrix<T>& h, std::span<const T> y) {
    if (y.size() != h.rows()) throw std::invalid_argument("matched_filter: y length must equal rows of H");
    std::vector<T> z(h.cols());
    for (std::size_t c = 0; c < h.cols(); ++c) {
        T acc{};
        for (std::size_t r = 0; r < h.rows(); ++r) acc += detail::conj_of(h(r, c)) * y[r];
        z[c] = acc;
    }
    return z;
}
template <typename T>
std::vector<T> matched_filter(const DenseMatrix<T>& h, const std::vector<T>& y) {
    return matched_filter(h, std::span<const T>(y));
}

/// Lower Cholesky factor L of a Hermitian positive definite A (A = L L^H).
/// A pivot at or below 1e-12 times the largest diagonal magnitude is treated as
/// loss of definiteness.
template <typename T>
DenseMatrix<T> cholesky(const DenseMatrix<T>& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(detail::real_of(a(i, i))));
    const double tol = 1e-12 * scale;

    DenseMatrix<T> l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = detail::real_of(a(j, j));
        for (std::size_t k = 0; k < j; ++k) d -= detail::abs2(l(j, k));
        if (!(d > tol)) throw NotPositiveDefinite(j);
        const double ljj = std::sqrt(d);
        l(j, j) = T(ljj);
        for (std::size_t i = j + 1; i < n; ++i) {
            T acc = a(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * detail::conj_of(l(j, k));
            l(i, j) = acc / ljj;
        }
    }
    return l;
}

/// Solves A X = B for Hermitian positive definite A.
template <typename T>
DenseMatrix<T> hpd_solve(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    if (b.rows() != a.rows()) throw std::invalid_argument("hpd_solve: B must have as many rows as A");
    const DenseMatrix<T> l = cholesky(a);
    const std::size_t n = a.rows();
    DenseMatrix<T> x = b;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        // forward: L w = b
        for (std::size_t i = 0; i < n; ++i) {
            T acc = x(i, c);
            for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * x(k, c);
            x(i, c) = acc / detail::real_of(l(i, i));
        }
        // backward: L^H x = w
        for (std::size_t ii = n; ii-- > 0;) {
            T acc = x(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k) acc -= detail::conj_of(l(k, ii)) * x(k, c);
            x(ii, c) = acc / detail::real_of(l(ii, ii));
        }
    }
    return x;
}

template <typename T>
std::vector<T> hpd_solve(const DenseMatrix<T>& a, std::span<const T> b) {
    DenseMatrix<T> rhs(b.size(), 1, std::vector<T>(b.begin(), b.end()));
    return hpd_solve(a, rhs).column(0);
}

template <typename T>
double squared_norm(std::span<const T> v) {
    double s = 0.0;
    for (const auto& x : v) s += detail::abs2(x);
    return s;
}
template <typename T>
double squared_norm(const std::vector<T>& v) {
    return squared_norm(std::span<const T>(v));
}

}  // namespace rcsmld
