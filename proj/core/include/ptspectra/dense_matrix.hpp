#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace ptspectra {

using Complex = std::complex<double>;

// Dense complex matrix, row-major storage.
class DenseMatrix {
public:
    DenseMatrix() : rows_(0), cols_(0) {}

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0, 0.0)) {}

    // Row-major nested initializer, validated for finiteness.
    DenseMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw std::invalid_argument("DenseMatrix: ragged initializer");
            for (const auto& v : r) data_.push_back(v);
        }
        assert_finite();
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<Complex>& data() const { return data_; }
    std::vector<Complex>& data() { return data_; }

    // Invariant check: every entry finite (no NaN/Inf). Builders call this
    // before handing a matrix to callers.
    void assert_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("DenseMatrix: non-finite entry");
    }

    DenseMatrix conj_transpose() const {
        DenseMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    DenseMatrix transpose() const {
        DenseMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    // (M + M^H)/2
    DenseMatrix hermitian_part() const {
        require_square("hermitian_part");
        DenseMatrix m(rows_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < rows_; ++j)
                m(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (const auto& v : data_) s = std::max(s, std::abs(v));
        return s;
    }

    friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
        check_same_shape(a, b, "operator+");
        DenseMatrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.data_.size(); ++k) m.data_[k] = a.data_[k] + b.data_[k];
        return m;
    }

    friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
        check_same_shape(a, b, "operator-");
        DenseMatrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.data_.size(); ++k) m.data_[k] = a.data_[k] - b.data_[k];
        return m;
    }

    friend DenseMatrix operator*(Complex s, const DenseMatrix& a) {
        DenseMatrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.data_.size(); ++k) m.data_[k] = s * a.data_[k];
        return m;
    }

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
        if (a.cols_ != b.rows_)
            throw std::invalid_argument("DenseMatrix multiply: shape mismatch");
        DenseMatrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
            }
        }
        return m;
    }

    void require_square(const char* who) const {
        if (!square()) throw std::invalid_argument(std::string(who) + ": matrix not square");
    }

private:
    static void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* who) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw std::invalid_argument(std::string(who) + ": shape mismatch");
    }

    std::size_t rows_, cols_;
    std::vector<Complex> data_;
};

// Kronecker product (row-major blocks): (A ⊗ B)[(i·p)+k, (j·q)+l] = A(i,j)·B(k,l).
inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    m(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return m;
}

} // namespace ptspectra
