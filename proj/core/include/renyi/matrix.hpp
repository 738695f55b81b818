#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace renyi {

using cplx = std::complex<double>;

// Dense row-major complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    static ComplexMatrix diagonal(const std::vector<double>& d);
    // |v><v|
    static ComplexMatrix outer(const std::vector<cplx>& v);
    static ComplexMatrix basis_projector(std::size_t n, std::size_t k);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    const std::vector<cplx>& data() const { return data_; }
    std::vector<cplx>& data() { return data_; }

    ComplexMatrix adjoint() const;
    cplx trace() const;
    double real_trace() const { return trace().real(); }
    double frobenius_norm() const;
    double max_abs() const;
    // (M + M^dagger)/2
    ComplexMatrix hermitian_part() const;
    bool is_hermitian(double tol) const;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(cplx s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
std::vector<cplx> apply(const ComplexMatrix& m, const std::vector<cplx>& v);
// A B A^dagger
ComplexMatrix sandwich(const ComplexMatrix& a, const ComplexMatrix& b);
// Re tr(A B)
double trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace renyi
