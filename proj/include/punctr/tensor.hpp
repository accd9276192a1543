#ifndef PUNCTR_TENSOR_HPP
#define PUNCTR_TENSOR_HPP

#include <cstddef>
#include <vector>

namespace punctr {

// Dense row-major matrix of doubles. Vectors are 1 x n matrices.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    double* row(size_t r) { return data.data() + r * cols; }
    const double* row(size_t r) const { return data.data() + r * cols; }
    size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    bool operator==(const Matrix&) const = default;
};

// out = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// out = a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// out = a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// acc += m (shapes must match)
void add_inplace(Matrix& acc, const Matrix& m);
// adds the 1 x cols bias row to every row
void add_bias_inplace(Matrix& m, const Matrix& bias);
// per-column sums of m as a 1 x cols row (bias gradient)
Matrix column_sums(const Matrix& m);

}  // namespace punctr

#endif  // PUNCTR_TENSOR_HPP
