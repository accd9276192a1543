#include "punctr/tensor.hpp"

#include <cassert>

namespace punctr {

Matrix matmul(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.rows);
    Matrix out(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (size_t k = 0; k < a.cols; ++k) {
            double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = b.row(k);
            for (size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.cols);
    Matrix out(a.rows, b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double sum = 0.0;
            for (size_t k = 0; k < a.cols; ++k) sum += arow[k] * brow[k];
            orow[j] = sum;
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    assert(a.rows == b.rows);
    Matrix out(a.cols, b.cols);
    for (size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (size_t i = 0; i < a.cols; ++i) {
            double av = arow[i];
            if (av == 0.0) continue;
            double* orow = out.row(i);
            for (size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

void add_inplace(Matrix& acc, const Matrix& m) {
    assert(acc.rows == m.rows && acc.cols == m.cols);
    for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += m.data[i];
}

void add_bias_inplace(Matrix& m, const Matrix& bias) {
    assert(bias.rows == 1 && bias.cols == m.cols);
    for (size_t i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        for (size_t j = 0; j < m.cols; ++j) row[j] += bias.data[j];
    }
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols);
    for (size_t i = 0; i < m.rows; ++i) {
        const double* row = m.row(i);
        for (size_t j = 0; j < m.cols; ++j) out.data[j] += row[j];
    }
    return out;
}

}  // namespace punctr
