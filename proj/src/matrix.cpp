#include "chirplab/matrix.hpp"

#include "chirplab/common.hpp"

namespace chirplab {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw ValidationError("matmul: inner dimensions differ (" + std::to_string(a.cols) +
                              " vs " + std::to_string(b.rows) + ")");
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) {
        throw ValidationError("matmul_bt: inner dimensions differ");
    }
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.rows; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                sum += a(i, k) * b(j, k);
            }
            out(i, j) = sum;
        }
    }
    return out;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) {
        throw ValidationError("matmul_at: inner dimensions differ");
    }
    Matrix out(a.cols, b.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ari = a(r, i);
            if (ari == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += ari * b(r, j);
            }
        }
    }
    return out;
}

std::vector<double> column_sums(const Matrix& a) {
    std::vector<double> sums(a.cols, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < a.cols; ++c) {
            sums[c] += a(r, c);
        }
    }
    return sums;
}

}  // namespace chirplab
