#ifndef CHIRPLAB_MATRIX_HPP
#define CHIRPLAB_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace chirplab {

/// Dense row-major matrix of doubles. Just enough linear algebra for the
/// classifier heads; reductions run in a fixed left-to-right order so values
/// are bit-stable across runs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

/// out = a (r x k) * b (k x c)
Matrix matmul(const Matrix& a, const Matrix& b);

/// out = a (r x k) * b^T where b is (c x k)
Matrix matmul_bt(const Matrix& a, const Matrix& b);

/// out = a^T (k x r) * b (r x c), i.e. gram-style product for gradients
Matrix matmul_at(const Matrix& a, const Matrix& b);

/// Column sums of a, as a length-cols vector.
std::vector<double> column_sums(const Matrix& a);

}  // namespace chirplab

#endif
