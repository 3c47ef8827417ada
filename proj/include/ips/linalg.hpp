#pragma once

#include <cstddef>
#include <vector>

namespace ips::linalg {

/// Small dense row-major matrix, just enough for truncated-generator work.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n);

    int rows() const { return r_; }
    int cols() const { return c_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }

    Matrix operator*(const Matrix& o) const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix scaled(double c) const;

    double max_abs() const;
    double one_norm() const;  // max column sum of |.|

  private:
    int r_ = 0, c_ = 0;
    std::vector<double> a_;
};

/// Matrix exponential by fixed Pade(13) scaling-and-squaring; deterministic
/// given the input, accurate to ~1e-13 for the modest norms used here.
Matrix expm(const Matrix& a);

}  // namespace ips::linalg
