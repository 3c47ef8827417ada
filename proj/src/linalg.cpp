#include "ips/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace ips::linalg {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::operator*(const Matrix& o) const {
    if (c_ != o.r_) throw std::invalid_argument("Matrix multiply: shape mismatch");
    Matrix out(r_, o.c_);
    for (int i = 0; i < r_; ++i) {
        for (int k = 0; k < c_; ++k) {
            double v = (*this)(i, k);
            if (v == 0.0) continue;
            const double* src = &o.a_[static_cast<std::size_t>(k) * o.c_];
            double* dst = &out.a_[static_cast<std::size_t>(i) * o.c_];
            for (int j = 0; j < o.c_; ++j) dst[j] += v * src[j];
        }
    }
    return out;
}

Matrix Matrix::operator+(const Matrix& o) const {
    Matrix out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += o.a_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& o) const {
    Matrix out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= o.a_[i];
    return out;
}

Matrix Matrix::scaled(double c) const {
    Matrix out = *this;
    for (double& v : out.a_) v *= c;
    return out;
}

double Matrix::max_abs() const {
    double m = 0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

double Matrix::one_norm() const {
    double m = 0;
    for (int j = 0; j < c_; ++j) {
        double s = 0;
        for (int i = 0; i < r_; ++i) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

Matrix expm(const Matrix& a) {
    // Pade(13) with scaling chosen so the scaled one-norm is below ~5.37
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const int n = a.rows();
    double norm = a.one_norm();
    int squarings = 0;
    if (norm > 5.37) squarings = static_cast<int>(std::ceil(std::log2(norm / 5.37)));
    Matrix A = a.scaled(std::pow(0.5, squarings));
    Matrix A2 = A * A;
    Matrix A4 = A2 * A2;
    Matrix A6 = A2 * A4;
    Matrix I = Matrix::identity(n);
    Matrix U_inner = A6.scaled(b[13]) + A4.scaled(b[11]) + A2.scaled(b[9]);
    Matrix U = A * (A6 * U_inner + A6.scaled(b[7]) + A4.scaled(b[5]) + A2.scaled(b[3]) +
                    I.scaled(b[1]));
    Matrix V_inner = A6.scaled(b[12]) + A4.scaled(b[10]) + A2.scaled(b[8]);
    Matrix V = A6 * V_inner + A6.scaled(b[6]) + A4.scaled(b[4]) + A2.scaled(b[2]) + I.scaled(b[0]);
    // solve (V - U) X = (V + U) by Gaussian elimination with partial pivoting
    Matrix P = V - U;
    Matrix Q = V + U;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(P(i, col)) > std::abs(P(best, col))) best = i;
        if (best != col)
            for (int j = 0; j < n; ++j) {
                std::swap(P(col, j), P(best, j));
                std::swap(Q(col, j), Q(best, j));
            }
        double d = P(col, col);
        if (d == 0.0) throw std::runtime_error("expm: singular Pade denominator");
        for (int i = col + 1; i < n; ++i) {
            double f = P(i, col) / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) P(i, j) -= f * P(col, j);
            for (int j = 0; j < n; ++j) Q(i, j) -= f * Q(col, j);
        }
    }
    Matrix X(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = n - 1; i >= 0; --i) {
            double s = Q(i, j);
            for (int k = i + 1; k < n; ++k) s -= P(i, k) * X(k, j);
            X(i, j) = s / P(i, i);
        }
    for (int s = 0; s < squarings; ++s) X = X * X;
    return X;
}

}  // namespace ips::linalg
