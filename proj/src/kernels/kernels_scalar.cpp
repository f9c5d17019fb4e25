#include "pseudovec/kernels.hpp"

// Reference kernels. Plain sequential loops define the semantics the
// vectorized variants must reproduce (up to reassociation rounding).

namespace pseudovec::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= alpha;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void matvec(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out) {
    for (std::size_t r = 0; r < rows; ++r)
        out[r] = dot(m + r * cols, v, cols);
}

void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols,
         double* m) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy(alpha * x[r], y, m + r * cols, cols);
}

} // namespace pseudovec::kernels::scalar
