#pragma once

#include <cstddef>

// Data-parallel inner loops behind the trainer, the mapping and the
// evaluator. The scalar kernels are the semantic reference; the AVX2
// variants are selected once at startup when the CPU supports them and
// are equivalence-tested against the reference. Set PSEUDOVEC_KERNELS to
// "scalar" or "avx2" to override the automatic choice.
namespace pseudovec::kernels {

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x *= alpha
void scale(double alpha, double* x, std::size_t n);

double squared_distance(const double* a, const double* b, std::size_t n);

// out = m * v for row-major m of shape (rows x cols)
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out);

// m += alpha * x * y^T, row-major m of shape (rows x cols)
void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols,
         double* m);

// "scalar" or "avx2"
const char* active_backend();

// Forces "scalar", "avx2" or "auto". Returns false (and leaves the
// selection unchanged) when the requested backend is unavailable.
bool force_backend(const char* name);

bool avx2_compiled();
bool avx2_supported();

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out);
void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols,
         double* m);
} // namespace scalar

// Present only in x86-64 builds; guard calls with avx2_compiled().
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out);
void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols,
         double* m);
} // namespace avx2

} // namespace pseudovec::kernels
