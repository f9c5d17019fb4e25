#include "pseudovec/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace pseudovec::kernels {

namespace {

struct Vtable {
    const char* name;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*ger)(double, const double*, std::size_t, const double*, std::size_t, double*);
};

constexpr Vtable kScalar{"scalar",       scalar::dot,    scalar::axpy, scalar::scale,
                         scalar::squared_distance, scalar::matvec, scalar::ger};

#ifdef PSEUDOVEC_HAVE_AVX2
constexpr Vtable kAvx2{"avx2",         avx2::dot,    avx2::axpy, avx2::scale,
                       avx2::squared_distance, avx2::matvec, avx2::ger};
#endif

bool cpu_has_avx2() {
#if defined(PSEUDOVEC_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Vtable* pick_default() {
#ifdef PSEUDOVEC_HAVE_AVX2
    if (const char* env = std::getenv("PSEUDOVEC_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0)
            return &kScalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2())
            return &kAvx2;
    }
    if (cpu_has_avx2())
        return &kAvx2;
#else
    if (std::getenv("PSEUDOVEC_KERNELS")) {
        // only the scalar backend exists in this build
    }
#endif
    return &kScalar;
}

std::atomic<const Vtable*> g_active{nullptr};

const Vtable& active() {
    const Vtable* v = g_active.load(std::memory_order_acquire);
    if (!v) {
        v = pick_default();
        g_active.store(v, std::memory_order_release);
    }
    return *v;
}

} // namespace

const char* active_backend() { return active().name; }

bool force_backend(const char* name) {
    if (std::strcmp(name, "auto") == 0) {
        g_active.store(pick_default(), std::memory_order_release);
        return true;
    }
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&kScalar, std::memory_order_release);
        return true;
    }
#ifdef PSEUDOVEC_HAVE_AVX2
    if (std::strcmp(name, "avx2") == 0 && cpu_has_avx2()) {
        g_active.store(&kAvx2, std::memory_order_release);
        return true;
    }
#endif
    return false;
}

bool avx2_compiled() {
#ifdef PSEUDOVEC_HAVE_AVX2
    return true;
#else
    return false;
#endif
}

bool avx2_supported() { return cpu_has_avx2(); }

double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) { active().scale(alpha, x, n); }

double squared_distance(const double* a, const double* b, std::size_t n) {
    return active().squared_distance(a, b, n);
}

void matvec(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out) {
    active().matvec(m, rows, cols, v, out);
}

void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols,
         double* m) {
    active().ger(alpha, x, rows, y, cols, m);
}

} // namespace pseudovec::kernels
