#include "dpp/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <limits>

namespace dpp::kern {

namespace detail {

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double min_value_scalar(const double* x, std::size_t n) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] < m) m = x[i];
  return m;
}

}  // namespace detail

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

Backend pick_default_backend() {
  if (const char* env = std::getenv("DPP_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::Avx2;
  }
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = pick_default_backend();

}  // namespace

Backend active_backend() { return g_backend; }

void set_backend(Backend backend) {
  if (backend == Backend::Avx2 && !avx2_supported()) backend = Backend::Scalar;
  g_backend = backend;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
  if (g_backend == Backend::Avx2) {
    detail::axpy_avx2(y, a, x, n);
    return;
  }
#endif
  detail::axpy_scalar(y, a, x, n);
}

void scale(double* x, double a, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
  if (g_backend == Backend::Avx2) {
    detail::scale_avx2(x, a, n);
    return;
  }
#endif
  detail::scale_scalar(x, a, n);
}

double dot(const double* x, const double* y, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
  if (g_backend == Backend::Avx2) return detail::dot_avx2(x, y, n);
#endif
  return detail::dot_scalar(x, y, n);
}

double min_value(const double* x, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
  if (g_backend == Backend::Avx2) return detail::min_value_avx2(x, n);
#endif
  return detail::min_value_scalar(x, n);
}

std::size_t argmin(const double* x, std::size_t n) {
  // Two passes: a backend-exact min reduction, then a scan for its first
  // occurrence. Keeps the chosen index identical across backends.
  if (n == 0) return 0;
  const double m = min_value(x, n);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == m) return i;
  return 0;  // all-NaN input
}

}  // namespace dpp::kern
