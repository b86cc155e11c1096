#pragma once

#include <cstddef>

// Dense vector kernels used by the simplex solver's inner loops.
//
// Each kernel has a scalar reference implementation and an AVX2 variant,
// selected once at startup (or forced via set_backend / the DPP_KERNEL
// environment variable, values "scalar" or "avx2"). axpy/scale are
// elementwise and bit-identical across backends (the project builds with
// -ffp-contract=off, so the scalar loop performs the same mul+add rounding
// as the unfused vector ops). min_value/argmin are exact across backends
// because IEEE min is associative; dot differs only in summation order.
namespace dpp::kern {

enum class Backend { Scalar, Avx2 };

bool avx2_supported();
Backend active_backend();
void set_backend(Backend backend);

// y[i] += a * x[i]
void axpy(double* y, double a, const double* x, std::size_t n);

// x[i] *= a
void scale(double* x, double a, std::size_t n);

double dot(const double* x, const double* y, std::size_t n);

double min_value(const double* x, std::size_t n);

// First index attaining the minimum (strict-less scan order).
std::size_t argmin(const double* x, std::size_t n);

namespace detail {
void axpy_scalar(double* y, double a, const double* x, std::size_t n);
void scale_scalar(double* x, double a, std::size_t n);
double dot_scalar(const double* x, const double* y, std::size_t n);
double min_value_scalar(const double* x, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void axpy_avx2(double* y, double a, const double* x, std::size_t n);
void scale_avx2(double* x, double a, std::size_t n);
double dot_avx2(const double* x, const double* y, std::size_t n);
double min_value_avx2(const double* x, std::size_t n);
#endif
}  // namespace detail

}  // namespace dpp::kern
