#pragma once

// Complex inner-product kernels used by the beamformer solvers and the MLE
// grid search. Every kernel has a scalar reference implementation and, on
// x86-64, an AVX2/FMA variant selected at runtime from CPUID. The two paths
// differ only in summation order.

#include <complex>
#include <span>
#include <string_view>

namespace dmaloc::kernels {

using cd = std::complex<double>;

enum class Isa { kScalar, kAvx2 };

// True when the running CPU can execute the given variant.
bool isa_supported(Isa isa);

// Variant used by the dispatching entry points below. Defaults to the best
// supported one; the DMALOC_SIMD=scalar environment variable pins the
// reference path.
Isa active_isa();

// Overrides dispatch (tests, benchmarks). Throws std::invalid_argument when
// the CPU lacks the requested ISA.
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);

// sum_k conj(a_k) * b_k
cd dotc(std::span<const cd> a, std::span<const cd> b);
// sum_k a_k * b_k
cd dotu(std::span<const cd> a, std::span<const cd> b);
// sum_k |a_k|^2
double norm2(std::span<const cd> a);
// sum_k |a_k * b_k|^2
double hadamard_norm2(std::span<const cd> a, std::span<const cd> b);

namespace scalar {
cd dotc(const cd* a, const cd* b, std::size_t n);
cd dotu(const cd* a, const cd* b, std::size_t n);
double norm2(const cd* a, std::size_t n);
double hadamard_norm2(const cd* a, const cd* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
cd dotc(const cd* a, const cd* b, std::size_t n);
cd dotu(const cd* a, const cd* b, std::size_t n);
double norm2(const cd* a, std::size_t n);
double hadamard_norm2(const cd* a, const cd* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace dmaloc::kernels
