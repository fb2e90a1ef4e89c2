#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "dmaloc/kernels.hpp"

namespace dmaloc::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("DMALOC_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::kScalar;
  }
  return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernels: operand length mismatch");
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("kernels: ISA not supported on this CPU");
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

#if defined(__x86_64__) || defined(_M_X64)
#define DMALOC_DISPATCH(fn, ...) \
  (active_isa() == Isa::kAvx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define DMALOC_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

cd dotc(std::span<const cd> a, std::span<const cd> b) {
  check_sizes(a.size(), b.size());
  return DMALOC_DISPATCH(dotc, a.data(), b.data(), a.size());
}

cd dotu(std::span<const cd> a, std::span<const cd> b) {
  check_sizes(a.size(), b.size());
  return DMALOC_DISPATCH(dotu, a.data(), b.data(), a.size());
}

double norm2(std::span<const cd> a) { return DMALOC_DISPATCH(norm2, a.data(), a.size()); }

double hadamard_norm2(std::span<const cd> a, std::span<const cd> b) {
  check_sizes(a.size(), b.size());
  return DMALOC_DISPATCH(hadamard_norm2, a.data(), b.data(), a.size());
}

#undef DMALOC_DISPATCH

}  // namespace dmaloc::kernels
