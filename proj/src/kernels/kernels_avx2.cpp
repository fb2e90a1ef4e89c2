// Compiled with -mavx2 -mfma. Only reached through dispatch after a CPUID check.

#include "dmaloc/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace dmaloc::kernels::avx2 {

namespace {

// Interleaved complex<double> layout: one __m256d holds two complex values
// as [re0, im0, re1, im1].
inline const double* as_doubles(const cd* p) { return reinterpret_cast<const double*>(p); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Returns the lane-pair sums (straight, swapped) of products a*b and a*swap(b).
// straight lanes: [ar*br, ai*bi, ...], swapped lanes: [ar*bi, ai*br, ...]
inline void accumulate(const cd* a, const cd* b, std::size_t n, __m256d& straight, __m256d& swapped,
                       std::size_t& done) {
  const double* pa = as_doubles(a);
  const double* pb = as_doubles(b);
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d w0 = _mm256_setzero_pd();
  __m256d w1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d va0 = _mm256_loadu_pd(pa + 2 * k);
    const __m256d vb0 = _mm256_loadu_pd(pb + 2 * k);
    const __m256d va1 = _mm256_loadu_pd(pa + 2 * k + 4);
    const __m256d vb1 = _mm256_loadu_pd(pb + 2 * k + 4);
    s0 = _mm256_fmadd_pd(va0, vb0, s0);
    s1 = _mm256_fmadd_pd(va1, vb1, s1);
    w0 = _mm256_fmadd_pd(va0, _mm256_permute_pd(vb0, 0x5), w0);
    w1 = _mm256_fmadd_pd(va1, _mm256_permute_pd(vb1, 0x5), w1);
  }
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * k);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
    s0 = _mm256_fmadd_pd(va, vb, s0);
    w0 = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), w0);
  }
  straight = _mm256_add_pd(s0, s1);
  swapped = _mm256_add_pd(w0, w1);
  done = k;
}

// Even lanes minus odd lanes, summed.
inline double alt_sum(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return (t[0] - t[1]) + (t[2] - t[3]);
}

}  // namespace

cd dotc(const cd* a, const cd* b, std::size_t n) {
  __m256d straight, swapped;
  std::size_t k = 0;
  accumulate(a, b, n, straight, swapped, k);
  // conj(a)*b: re = ar*br + ai*bi, im = ar*bi - ai*br
  double re = hsum(straight);
  double im = alt_sum(swapped);
  if (k < n) {
    const cd tail = scalar::dotc(a + k, b + k, n - k);
    re += tail.real();
    im += tail.imag();
  }
  return {re, im};
}

cd dotu(const cd* a, const cd* b, std::size_t n) {
  __m256d straight, swapped;
  std::size_t k = 0;
  accumulate(a, b, n, straight, swapped, k);
  // a*b: re = ar*br - ai*bi, im = ar*bi + ai*br
  double re = alt_sum(straight);
  double im = hsum(swapped);
  if (k < n) {
    const cd tail = scalar::dotu(a + k, b + k, n - k);
    re += tail.real();
    im += tail.imag();
  }
  return {re, im};
}

double norm2(const cd* a, std::size_t n) {
  const double* pa = as_doubles(a);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v0 = _mm256_loadu_pd(pa + 2 * k);
    const __m256d v1 = _mm256_loadu_pd(pa + 2 * k + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; k + 2 <= n; k += 2) {
    const __m256d v = _mm256_loadu_pd(pa + 2 * k);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  if (k < n) res += scalar::norm2(a + k, n - k);
  return res;
}

double hadamard_norm2(const cd* a, const cd* b, std::size_t n) {
  const double* pa = as_doubles(a);
  const double* pb = as_doubles(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * k);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
    const __m256d sa = _mm256_mul_pd(va, va);
    const __m256d sb = _mm256_mul_pd(vb, vb);
    // per-complex magnitudes: [|a0|^2, |a0|^2, |a1|^2, |a1|^2]
    const __m256d ma = _mm256_hadd_pd(sa, sa);
    const __m256d mb = _mm256_hadd_pd(sb, sb);
    acc = _mm256_fmadd_pd(ma, mb, acc);
  }
  // each magnitude product appears twice across the lanes
  double res = 0.5 * hsum(acc);
  if (k < n) res += scalar::hadamard_norm2(a + k, b + k, n - k);
  return res;
}

}  // namespace dmaloc::kernels::avx2

#endif
