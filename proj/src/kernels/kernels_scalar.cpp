#include "dmaloc/kernels.hpp"

namespace dmaloc::kernels::scalar {

cd dotc(const cd* a, const cd* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

cd dotu(const cd* a, const cd* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    re += ar * br - ai * bi;
    im += ar * bi + ai * br;
  }
  return {re, im};
}

double norm2(const cd* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
  }
  return acc;
}

double hadamard_norm2(const cd* a, const cd* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ma = a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
    const double mb = b[k].real() * b[k].real() + b[k].imag() * b[k].imag();
    acc += ma * mb;
  }
  return acc;
}

}  // namespace dmaloc::kernels::scalar
