#pragma once

// Thin wrapper over FFTW real-to-complex transforms. Plans are created with
// FFTW_ESTIMATE (so the chosen algorithm, and hence every rounding, is
// reproducible run to run). Plans are shared process-wide; work buffers are
// per thread.

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace bhtbp::fft {

using Complex = std::complex<double>;

/// 64-byte aligned storage. Spectra kept in such buffers are transformed in
/// place of FFTW's own scratch, skipping a copy.
template <class T>
struct SimdAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  SimdAllocator() = default;
  template <class U>
  SimdAllocator(const SimdAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const SimdAllocator<U>&) const noexcept {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, SimdAllocator<T>>;

/// Smallest 2^a 3^b 5^c >= n; a >= 3 once n > 8.
std::size_t good_size(std::size_t n);

class RealTransform {
 public:
  /// Per-thread cached transform of length `size`.
  static RealTransform& get(std::size_t size);

  std::size_t size() const { return size_; }
  std::size_t spectrum_size() const { return size_ / 2 + 1; }

  /// Zero-pads `in` (length <= size) and writes spectrum_size() bins.
  void forward(std::span<const double> in, std::span<Complex> out);
  /// Writes size() samples, scaled by 1/size so inverse(forward(x)) == x.
  void inverse(std::span<const Complex> in, std::span<double> out);
  /// Like inverse() but without the 1/size factor, and `in` is clobbered.
  void inverse_unscaled(std::span<Complex> in, std::span<double> out);

  RealTransform(const RealTransform&) = delete;
  RealTransform& operator=(const RealTransform&) = delete;
  ~RealTransform();

 private:
  explicit RealTransform(std::size_t size);
  struct Impl;

  std::size_t size_;
  Impl* impl_;
};

/// Linear (non-circular) convolution of two sequences, length a+b-1.
/// Uses a direct sum for small inputs and a zero-padded FFT otherwise.
std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace bhtbp::fft
