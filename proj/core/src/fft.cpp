#include "bhtbp/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace bhtbp::fft {

namespace {

// The FFTW planner is not re-entrant; execution with fresh arrays is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

constexpr std::size_t kDirectThreshold = 64 * 64;

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

// Plans live for the whole process and are shared by every thread; each
// thread executes them on its own buffers via the new-array interface.
PlanPair shared_plans(std::size_t size) {
  static std::map<std::size_t, PlanPair> plans;
  std::lock_guard lock(planner_mutex());
  auto& p = plans[size];
  if (!p.fwd) {
    double* real = fftw_alloc_real(size);
    fftw_complex* spec = fftw_alloc_complex(size / 2 + 1);
    if (!real || !spec) throw std::bad_alloc();
    const int n = static_cast<int>(size);
    p.fwd = fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE);
    fftw_free(real);
    fftw_free(spec);
  }
  return p;
}

}  // namespace

struct RealTransform::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  PlanPair plans;
  std::size_t dirty = 0;  // real[dirty, size) is known to be zero
};

namespace {

bool same_alignment(const void* a, const void* b) {
  return fftw_alignment_of(static_cast<double*>(const_cast<void*>(a))) ==
         fftw_alignment_of(static_cast<double*>(const_cast<void*>(b)));
}

}  // namespace

std::size_t good_size(std::size_t n) {
  if (n <= 8) return std::bit_ceil(std::max<std::size_t>(n, 1));
  // FFTW is several times slower on odd 3/5-smooth lengths than on nearby
  // lengths with a few factors of two.
  const std::size_t target = (n + 7) / 8;
  std::size_t best = SIZE_MAX;
  for (std::size_t p2 = 1; p2 < best; p2 *= 2) {
    for (std::size_t p3 = p2; p3 < best; p3 *= 3) {
      std::size_t p5 = p3;
      while (p5 < target) p5 *= 5;
      best = std::min(best, p5);
      if (p3 >= target) break;
    }
    if (p2 >= target) break;
  }
  return 8 * best;
}

RealTransform::RealTransform(std::size_t size) : size_(size), impl_(new Impl) {
  impl_->plans = shared_plans(size_);
  impl_->real = fftw_alloc_real(size_);
  impl_->spec = fftw_alloc_complex(spectrum_size());
  if (!impl_->real || !impl_->spec) throw std::bad_alloc();
  std::fill(impl_->real, impl_->real + size_, 0.0);
}

RealTransform::~RealTransform() {
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
  delete impl_;
}

RealTransform& RealTransform::get(std::size_t size) {
  thread_local std::map<std::size_t, std::unique_ptr<RealTransform>> cache;
  auto& slot = cache[size];
  if (!slot) slot.reset(new RealTransform(size));
  return *slot;
}

void RealTransform::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() > size_ || out.size() < spectrum_size()) {
    throw std::length_error("RealTransform::forward: buffer size");
  }
  std::copy(in.begin(), in.end(), impl_->real);
  if (impl_->dirty > in.size()) std::fill(impl_->real + in.size(), impl_->real + impl_->dirty, 0.0);
  impl_->dirty = in.size();
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (same_alignment(dst, impl_->spec)) {
    fftw_execute_dft_r2c(impl_->plans.fwd, impl_->real, dst);
  } else {
    fftw_execute_dft_r2c(impl_->plans.fwd, impl_->real, impl_->spec);
    std::memcpy(static_cast<void*>(out.data()), impl_->spec, spectrum_size() * sizeof(fftw_complex));
  }
}

void RealTransform::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() < spectrum_size() || out.size() < size_) {
    throw std::length_error("RealTransform::inverse: buffer size");
  }
  std::memcpy(static_cast<void*>(impl_->spec), in.data(), spectrum_size() * sizeof(fftw_complex));
  fftw_execute_dft_c2r(impl_->plans.inv, impl_->spec, impl_->real);
  impl_->dirty = size_;
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = impl_->real[i] * scale;
}

void RealTransform::inverse_unscaled(std::span<Complex> in, std::span<double> out) {
  if (in.size() < spectrum_size() || out.size() < size_) {
    throw std::length_error("RealTransform::inverse_unscaled: buffer size");
  }
  auto* src = reinterpret_cast<fftw_complex*>(in.data());
  if (same_alignment(src, impl_->spec) && same_alignment(out.data(), impl_->real)) {
    fftw_execute_dft_c2r(impl_->plans.inv, src, out.data());
    return;
  }
  std::memcpy(static_cast<void*>(impl_->spec), in.data(), spectrum_size() * sizeof(fftw_complex));
  fftw_execute_dft_c2r(impl_->plans.inv, impl_->spec, impl_->real);
  impl_->dirty = size_;
  std::copy_n(impl_->real, size_, out.begin());
}

std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t len = a.size() + b.size() - 1;
  std::vector<double> out(len, 0.0);
  if (a.size() * b.size() <= kDirectThreshold || std::min(a.size(), b.size()) <= 8) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  }
  auto& tf = RealTransform::get(good_size(len));
  std::vector<Complex> fa(tf.spectrum_size()), fb(tf.spectrum_size());
  tf.forward(a, fa);
  tf.forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> full(tf.size());
  tf.inverse(fa, full);
  std::copy_n(full.begin(), len, out.begin());
  return out;
}

}  // namespace bhtbp::fft
