#include "cirptc/fft.hpp"

#include <cmath>
#include <numbers>

#include "cirptc/errors.hpp"

namespace cirptc::fft {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_power_of_two(n)) {
  if (n == 0) throw DimensionError("FftPlan: length must be positive");
  if (pow2_) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bitrev_[i] = r;
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddles_[k] = std::polar(1.0, -2.0 * std::numbers::pi * double(k) / double(n));
    return;
  }

  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    chirp_[k] = std::polar(1.0, -std::numbers::pi * double(k2) / double(n));
  }
  inner_ = std::make_unique<FftPlan>(m);
  kernel_spectrum_.assign(m, Complex{});
  kernel_spectrum_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    kernel_spectrum_[k] = std::conj(chirp_[k]);
    kernel_spectrum_[m - k] = std::conj(chirp_[k]);
  }
  inner_->forward(kernel_spectrum_);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::span<Complex> data, std::uint64_t* mults) const {
  transform(data, false, mults);
}

void FftPlan::inverse(std::span<Complex> data, std::uint64_t* mults) const {
  transform(data, true, mults);
  const double scale = 1.0 / double(n_);
  for (auto& v : data) v *= scale;
  if (mults) *mults += 2 * n_;
}

void FftPlan::radix2(std::span<Complex> a, bool inverse, std::uint64_t* mults) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i)
    if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
  std::uint64_t count = 0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = twiddles_[j * stride];
        if (inverse) w = std::conj(w);
        const Complex u = a[start + j];
        const Complex v = a[start + j + half] * w;
        a[start + j] = u + v;
        a[start + j + half] = u - v;
      }
      count += 4 * half;
    }
  }
  if (mults) *mults += count;
}

void FftPlan::transform(std::span<Complex> data, bool inverse, std::uint64_t* mults) const {
  if (data.size() != n_)
    throw DimensionError("FftPlan: expected " + std::to_string(n_) + " values, got " +
                         std::to_string(data.size()));
  if (n_ == 1) return;
  if (pow2_) {
    radix2(data, inverse, mults);
    return;
  }

  // Bluestein: X_k = chirp_k * sum_j (x_j chirp_j) conj(chirp_{k-j}).
  // Unscaled inverse = conj(forward(conj(x))).
  const std::size_t m = inner_->size();
  std::vector<Complex> buf(m, Complex{});
  for (std::size_t k = 0; k < n_; ++k) {
    const Complex x = inverse ? std::conj(data[k]) : data[k];
    buf[k] = x * chirp_[k];
  }
  inner_->forward(buf, mults);
  for (std::size_t k = 0; k < m; ++k) buf[k] *= kernel_spectrum_[k];
  inner_->inverse(buf, mults);
  for (std::size_t k = 0; k < n_; ++k) {
    const Complex y = buf[k] * chirp_[k];
    data[k] = inverse ? std::conj(y) : y;
  }
  if (mults) *mults += 4 * (2 * n_ + m);
}

std::vector<Complex> naive_dft(std::span<const Complex> x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    Complex s{};
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = (j * k) % n;
      s += x[j] * std::polar(1.0, sign * 2.0 * std::numbers::pi * double(idx) / double(n));
    }
    out[k] = inverse ? s / double(n) : s;
  }
  return out;
}

}  // namespace cirptc::fft
