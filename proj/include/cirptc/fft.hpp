#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace cirptc::fft {

using Complex = std::complex<double>;

// Complex DFT of any length. Powers of two run an iterative radix-2 transform;
// other lengths go through Bluestein's chirp-z reduction onto a power-of-two
// transform. The inverse carries the 1/n factor.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  std::size_t size() const noexcept { return n_; }

  // In-place transforms. Each call adds the number of real multiplications it
  // performed to *mults when mults is non-null.
  void forward(std::span<Complex> data, std::uint64_t* mults = nullptr) const;
  void inverse(std::span<Complex> data, std::uint64_t* mults = nullptr) const;

 private:
  void transform(std::span<Complex> data, bool inverse, std::uint64_t* mults) const;
  void radix2(std::span<Complex> data, bool inverse, std::uint64_t* mults) const;

  std::size_t n_ = 0;
  bool pow2_ = true;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddles_;  // exp(-2 pi i k / n), k < n/2

  // Bluestein state (unused for powers of two).
  std::vector<Complex> chirp_;           // exp(-i pi k^2 / n)
  std::vector<Complex> kernel_spectrum_;  // FFT of conj chirp, length m
  std::unique_ptr<FftPlan> inner_;
};

bool is_power_of_two(std::size_t n) noexcept;

// Reference O(n^2) DFT (inverse scaled by 1/n). Test oracle only.
std::vector<Complex> naive_dft(std::span<const Complex> x, bool inverse);

}  // namespace cirptc::fft
