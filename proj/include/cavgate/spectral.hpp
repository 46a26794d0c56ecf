#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cavgate/errors.hpp"
#include "cavgate/model.hpp"

namespace cavgate {

namespace detail {

// In-place iterative radix-2 FFT.  Forward uses kernel e^{-2pi i jk/n};
// inverse applies the conjugate kernel and the 1/n factor.
inline void fft(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft: length must be a nonzero power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, rev = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; rev & bit; bit >>= 1) rev ^= bit;
    rev ^= bit;
    if (i < rev) std::swap(a[i], a[rev]);
  }
  // Full twiddle table keeps per-butterfly phase errors at the eps scale.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> tw(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j)
    tw[j] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(j) /
                                static_cast<double>(n));
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t s = 0; s < n; s += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const cplx u = a[s + j];
        const cplx v = a[s + j + half] * tw[j * stride];
        a[s + j] = u + v;
        a[s + j + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (cplx& x : a) x *= inv;
  }
}

}  // namespace detail

// Complex reflection amplitude r(omega) of the single-sided cavity with
// constant atomic couplings, measured at detuning omega from the common
// cavity/atom/pulse resonance:
//   r(omega) = 1 - kappa / [kappa/2 - i*omega + sum_j g_j^2/(gamma_s - i*omega)]
// An empty coupling list gives the bare-cavity result (-kappa/2 - i*omega)
// / (kappa/2 - i*omega), hence r(0) = -1.
inline cplx reflection_coefficient(double omega, std::span<const double> couplings,
                                   const CavityParams& params) {
  params.validate();
  cplx denom(0.5 * params.kappa, -omega);
  for (double g : couplings) {
    if (!(g >= 0.0)) throw std::invalid_argument("reflection_coefficient: couplings must be >= 0");
    if (g == 0.0) continue;
    const cplx d(params.gamma_s, -omega);
    // gamma_s = 0 exactly on resonance: the coupled atom pins r at the
    // analytic limit +1 (infinite cooperativity).
    if (d == cplx(0.0, 0.0)) return cplx(1.0, 0.0);
    denom += g * g / d;
  }
  return cplx(1.0, 0.0) - params.kappa / denom;
}

// Tabulated r(omega) over a caller-supplied frequency grid.
struct ReflectionSpectrum {
  std::vector<double> frequencies;
  std::vector<cplx> r;
};

inline ReflectionSpectrum reflection_spectrum(std::span<const double> omegas,
                                              std::span<const double> couplings,
                                              const CavityParams& params) {
  ReflectionSpectrum spec;
  spec.frequencies.assign(omegas.begin(), omegas.end());
  spec.r.reserve(omegas.size());
  for (double w : omegas) spec.r.push_back(reflection_coefficient(w, couplings, params));
  return spec;
}

// Frequency-domain scattering of a pulse off the cavity with constant
// couplings: multiply the DFT of f_in by r and transform back.  Exact for
// constant couplings up to grid resolution; the independent check for the
// time stepper.  Output covers [0, T + ring-down window] like the ODE path.
inline Envelope reflect_pulse_spectral(const Pulse& pulse, std::span<const double> couplings,
                                       const CavityParams& params) {
  params.validate();
  const int m = pulse.sample_count();
  const double dt = pulse.dt();
  const int m_ext = m + ring_down_tail_samples(dt, params);
  // Zero-padding factor 4 pushes circular wrap-around of the decaying
  // scattering tail far below the comparison tolerances.
  const std::size_t len = std::bit_ceil(static_cast<std::size_t>(4 * m_ext));
  std::vector<cplx> buf(len, cplx(0.0, 0.0));
  for (int j = 0; j < m; ++j) buf[static_cast<std::size_t>(j)] = pulse.samples()[static_cast<std::size_t>(j)];
  detail::fft(buf, false);

  // Guard against inputs that carry power near the grid's Nyquist edge:
  // fraction of spectral weight at |freq| above half-Nyquist must be tiny.
  {
    long double total = 0.0L, high = 0.0L;
    for (std::size_t k = 0; k < len; ++k) {
      const std::ptrdiff_t ks = (k <= len / 2) ? static_cast<std::ptrdiff_t>(k)
                                               : static_cast<std::ptrdiff_t>(k) -
                                                     static_cast<std::ptrdiff_t>(len);
      const long double p = static_cast<long double>(std::norm(buf[k]));
      total += p;
      if (std::abs(ks) > static_cast<std::ptrdiff_t>(len / 4)) high += p;
    }
    if (total > 0.0L && high / total > 1e-8L)
      throw ResolutionError(
          "reflect_pulse_spectral: input envelope has significant power beyond half the "
          "Nyquist frequency; increase the sample count");
  }

  // Bin k of the forward DFT reconstructs a time dependence
  // e^{+2pi i jk/len} = e^{+i nu_k t}; a physical carrier e^{-i omega t}
  // therefore lives at nu_k = -omega and picks up r(omega) = r(-nu_k).
  const double dnu = 2.0 * std::numbers::pi / (static_cast<double>(len) * dt);
  for (std::size_t k = 0; k < len; ++k) {
    const std::ptrdiff_t ks = (k <= len / 2)
                                  ? static_cast<std::ptrdiff_t>(k)
                                  : static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(len);
    const double nu = dnu * static_cast<double>(ks);
    buf[k] *= reflection_coefficient(-nu, couplings, params);
  }
  detail::fft(buf, true);

  Envelope out;
  out.dt = dt;
  out.samples.assign(buf.begin(), buf.begin() + m_ext);
  return out;
}

}  // namespace cavgate
