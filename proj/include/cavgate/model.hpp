#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cavgate/errors.hpp"

namespace cavgate {

using cplx = std::complex<double>;

namespace detail {

// Norm accumulation in extended precision so that construction-time norm
// checks stay meaningful for sample counts up to ~2^20.
inline double norm_sq_sum(const std::vector<cplx>& v) {
  long double s = 0.0L;
  for (const cplx& x : v) s += static_cast<long double>(std::norm(x));
  return static_cast<double>(s);
}

// Linear interpolation of a sample sequence treated as zero outside its
// index range; u is a fractional sample index (samples live at integer
// positions 0..m-1).  This is the single definition of "the envelope
// between samples" used by both resampling and the time stepper.
inline cplx interp_zero_extended(const std::vector<cplx>& s, double u) {
  const int m = static_cast<int>(s.size());
  if (u <= -1.0 || u >= static_cast<double>(m)) return cplx(0.0, 0.0);
  if (u < 0.0) return (u + 1.0) * s[0];
  const int j = static_cast<int>(u);
  const double frac = u - static_cast<double>(j);
  if (j >= m - 1) return (1.0 - frac) * s[static_cast<std::size_t>(m - 1)];
  return s[static_cast<std::size_t>(j)] +
         frac * (s[static_cast<std::size_t>(j + 1)] - s[static_cast<std::size_t>(j)]);
}

}  // namespace detail

// Duration of the ring-down window appended after every pulse, in units
// of 1/kappa.  The input envelope is identically zero on this window; it
// exists so the intracavity field and atomic amplitudes can decay back
// into the output mode before norms are tallied.
inline constexpr double kRingDownWindow = 10.0;

// Decay rates of the cavity field and of the atomic excited level.
// All rates are quoted in units of the cavity decay rate kappa, and all
// times in units of 1/kappa; gamma_s is the amplitude decay rate of |e>
// (the excited-state population decays at 2*gamma_s).
struct CavityParams {
  double kappa = 1.0;
  double gamma_s = 0.0;

  CavityParams() = default;
  CavityParams(double kappa_, double gamma_s_) : kappa(kappa_), gamma_s(gamma_s_) {
    validate();
  }
  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("CavityParams: kappa must be > 0");
    if (!(gamma_s >= 0.0)) throw std::invalid_argument("CavityParams: gamma_s must be >= 0");
  }
};

// A complex envelope sampled on the uniform midpoint grid
//   t_j = (j + 1/2) * dt,  j = 0 .. count-1.
// Not necessarily normalized; this is the type returned for reflected
// pulses, whose norm encodes the surviving photon probability.
struct Envelope {
  double dt = 0.0;
  std::vector<cplx> samples;

  int sample_count() const { return static_cast<int>(samples.size()); }
  double duration() const { return dt * static_cast<double>(samples.size()); }
  double sample_time(int j) const { return (static_cast<double>(j) + 0.5) * dt; }

  // Midpoint-rule integral of |f|^2 over the sampled window.
  double norm_sq() const { return detail::norm_sq_sum(samples) * dt; }
};

// A normalized single-photon envelope on [0, duration], midpoint-sampled.
// Normalization sum |f_j|^2 dt = 1 is enforced at construction.
class Pulse {
 public:
  Pulse(double duration, std::vector<cplx> samples)
      : duration_(duration), samples_(std::move(samples)) {
    if (!(duration_ > 0.0)) throw std::invalid_argument("Pulse: duration must be > 0");
    if (samples_.size() < 2) throw std::invalid_argument("Pulse: needs at least 2 samples");
    if (std::abs(norm_sq() - 1.0) > 1e-12)
      throw std::invalid_argument("Pulse: samples must satisfy sum |f|^2 dt = 1");
  }

  // Rescales arbitrary samples to unit norm and constructs the pulse.
  static Pulse normalized(double duration, std::vector<cplx> samples) {
    if (!(duration > 0.0)) throw std::invalid_argument("Pulse: duration must be > 0");
    if (samples.size() < 2) throw std::invalid_argument("Pulse: needs at least 2 samples");
    const double dt = duration / static_cast<double>(samples.size());
    const double raw = detail::norm_sq_sum(samples) * dt;
    if (!(raw > 0.0)) throw std::invalid_argument("Pulse: cannot normalize an all-zero envelope");
    const double scale = 1.0 / std::sqrt(raw);
    for (cplx& v : samples) v *= scale;
    return Pulse(duration, std::move(samples));
  }

  double duration() const { return duration_; }
  int sample_count() const { return static_cast<int>(samples_.size()); }
  double dt() const { return duration_ / static_cast<double>(samples_.size()); }
  double sample_time(int j) const { return (static_cast<double>(j) + 0.5) * dt(); }
  const std::vector<cplx>& samples() const { return samples_; }

  double norm_sq() const { return detail::norm_sq_sum(samples_) * dt(); }

  // Linear interpolation onto a finer midpoint grid (new_count >= current
  // count), renormalized.  The envelope is treated as zero outside [0,T],
  // matching the interpolation convention of the time-domain integrator.
  Pulse resampled(int new_count) const {
    if (new_count < sample_count())
      throw std::invalid_argument("Pulse: resampling only onto finer grids (new count >= old)");
    const double dt_old = dt();
    std::vector<cplx> out(static_cast<std::size_t>(new_count));
    const double dt_new = duration_ / static_cast<double>(new_count);
    for (int i = 0; i < new_count; ++i) {
      const double t = (static_cast<double>(i) + 0.5) * dt_new;
      out[static_cast<std::size_t>(i)] = detail::interp_zero_extended(samples_, t / dt_old - 0.5);
    }
    return Pulse::normalized(duration_, std::move(out));
  }

 private:
  double duration_;
  std::vector<cplx> samples_;
};

// Gaussian envelope f(t) ~ exp[-(t - T/2)^2 / (T/5)^2] truncated to
// [0, T] and renormalized on the midpoint grid.
inline Pulse gaussian_pulse(double duration, int sample_count) {
  if (!(duration > 0.0)) throw std::invalid_argument("gaussian_pulse: duration must be > 0");
  if (sample_count < 16) throw std::invalid_argument("gaussian_pulse: needs at least 16 samples");
  const double width = duration / 5.0;
  const double center = duration / 2.0;
  const double dt = duration / static_cast<double>(sample_count);
  std::vector<cplx> s(static_cast<std::size_t>(sample_count));
  for (int j = 0; j < sample_count; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * dt;
    const double u = (t - center) / width;
    s[static_cast<std::size_t>(j)] = cplx(std::exp(-u * u), 0.0);
  }
  return Pulse::normalized(duration, std::move(s));
}

// Atom-cavity coupling rate as a function of time.  Either constant, or
// sinusoidally modulated as g0 * (1 + depth * sin(nu * t + phi)) to model
// atomic motion through the cavity mode.
class CouplingProfile {
 public:
  static CouplingProfile constant(double g) {
    if (!(g >= 0.0)) throw std::invalid_argument("CouplingProfile: coupling rate must be >= 0");
    CouplingProfile p;
    p.g0_ = g;
    return p;
  }

  static CouplingProfile sinusoidal(double g0, double depth, double nu, double phi) {
    if (!(g0 >= 0.0)) throw std::invalid_argument("CouplingProfile: coupling rate must be >= 0");
    if (!(std::abs(depth) <= 1.0))
      throw std::invalid_argument("CouplingProfile: |depth| must be <= 1 so that g(t) >= 0");
    CouplingProfile p;
    p.kind_ = Kind::sinusoidal;
    p.g0_ = g0;
    p.depth_ = depth;
    p.nu_ = nu;
    p.phi_ = phi;
    return p;
  }

  double operator()(double t) const {
    if (kind_ == Kind::constant) return g0_;
    return g0_ * (1.0 + depth_ * std::sin(nu_ * t + phi_));
  }

  bool is_constant() const { return kind_ == Kind::constant; }
  double base_rate() const { return g0_; }
  // Largest value the rate can take; used for step-size validation.
  double max_rate() const { return kind_ == Kind::constant ? g0_ : g0_ * (1.0 + std::abs(depth_)); }
  double min_rate() const { return kind_ == Kind::constant ? g0_ : g0_ * (1.0 - std::abs(depth_)); }

 private:
  enum class Kind { constant, sinusoidal };
  Kind kind_ = Kind::constant;
  double g0_ = 0.0;
  double depth_ = 0.0;
  double nu_ = 0.0;
  double phi_ = 0.0;
};

inline double eval_coupling(const CouplingProfile& profile, double t) { return profile(t); }

// One computational-basis configuration of the atomic register.  Atom j
// occupies bit (n_atoms-1-j) of `bits`, so the basis index equals the
// bit string read left to right: for two atoms, "01" -> 1, "10" -> 2.
// Atoms in |1> couple to the cavity mode; atoms in |0> are spectators.
struct AtomicComponent {
  int n_atoms = 0;
  std::uint32_t bits = 0;

  static AtomicComponent from_bits(int n_atoms, std::uint32_t bits) {
    if (n_atoms < 1 || n_atoms > 12)
      throw std::invalid_argument("AtomicComponent: atom count must be in [1, 12]");
    if (bits >> n_atoms)
      throw std::invalid_argument("AtomicComponent: bits out of range for atom count");
    return AtomicComponent{n_atoms, bits};
  }

  static AtomicComponent from_string(const std::string& s) {
    if (s.empty() || s.size() > 12)
      throw std::invalid_argument("AtomicComponent: bit string length must be in [1, 12]");
    std::uint32_t b = 0;
    for (char c : s) {
      if (c != '0' && c != '1')
        throw std::invalid_argument("AtomicComponent: bit string may contain only 0 and 1");
      b = (b << 1) | static_cast<std::uint32_t>(c - '0');
    }
    return AtomicComponent{static_cast<int>(s.size()), b};
  }

  int coupled_count() const { return std::popcount(bits); }

  // Indices of the atoms sitting in |1>, ascending.
  std::vector<int> coupled_indices() const {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(coupled_count()));
    for (int j = 0; j < n_atoms; ++j)
      if ((bits >> (n_atoms - 1 - j)) & 1u) idx.push_back(j);
    return idx;
  }

  bool all_zero() const { return bits == 0; }

  std::string bit_string() const {
    std::string s(static_cast<std::size_t>(n_atoms), '0');
    for (int j = 0; j < n_atoms; ++j)
      if ((bits >> (n_atoms - 1 - j)) & 1u) s[static_cast<std::size_t>(j)] = '1';
    return s;
  }
};

// Pure state of an N-atom register in the qubit basis {|0>, |1>}^N,
// indexed like AtomicComponent::bits.  Kept normalized.
struct RegisterState {
  int n_atoms = 0;
  std::vector<cplx> amplitudes;

  RegisterState(int n_atoms_, std::vector<cplx> amplitudes_)
      : n_atoms(n_atoms_), amplitudes(std::move(amplitudes_)) {
    if (n_atoms < 1 || n_atoms > 12)
      throw std::invalid_argument("RegisterState: atom count must be in [1, 12]");
    if (amplitudes.size() != (std::size_t{1} << n_atoms))
      throw std::invalid_argument("RegisterState: amplitude count must be 2^n_atoms");
    double n = 0.0;
    for (const cplx& a : amplitudes) n += std::norm(a);
    if (std::abs(n - 1.0) > 1e-12)
      throw std::invalid_argument("RegisterState: state must be normalized");
  }

  int dimension() const { return static_cast<int>(amplitudes.size()); }
};

// Product state [(|0> + |1>)/sqrt(2)]^N: every basis amplitude 2^{-N/2}.
inline RegisterState uniform_register(int n_atoms) {
  if (n_atoms < 1 || n_atoms > 12)
    throw std::invalid_argument("uniform_register: atom count must be in [1, 12]");
  const std::size_t dim = std::size_t{1} << n_atoms;
  const double a = std::pow(2.0, -0.5 * static_cast<double>(n_atoms));
  return RegisterState(n_atoms, std::vector<cplx>(dim, cplx(a, 0.0)));
}

// Number of samples in the ring-down tail window for a given grid.
inline int ring_down_tail_samples(double dt, const CavityParams& params) {
  return static_cast<int>(std::ceil(kRingDownWindow / params.kappa / dt));
}

// Inner product integral of the input against a (possibly longer)
// reflected envelope on the shared grid: sum conj(f_in) f_out dt.  The
// input is treated as zero on the ring-down tail.
inline cplx overlap(const Pulse& in, const Envelope& out) {
  if (std::abs(in.dt() - out.dt) > 1e-12 * in.dt())
    throw std::invalid_argument("overlap: envelopes must share the sample grid");
  const int m = std::min(in.sample_count(), out.sample_count());
  long double re = 0.0L, im = 0.0L;
  for (int j = 0; j < m; ++j) {
    const cplx p = std::conj(in.samples()[static_cast<std::size_t>(j)]) *
                   out.samples[static_cast<std::size_t>(j)];
    re += p.real();
    im += p.imag();
  }
  return cplx(static_cast<double>(re), static_cast<double>(im)) * in.dt();
}

}  // namespace cavgate
