#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavgate/dynamics.hpp"
#include "cavgate/errors.hpp"
#include "cavgate/gates.hpp"
#include "cavgate/model.hpp"
#include "cavgate/spectral.hpp"

namespace cavgate {

// Reflection amplitudes a cavity applies to the matched (H) polarization,
// conditioned on its atom's qubit state: r0 for atom |0> (bare cavity,
// ideally -1), r1 for atom |1> (coupled atom, ideally +1).
struct CavityReflection {
  cplx r0{-1.0, 0.0};
  cplx r1{1.0, 0.0};

  static CavityReflection ideal() { return CavityReflection{}; }

  // Narrowband (resonant) amplitudes for a real cavity with coupling g.
  static CavityReflection from_couplings(double g, const CavityParams& params) {
    CavityReflection c;
    c.r0 = reflection_coefficient(0.0, {}, params);
    const double gs[] = {g};
    c.r1 = reflection_coefficient(0.0, gs, params);
    return c;
  }

  // Effective amplitudes from full pulse-resolved responses: the complex
  // overlap is the amplitude of the mode-matched part of the reflected
  // pulse, which is what later optics and detection interfere.
  static CavityReflection from_responses(const ComponentResponse& uncoupled,
                                         const ComponentResponse& coupled) {
    CavityReflection c;
    c.r0 = uncoupled.overlap;
    c.r1 = coupled.overlap;
    return c;
  }

  void validate() const {
    if (std::abs(r0) > 1.0 + 1e-12 || std::abs(r1) > 1.0 + 1e-12)
      throw std::invalid_argument("CavityReflection: |r| must not exceed 1");
  }
};

// The two-cavity single-photon network: photon visits cavity 1, a quarter
// wave plate, cavity 2, a second identical wave plate, then a polarizing
// beam splitter with detectors D1 (H port) and D2 (V port).
// waveplate[out][in] defaults to the rotation H -> (H+V)/sqrt2,
// V -> (V-H)/sqrt2.
struct NetworkSpec {
  CavityReflection cavity1;
  CavityReflection cavity2;
  std::array<std::array<cplx, 2>, 2> waveplate = default_waveplate();

  static std::array<std::array<cplx, 2>, 2> default_waveplate() {
    const double s = 1.0 / std::sqrt(2.0);
    return {{{{cplx(s, 0.0), cplx(-s, 0.0)}}, {{cplx(s, 0.0), cplx(s, 0.0)}}}};
  }

  void validate() const {
    cavity1.validate();
    cavity2.validate();
    // The plate must be unitary or branch probabilities lose meaning.
    const auto& w = waveplate;
    const double c0 = std::norm(w[0][0]) + std::norm(w[1][0]);
    const double c1 = std::norm(w[0][1]) + std::norm(w[1][1]);
    const cplx cross = std::conj(w[0][0]) * w[0][1] + std::conj(w[1][0]) * w[1][1];
    if (std::abs(c0 - 1.0) > 1e-9 || std::abs(c1 - 1.0) > 1e-9 || std::abs(cross) > 1e-9)
      throw std::invalid_argument("NetworkSpec: waveplate matrix must be unitary");
  }
};

// Joint state of the two atoms and the photon polarization, indexed
// a1*4 + a2*2 + pol with pol 0 = H, 1 = V.  Norm may drop below 1 when
// the cavities are lossy.
struct PolarizedPhotonAtomState {
  std::array<cplx, 8> amplitudes{};

  // Atoms in `reg`, photon injected as (|H> + |V>)/sqrt2.
  static PolarizedPhotonAtomState inject(const RegisterState& reg) {
    if (reg.n_atoms != 2)
      throw std::invalid_argument("PolarizedPhotonAtomState: exactly two atoms required");
    PolarizedPhotonAtomState st;
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < 4; ++k) {
      st.amplitudes[2 * k] = reg.amplitudes[k] * s;
      st.amplitudes[2 * k + 1] = reg.amplitudes[k] * s;
    }
    return st;
  }

  double norm_sq() const {
    double n = 0.0;
    for (const cplx& a : amplitudes) n += std::norm(a);
    return n;
  }
};

enum class Detector { D1, D2 };

// Outcome of one protocol run: the post-feedback two-atom state
// (renormalized), which detector fired, that branch's probability, and
// the total probability that any detector fires.
struct ProtocolResult {
  RegisterState final_state;
  Detector outcome = Detector::D1;
  double probability = 0.0;
  double success_prob = 0.0;
};

struct CpfCheck {
  bool is_cpf = false;
  double max_deviation = 0.0;
};

namespace detail {

// Cavity i reflects only the H component, multiplying it by r0 or r1
// according to its own atom's bit; V bypasses the cavity via the mirror.
inline void apply_cavity(PolarizedPhotonAtomState& st, int atom, const CavityReflection& cav) {
  for (std::size_t idx = 0; idx < 8; ++idx) {
    if (idx & 1) continue;  // V component untouched
    const std::uint32_t bit = (atom == 0) ? ((idx >> 2) & 1) : ((idx >> 1) & 1);
    st.amplitudes[idx] *= (bit == 0) ? cav.r0 : cav.r1;
  }
}

inline void apply_waveplate(PolarizedPhotonAtomState& st,
                            const std::array<std::array<cplx, 2>, 2>& w) {
  for (std::size_t k = 0; k < 4; ++k) {
    const cplx h = st.amplitudes[2 * k];
    const cplx v = st.amplitudes[2 * k + 1];
    st.amplitudes[2 * k] = w[0][0] * h + w[0][1] * v;
    st.amplitudes[2 * k + 1] = w[1][0] * h + w[1][1] * v;
  }
}

}  // namespace detail

// Propagates the injected photon through cavity 1, wave plate, cavity 2,
// wave plate - the full network up to (not including) the beam splitter.
inline PolarizedPhotonAtomState propagate_network(const RegisterState& initial,
                                                  const NetworkSpec& spec) {
  spec.validate();
  PolarizedPhotonAtomState st = PolarizedPhotonAtomState::inject(initial);
  detail::apply_cavity(st, 0, spec.cavity1);
  detail::apply_waveplate(st, spec.waveplate);
  detail::apply_cavity(st, 1, spec.cavity2);
  detail::apply_waveplate(st, spec.waveplate);
  return st;
}

// Runs the network and projects on the requested detector: D1 is the H
// output port of the beam splitter (no feedback), D2 the V port, after
// which a sigma_z on atom 1 completes the gate.
inline ProtocolResult run_protocol(const RegisterState& initial, const NetworkSpec& spec,
                                   Detector outcome) {
  const PolarizedPhotonAtomState st = propagate_network(initial, spec);
  double p[2] = {0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    p[0] += std::norm(st.amplitudes[2 * k]);
    p[1] += std::norm(st.amplitudes[2 * k + 1]);
  }
  const std::size_t pol = (outcome == Detector::D1) ? 0 : 1;
  const double p_branch = p[pol];
  if (p_branch < 1e-15)
    throw std::runtime_error("run_protocol: requested detector branch has vanishing probability");

  std::vector<cplx> atoms(4);
  const double scale = 1.0 / std::sqrt(p_branch);
  for (std::size_t k = 0; k < 4; ++k) atoms[k] = st.amplitudes[2 * k + pol] * scale;
  if (outcome == Detector::D2) {
    // Classical feedback: sigma_z on atom 1 (negate a1 = 1 amplitudes).
    atoms[2] = -atoms[2];
    atoms[3] = -atoms[3];
  }
  ProtocolResult result{RegisterState(2, std::move(atoms)), outcome, p_branch, p[0] + p[1]};
  return result;
}

// Same network, but the detector is drawn from the two branch
// probabilities (conditioned on the photon being detected at all) using
// the given seed.
inline ProtocolResult run_protocol(const RegisterState& initial, const NetworkSpec& spec,
                                   std::uint64_t seed) {
  const PolarizedPhotonAtomState st = propagate_network(initial, spec);
  double p[2] = {0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    p[0] += std::norm(st.amplitudes[2 * k]);
    p[1] += std::norm(st.amplitudes[2 * k + 1]);
  }
  if (p[0] + p[1] < 1e-15)
    throw std::runtime_error("run_protocol: photon is never detected for this network");
  std::mt19937_64 rng(seed);
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const Detector outcome = (u < p[0] / (p[0] + p[1])) ? Detector::D1 : Detector::D2;
  return run_protocol(initial, spec, outcome);
}

// Checks that the network realizes the two-qubit conditional phase gate
// (negate |00> only) on both detector branches, up to one global phase
// per branch, probing all four basis states and two superpositions.
inline CpfCheck verify_cpf_equivalence(const NetworkSpec& spec) {
  const double h = 0.5;
  const std::vector<std::vector<cplx>> probes = {
      {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)},
      {cplx(0, 0), cplx(1, 0), cplx(0, 0), cplx(0, 0)},
      {cplx(0, 0), cplx(0, 0), cplx(1, 0), cplx(0, 0)},
      {cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)},
      {cplx(h, 0), cplx(h, 0), cplx(h, 0), cplx(h, 0)},
      {cplx(h, 0), cplx(-h, 0), cplx(0, h), cplx(0, -h)}};

  CpfCheck check;
  for (const Detector outcome : {Detector::D1, Detector::D2}) {
    std::vector<RegisterState> finals;
    std::vector<RegisterState> targets;
    cplx phase_sum(0.0, 0.0);
    for (const auto& amps : probes) {
      const RegisterState in(2, amps);
      const RegisterState target = apply_nqubit_phase(in, "00");
      const ProtocolResult run = run_protocol(in, spec, outcome);
      cplx ov(0.0, 0.0);
      for (std::size_t k = 0; k < 4; ++k)
        ov += std::conj(target.amplitudes[k]) * run.final_state.amplitudes[k];
      phase_sum += ov;
      finals.push_back(run.final_state);
      targets.push_back(target);
    }
    // One global phase for the whole branch, estimated from all probes.
    const cplx phase = (std::abs(phase_sum) > 0.0) ? phase_sum / std::abs(phase_sum) : cplx(1.0, 0.0);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      double dev_sq = 0.0;
      for (std::size_t k = 0; k < 4; ++k)
        dev_sq += std::norm(finals[i].amplitudes[k] - phase * targets[i].amplitudes[k]);
      check.max_deviation = std::max(check.max_deviation, std::sqrt(dev_sq));
    }
  }
  check.is_cpf = check.max_deviation < 1e-9;
  return check;
}

}  // namespace cavgate
