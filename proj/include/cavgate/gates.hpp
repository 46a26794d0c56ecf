#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cavgate/dynamics.hpp"
#include "cavgate/errors.hpp"
#include "cavgate/model.hpp"

namespace cavgate {

// Gate-level figures of merit assembled from the per-component scattering.
//   fidelity       - overlap with the ideal gate output on the renormalized
//                    photon-detected state (loss imbalance between
//                    components penalizes it).
//   shape_fidelity - same overlap with every component's envelope first
//                    renormalized to unit norm, isolating pure shape/phase
//                    distortion from heralded loss.
//   success_prob   - probability that the photon returns (is detectable).
// per_component is indexed by the register basis index; entries are empty
// for basis states with zero amplitude (never simulated).
struct GateResult {
  double fidelity = 0.0;
  double shape_fidelity = 0.0;
  double success_prob = 0.0;
  std::vector<std::optional<ComponentResponse>> per_component;
};

enum class ExecutionMode { sequential, parallel };

namespace detail {

// Runs fn(0..count-1) on up to hardware_concurrency threads.  Tasks are
// claimed from an atomic counter; each task writes only its own result
// slot, so results are identical to sequential execution.
template <typename Fn>
void parallel_for(std::size_t count, ExecutionMode mode, Fn&& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min<std::size_t>(count, hw == 0 ? 1 : hw);
  if (mode == ExecutionMode::sequential || workers < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Combines per-component responses into the gate figures of merit for a
// given register.  The ideal gate sends the all-zero component's photon to
// -f_in and every other component's photon to +f_in, so the all-zero
// component enters the fidelity sum with sign -1.
inline GateResult assemble_gate_result(const RegisterState& reg,
                                       std::vector<std::optional<ComponentResponse>> responses) {
  if (responses.size() != reg.amplitudes.size())
    throw std::invalid_argument("assemble_gate_result: one response slot per basis state required");
  cplx num(0.0, 0.0);
  cplx num_shape(0.0, 0.0);
  double p_detect = 0.0;
  for (std::size_t k = 0; k < responses.size(); ++k) {
    const double p = std::norm(reg.amplitudes[k]);
    if (p == 0.0) continue;
    if (!responses[k])
      throw std::invalid_argument("assemble_gate_result: missing response for occupied component");
    const ComponentResponse& r = *responses[k];
    const double sign = (k == 0) ? -1.0 : 1.0;
    const double survive = 1.0 - r.loss;
    num += (p * sign) * r.overlap;
    if (survive > 0.0) num_shape += (p * sign / std::sqrt(survive)) * r.overlap;
    p_detect += p * survive;
  }
  GateResult result;
  result.success_prob = p_detect;
  result.fidelity = (p_detect > 0.0) ? std::norm(num) / p_detect : 0.0;
  result.shape_fidelity = std::norm(num_shape);
  result.per_component = std::move(responses);
  return result;
}

// Scatters one photon off the cavity for every occupied register component
// and assembles fidelity and success probability.
inline GateResult simulate_gate(const RegisterState& reg, const Pulse& pulse,
                                std::span<const CouplingProfile> profiles,
                                const CavityParams& params,
                                ExecutionMode mode = ExecutionMode::parallel) {
  if (static_cast<int>(profiles.size()) != reg.n_atoms)
    throw std::invalid_argument("simulate_gate: one coupling profile per atom required");
  std::vector<std::size_t> occupied;
  for (std::size_t k = 0; k < reg.amplitudes.size(); ++k)
    if (std::norm(reg.amplitudes[k]) > 0.0) occupied.push_back(k);

  std::vector<std::optional<ComponentResponse>> responses(reg.amplitudes.size());
  detail::parallel_for(occupied.size(), mode, [&](std::size_t i) {
    const std::size_t k = occupied[i];
    const AtomicComponent comp =
        AtomicComponent::from_bits(reg.n_atoms, static_cast<std::uint32_t>(k));
    try {
      responses[k] = simulate_component(pulse, comp, profiles, params);
    } catch (const ResolutionError& e) {
      throw ResolutionError("component " + comp.bit_string() + ": " + e.what());
    } catch (const IncompleteDecayError& e) {
      throw IncompleteDecayError("component " + comp.bit_string() + ": " + e.what());
    }
  });
  return assemble_gate_result(reg, std::move(responses));
}

// Closed-form fit for the photon-loss probability of the N-atom gate on
// the uniform register with constant coupling g:
//   sum_{n=1}^{N} binom(N,n) / 2^N * 1 / (1 + n g^2 / (kappa gamma_s)).
// gamma_s = 0 has no spontaneous channel and returns 0.
inline double empirical_loss(int n_atoms, double g, const CavityParams& params) {
  params.validate();
  if (n_atoms < 1) throw std::invalid_argument("empirical_loss: atom count must be >= 1");
  if (!(g > 0.0)) throw std::invalid_argument("empirical_loss: coupling must be > 0");
  if (params.gamma_s == 0.0) return 0.0;
  const long double cooperativity_1 =
      static_cast<long double>(g) * g / (params.kappa * params.gamma_s);
  // Pascal-row binomial coefficients.
  std::vector<long double> binom(static_cast<std::size_t>(n_atoms) + 1, 0.0L);
  binom[0] = 1.0L;
  for (int row = 1; row <= n_atoms; ++row)
    for (int j = row; j >= 1; --j) binom[static_cast<std::size_t>(j)] += binom[static_cast<std::size_t>(j - 1)];
  const long double denom = std::pow(2.0L, static_cast<long double>(n_atoms));
  long double sum = 0.0L;
  for (int n = 1; n <= n_atoms; ++n)
    sum += binom[static_cast<std::size_t>(n)] / denom /
           (1.0L + static_cast<long double>(n) * cooperativity_1);
  return static_cast<double>(sum);
}

// Photon-loss probability of the gate on the uniform input register
// [(|0>+|1>)/sqrt(2)]^N - the quantity the closed-form fit approximates.
inline double simulated_loss(int n_atoms, const Pulse& pulse,
                             std::span<const CouplingProfile> profiles, const CavityParams& params,
                             ExecutionMode mode = ExecutionMode::parallel) {
  return 1.0 - simulate_gate(uniform_register(n_atoms), pulse, profiles, params, mode).success_prob;
}

// Ideal N-qubit conditional phase gate: negates the amplitude of exactly
// one flagged basis string (the all-zeros string gives the textbook
// controlled-phase/Toffoli-phase gate).
inline RegisterState apply_nqubit_phase(const RegisterState& reg, const std::string& target_bits) {
  const AtomicComponent flag = AtomicComponent::from_string(target_bits);
  if (flag.n_atoms != reg.n_atoms)
    throw std::invalid_argument("apply_nqubit_phase: flag length must equal the atom count");
  std::vector<cplx> amps = reg.amplitudes;
  amps[flag.bits] = -amps[flag.bits];
  return RegisterState(reg.n_atoms, std::move(amps));
}

// Success-probability bookkeeping for detector efficiency eta and, for
// weak-coherent-state inputs, mean photon number alpha_sq.  Valid for
// alpha_sq <= 0.2 (linearized weak-pulse regime) or exactly 1 (true
// single-photon input).
inline double scale_success(double p, double eta, double alpha_sq) {
  if (!(p >= 0.0 && p <= 1.0 + 1e-9))
    throw std::invalid_argument("scale_success: probability must be in [0, 1]");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("scale_success: efficiency must be in [0, 1]");
  if (!(alpha_sq >= 0.0)) throw std::invalid_argument("scale_success: alpha_sq must be >= 0");
  if (alpha_sq > 0.2 && alpha_sq != 1.0)
    throw OutOfModelError(
        "scale_success: weak-pulse scaling is only valid for alpha_sq <= 0.2 "
        "(or exactly 1 for a true single photon)");
  return p * eta * std::min(alpha_sq, 1.0);
}

inline double scale_success(double p, double eta) { return scale_success(p, eta, 1.0); }

}  // namespace cavgate
