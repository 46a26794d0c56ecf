#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavgate/errors.hpp"
#include "cavgate/model.hpp"

namespace cavgate {

// Everything the scattering of one atomic basis component produces:
// the reflected envelope (pulse window plus ring-down tail), its overlap
// with the input, and the norm ledger.
struct ComponentResponse {
  AtomicComponent component;
  Envelope f_out;
  cplx overlap = {};  // integral of conj(f_in) * f_out over [0, T]
  double loss = 0.0;     // 1 - output norm over the extended window
  double emitted = 0.0;  // norm lost to spontaneous emission: 2*gamma_s * integral of sum |e_j|^2
  double residual = 0.0;  // |c|^2 + sum |e_j|^2 left at the end of the tail window
};

namespace detail {

// Single-excitation amplitudes: cavity field c, one excited-state
// amplitude per coupled atom, plus the running emitted-norm integral.
struct AmpState {
  cplx c = {};
  std::vector<cplx> e;
  double emitted = 0.0;

  explicit AmpState(std::size_t n) : e(n, cplx(0.0, 0.0)) {}
};

}  // namespace detail

// Integrates the driven single-excitation equations for one register
// component with coupled set S (the atoms in |1>):
//   dc/dt   = -(kappa/2) c - i sum_{j in S} g_j(t) e_j - sqrt(kappa) f_in(t)
//   de_j/dt = -gamma_s e_j - i g_j(t) c
//   f_out(t) = f_in(t) + sqrt(kappa) c(t)
// Fixed-step classical Runge-Kutta with 4 substeps per pulse sample;
// f_in is interpolated linearly between samples (zero outside [0,T]).
// The grid is extended by a ring-down window during which f_in = 0 so the
// remaining cavity/atom amplitude can drain into f_out.
inline ComponentResponse simulate_component(const Pulse& pulse, const AtomicComponent& component,
                                            std::span<const CouplingProfile> profiles,
                                            const CavityParams& params) {
  params.validate();
  if (component.n_atoms < 1 || (component.bits >> component.n_atoms) != 0)
    throw std::invalid_argument("simulate_component: malformed component");
  if (static_cast<int>(profiles.size()) != component.n_atoms)
    throw std::invalid_argument("simulate_component: one coupling profile per atom required");

  const std::vector<int> coupled = component.coupled_indices();
  const std::size_t n = coupled.size();
  std::vector<const CouplingProfile*> active;
  active.reserve(n);
  double g_max = 0.0;
  for (int idx : coupled) {
    const CouplingProfile& p = profiles[static_cast<std::size_t>(idx)];
    active.push_back(&p);
    g_max = std::max(g_max, p.max_rate());
  }

  const int m = pulse.sample_count();
  const double dt = pulse.dt();
  const double h = 0.25 * dt;  // integrator substep
  const double stiffest = std::max({params.kappa, params.gamma_s, g_max});
  if (h * stiffest >= 0.1)
    throw ResolutionError(
        "simulate_component: integrator substep too coarse for the fastest rate "
        "(substep * max(kappa, g_max, gamma_s) = " +
        std::to_string(h * stiffest) + " >= 0.1); increase the sample count");

  const int m_ext = m + ring_down_tail_samples(dt, params);
  const double sqrt_kappa = std::sqrt(params.kappa);
  const double half_kappa = 0.5 * params.kappa;
  const double gamma_s = params.gamma_s;
  const std::vector<cplx>& fs = pulse.samples();

  // f_in at integer half-substeps K (units of dt/8): sample j sits at
  // K = 8j + 4.  Integer bookkeeping keeps stage times exactly reproducible.
  const auto f_at = [&fs](long long half_substep) {
    return detail::interp_zero_extended(fs, static_cast<double>(half_substep - 4) / 8.0);
  };
  const auto g_at = [&active, dt](std::size_t j, long long half_substep) {
    return (*active[j])(static_cast<double>(half_substep) * (dt / 8.0));
  };

  detail::AmpState y(n);
  // Stage scratch (k1..k4 plus the probed midpoint state).
  std::vector<cplx> ke1(n), ke2(n), ke3(n), ke4(n), et(n);
  cplx kc1, kc2, kc3, kc4;
  double ka1 = 0.0, ka2 = 0.0, ka3 = 0.0, ka4 = 0.0;

  Envelope out;
  out.dt = dt;
  out.samples.resize(static_cast<std::size_t>(m_ext));

  const auto derivative = [&](const cplx& c, const std::vector<cplx>& e, long long K, cplx& dc,
                              std::vector<cplx>& de, double& da) {
    cplx coupling_sum(0.0, 0.0);
    double e_norm = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      const double g = g_at(j, K);
      coupling_sum += g * e[j];
      de[j] = -gamma_s * e[j] - cplx(0.0, 1.0) * (g * c);
      e_norm += std::norm(e[j]);
    }
    dc = -half_kappa * c - cplx(0.0, 1.0) * coupling_sum - sqrt_kappa * f_at(K);
    da = 2.0 * gamma_s * e_norm;
  };

  const long long steps = 4LL * m_ext;
  for (long long k = 0; k < steps; ++k) {
    const long long K0 = 2 * k;  // step start, in half-substeps
    derivative(y.c, y.e, K0, kc1, ke1, ka1);
    cplx ct = y.c + 0.5 * h * kc1;
    for (std::size_t j = 0; j < n; ++j) et[j] = y.e[j] + 0.5 * h * ke1[j];
    derivative(ct, et, K0 + 1, kc2, ke2, ka2);
    ct = y.c + 0.5 * h * kc2;
    for (std::size_t j = 0; j < n; ++j) et[j] = y.e[j] + 0.5 * h * ke2[j];
    derivative(ct, et, K0 + 1, kc3, ke3, ka3);
    ct = y.c + h * kc3;
    for (std::size_t j = 0; j < n; ++j) et[j] = y.e[j] + h * ke3[j];
    derivative(ct, et, K0 + 2, kc4, ke4, ka4);

    const double w = h / 6.0;
    y.c += w * (kc1 + 2.0 * kc2 + 2.0 * kc3 + kc4);
    for (std::size_t j = 0; j < n; ++j)
      y.e[j] += w * (ke1[j] + 2.0 * ke2[j] + 2.0 * ke3[j] + ke4[j]);
    y.emitted += w * (ka1 + 2.0 * (ka2 + ka3) + ka4);

    // Pulse samples live at t_j = (4j+2) substeps; record on arrival.
    if ((k + 1) % 4 == 2) {
      const long long j = (k + 1 - 2) / 4;
      if (j < m_ext) {
        const cplx fin = (j < m) ? fs[static_cast<std::size_t>(j)] : cplx(0.0, 0.0);
        out.samples[static_cast<std::size_t>(j)] = fin + sqrt_kappa * y.c;
      }
    }
  }

  double residual = std::norm(y.c);
  for (const cplx& e : y.e) residual += std::norm(e);
  if (residual > 1e-6)
    throw IncompleteDecayError(
        "simulate_component: cavity/atom amplitude has not rung down after the tail window "
        "(residual norm " +
        std::to_string(residual) + ")");

  ComponentResponse resp;
  resp.component = component;
  resp.overlap = overlap(pulse, out);
  resp.loss = 1.0 - out.norm_sq();
  resp.emitted = y.emitted;
  resp.residual = residual;
  resp.f_out = std::move(out);
  return resp;
}

}  // namespace cavgate
