// Acceptance gate: checks the headline numerical guarantees end to end and
// prints one [PASS]/[FAIL] line per criterion with the measured values.
// Exit code is the number of failing criteria.
//
// Criteria 1 and 5 are expected to fail at the stated tolerances; the
// measured distortion scales are physical, not bugs, and are reported
// honestly rather than hidden behind loosened bounds.  See README.md.

#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cavgate/cavgate.hpp"

using namespace cavgate;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str());
  if (!pass) ++failures;
}

const CavityParams p11(1.0, 1.0);

double peak_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

// ---- criterion 1: bare-cavity reflection of the reference pulse ----------

void criterion_1() {
  const Pulse pls = gaussian_pulse(210.0, 4096);
  const std::vector<CouplingProfile> prof(2, CouplingProfile::constant(3.0));
  const ComponentResponse r =
      simulate_component(pls, AtomicComponent::from_string("00"), prof, p11);
  const double gap = std::abs(r.overlap + 1.0);
  const bool pass = gap < 1e-3 && r.loss < 1e-6;
  report(1, "bare-cavity reflection of the reference pulse approaches -f_in", pass,
         fmt("overlap gap = %.6e vs bound 1e-3; loss = %.6e vs bound 1e-6", gap, r.loss));
}

// ---- criteria 2 and 3: route equivalence and norm bookkeeping ------------

void criteria_2_3() {
  double worst_diff = 0.0;
  double worst_defect = 0.0;
  const Pulse pls = gaussian_pulse(210.0, 32768);
  for (double g : {2.0, 3.0, 6.0}) {
    for (double gs : {0.0, 1.0}) {
      const CavityParams pp(1.0, gs);
      for (const char* bits : {"00", "01", "10", "11"}) {
        const AtomicComponent comp = AtomicComponent::from_string(bits);
        const std::vector<CouplingProfile> prof(2, CouplingProfile::constant(g));
        const ComponentResponse ode = simulate_component(pls, comp, prof, pp);
        worst_defect = std::max(
            worst_defect, std::abs(1.0 - ((1.0 - ode.loss) + ode.emitted + ode.residual)));
        const std::vector<double> cs(static_cast<std::size_t>(comp.coupled_count()), g);
        const Envelope sp = reflect_pulse_spectral(pls, cs, pp);
        const std::size_t n = std::min(ode.f_out.samples.size(), sp.samples.size());
        for (std::size_t j = 0; j < n; ++j)
          worst_diff = std::max(worst_diff, std::abs(ode.f_out.samples[j] - sp.samples[j]));
      }
    }
  }
  // Include the default-resolution operating point in the ledger check.
  const Pulse p4 = gaussian_pulse(210.0, 4096);
  for (const char* bits : {"00", "01", "11"}) {
    const std::vector<CouplingProfile> prof(2, CouplingProfile::constant(3.0));
    const ComponentResponse r =
        simulate_component(p4, AtomicComponent::from_string(bits), prof, p11);
    worst_defect =
        std::max(worst_defect, std::abs(1.0 - ((1.0 - r.loss) + r.emitted + r.residual)));
  }
  report(2, "time-domain integration matches frequency-domain scattering",
         worst_diff < 1e-6,
         fmt("worst pointwise gap = %.6e vs bound 1e-6 (g in {2,3,6}, gamma_s in {0,1}, "
             "all two-atom components)",
             worst_diff));
  report(3, "photon-norm bookkeeping closes for every component", worst_defect < 1e-6,
         fmt("worst |1 - (survived + emitted + residual)| = %.6e vs bound 1e-6", worst_defect));
}

// ---- criterion 4: shape preservation across the coupling range -----------

void criterion_4() {
  const Pulse pls = gaussian_pulse(210.0, 4096);
  const double pk = peak_abs(pls.samples());
  const auto residual = [&](const ComponentResponse& r) {
    double dev = 0.0;
    const std::size_t m = pls.samples().size();
    for (std::size_t j = 0; j < r.f_out.samples.size(); ++j) {
      const cplx fin = (j < m) ? pls.samples()[j] : cplx(0, 0);
      dev = std::max(dev, std::abs(r.f_out.samples[j] - r.overlap * fin));
    }
    return dev / pk;
  };

  double worst_non00 = 0.0, min_ratio = 1e300, d00 = 0.0, arg_gap = 0.0;
  for (int i = 0; i <= 8; ++i) {
    const double g = 2.0 + 0.5 * i;
    const std::vector<CouplingProfile> prof(2, CouplingProfile::constant(g));
    double non00 = 0.0;
    for (const char* bits : {"00", "01", "10", "11"}) {
      const ComponentResponse r =
          simulate_component(pls, AtomicComponent::from_string(bits), prof, p11);
      const double dev = residual(r);
      if (bits[0] == '0' && bits[1] == '0') {
        d00 = dev;
        arg_gap = std::abs(std::arg(r.overlap) - std::numbers::pi);
      } else {
        non00 = std::max(non00, dev);
      }
    }
    worst_non00 = std::max(worst_non00, non00);
    min_ratio = std::min(min_ratio, d00 / non00);
  }
  const bool pass = worst_non00 < 1e-2 && min_ratio > 10.0 && arg_gap < 1e-12;
  report(4, "coupled components keep the pulse shape; the uncoupled one is phase-flipped",
         pass,
         fmt("worst coupled shape residual = %.6e vs bound 1e-2; uncoupled residual = %.6e, "
             "ratio >= %.3g vs bound 10; |arg(O_00) - pi| = %.3g",
             worst_non00, d00, min_ratio, arg_gap));
}

// ---- criterion 5: fidelity ordering and uniformity over g ----------------

void criterion_5() {
  const Pulse p100 = gaussian_pulse(100.0, 4096);
  const Pulse p210 = gaussian_pulse(210.0, 4096);
  double f100[4], f210[4];
  for (int n = 2; n <= 5; ++n) {
    const std::vector<CouplingProfile> prof(static_cast<std::size_t>(n),
                                            CouplingProfile::constant(3.0));
    const RegisterState reg = uniform_register(n);
    f100[n - 2] = simulate_gate(reg, p100, prof, p11).fidelity;
    f210[n - 2] = simulate_gate(reg, p210, prof, p11).fidelity;
  }
  bool ordered = true;
  for (int i = 0; i < 3; ++i) ordered &= (f100[i] < f100[i + 1]) && (f210[i] < f210[i + 1]);
  bool longer_wins = true;
  for (int i = 0; i < 4; ++i) longer_wins &= (f210[i] > f100[i]);

  double cmin = 2.0, cmax = -1.0, smin = 2.0, smax = -1.0;
  for (int i = 0; i <= 8; ++i) {
    const double g = 2.0 + 0.5 * i;
    const std::vector<CouplingProfile> prof(2, CouplingProfile::constant(g));
    const GateResult gr = simulate_gate(uniform_register(2), p210, prof, p11);
    cmin = std::min(cmin, gr.fidelity);
    cmax = std::max(cmax, gr.fidelity);
    smin = std::min(smin, gr.shape_fidelity);
    smax = std::max(smax, gr.shape_fidelity);
  }
  const double spread = cmax - cmin;
  const bool pass = ordered && longer_wins && spread < 1e-4;
  report(5, "gate fidelity grows with atom number and pulse length, uniformly over g", pass,
         fmt("ordering %s; fidelity spread over g in [2,6] = %.6e vs bound 1e-4 "
             "(loss-free shape spread = %.6e)",
             (ordered && longer_wins) ? "ok" : "VIOLATED", spread, smax - smin));
}

// ---- criterion 6: loss fit against the frozen simulation grid ------------

void criterion_6() {
  const double frozen[3][9] = {
      {0.252938035476704, 0.174178721763864, 0.126031680010029, 0.0949627079949057,
       0.073921833524512, 0.0590807739329495, 0.0482516806911923, 0.0401224795481766,
       0.0338719843673668},
      {0.250432373911476, 0.171023293306244, 0.123173260191991, 0.0925441540439064,
       0.0719042874768078, 0.0573939790790519, 0.0468304887017139, 0.0389138379543608,
       0.0328343309192889},
      {0.227588539117809, 0.154181347315881, 0.110543677782768, 0.0828250079017603,
       0.0642355476904781, 0.0512082067202092, 0.0417453469252682, 0.0346649680239991,
       0.0292342264895731}};

  const double p_emp_ref = empirical_loss(2, 3.0, p11);
  const bool emp_ok = std::abs(p_emp_ref - 0.063158) < 1e-6;

  const Pulse pls = gaussian_pulse(210.0, 4096);
  double worst_reg = 0.0, ratio_min = 1e300, ratio_max = 0.0;
  bool monotone = true;
  double grid[3][9];
  for (int n = 2; n <= 4; ++n) {
    for (int i = 0; i <= 8; ++i) {
      const double g = 2.0 + 0.5 * i;
      const std::vector<CouplingProfile> prof(static_cast<std::size_t>(n),
                                              CouplingProfile::constant(g));
      const double p_sim = simulated_loss(n, pls, prof, p11);
      grid[n - 2][i] = p_sim;
      worst_reg = std::max(worst_reg, std::abs(p_sim - frozen[n - 2][i]));
      const double ratio = p_sim / empirical_loss(n, g, p11);
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
      if (i > 0) monotone &= (p_sim < grid[n - 2][i - 1]);
    }
  }
  for (int i = 0; i <= 8; ++i)
    monotone &= (grid[0][i] > grid[1][i]) && (grid[1][i] > grid[2][i]);

  const bool pass = emp_ok && worst_reg < 1e-12 && monotone;
  report(6, "photon-loss fit: closed form and frozen simulation grid", pass,
         fmt("closed form at N=2,g=3: %.9f vs 0.063158 +- 1e-6; worst drift from frozen grid "
             "= %.3e vs bound 1e-12; monotone %s; sim/fit ratio in [%.4f, %.4f]",
             p_emp_ref, worst_reg, monotone ? "ok" : "VIOLATED", ratio_min, ratio_max));
}

// ---- criterion 7: modulated couplings against the constant baseline ------

void criterion_7() {
  const Pulse pls = gaussian_pulse(210.0, 4096);
  const std::vector<CouplingProfile> cprof(2, CouplingProfile::constant(3.0));
  const double p_const = simulated_loss(2, pls, cprof, p11);

  std::mt19937_64 rng(12345);
  double worst_ratio_dev = 0.0, mean = 0.0;
  const int n_draws = 8;
  double first_phase = 0.0;
  for (int d = 0; d < n_draws; ++d) {
    std::vector<CouplingProfile> prof;
    for (int a = 0; a < 2; ++a) {
      const double phi =
          2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
      if (d == 0 && a == 0) first_phase = phi;
      prof.push_back(CouplingProfile::sinusoidal(3.0, 1.0 / 3.0, 1.0 / 6.0, phi));
    }
    const double p_mod = simulated_loss(2, pls, prof, p11);
    const double ratio = p_mod / p_const;
    worst_ratio_dev = std::max(worst_ratio_dev, std::abs(ratio - 1.0));
    mean += ratio / n_draws;
  }

  // Zero modulation depth must reproduce the constant-coupling run.
  const std::vector<CouplingProfile> flat(
      2, CouplingProfile::sinusoidal(3.0, 0.0, 1.0 / 6.0, first_phase));
  const double flat_gap = std::abs(simulated_loss(2, pls, flat, p11) - p_const);

  const bool pass = worst_ratio_dev < 0.3 && std::abs(mean - 1.0) < 0.3 && flat_gap < 1e-9;
  report(7, "modulated couplings stay within 30% of the constant-coupling loss", pass,
         fmt("worst per-draw |ratio - 1| = %.4f, mean ratio = %.4f (bound 0.3, 8 draws); "
             "zero-depth gap = %.3g vs bound 1e-9",
             worst_ratio_dev, mean, flat_gap));
}

// ---- criterion 8: ideal network is the conditional-phase gate ------------

void criterion_8() {
  const NetworkSpec ideal{CavityReflection::ideal(), CavityReflection::ideal()};
  const CpfCheck check = verify_cpf_equivalence(ideal);

  const double h = 0.5;
  const std::vector<std::vector<cplx>> probes = {
      {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)},
      {cplx(0, 0), cplx(1, 0), cplx(0, 0), cplx(0, 0)},
      {cplx(0, 0), cplx(0, 0), cplx(1, 0), cplx(0, 0)},
      {cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)},
      {cplx(h, 0), cplx(h, 0), cplx(h, 0), cplx(h, 0)},
      {cplx(h, 0), cplx(-h, 0), cplx(0, h), cplx(0, -h)}};
  double prob_dev = 0.0;
  for (const auto& amps : probes) {
    const RegisterState in(2, amps);
    for (const Detector d : {Detector::D1, Detector::D2})
      prob_dev = std::max(prob_dev, std::abs(run_protocol(in, ideal, d).probability - 0.5));
  }

  const bool pass = check.max_deviation < 1e-12 && prob_dev < 1e-12;
  report(8, "ideal network realizes the conditional-phase gate with even branches", pass,
         fmt("max state deviation = %.3g vs bound 1e-12 (6 probes, both outcomes); "
             "max |branch prob - 1/2| = %.3g vs bound 1e-12",
             check.max_deviation, prob_dev));
}

// ---- criterion 9: success-probability scaling ----------------------------

void criterion_9() {
  bool ok = true;
  ok &= (scale_success(0.8, 0.9, 0.15) == 0.8 * 0.9 * 0.15);
  ok &= (scale_success(0.8, 0.9, 0.2) == 0.8 * 0.9 * 0.2);
  ok &= (scale_success(0.8, 0.9, 1.0) == 0.8 * 0.9);
  ok &= (scale_success(0.8, 0.9) == scale_success(0.8, 0.9, 1.0));
  ok &= (scale_success(1.0, 1.0, 0.05) == 0.05);
  ok &= (scale_success(0.5, 0.0, 0.1) == 0.0);

  int rejected = 0;
  for (double bad : {0.21, 0.5, 2.0}) {
    try {
      (void)scale_success(0.8, 0.9, bad);
    } catch (const OutOfModelError&) {
      ++rejected;
    }
  }
  const bool pass = ok && rejected == 3;
  report(9, "success-probability scaling identities and validity domain", pass,
         fmt("identities %s; rejected %d/3 out-of-model alpha_sq values",
             ok ? "exact" : "VIOLATED", rejected));
}

// ---- criterion 10: determinism and execution-mode equivalence ------------

void criterion_10() {
  ExperimentConfig cfg;
  cfg.experiment = "fig3d";
  cfg.seed = 21;
  cfg.g_range = {{3.0, 3.0}};
  cfg.samples = 4096;
  const std::string a = run_experiment(cfg);
  const std::string b = run_experiment(cfg);

  ExperimentConfig pcfg;
  pcfg.experiment = "protocol";
  const std::string c = run_experiment(pcfg);
  const std::string d = run_experiment(pcfg);

  const Pulse pls = gaussian_pulse(210.0, 4096);
  const std::vector<CouplingProfile> prof(3, CouplingProfile::constant(3.0));
  const GateResult seq =
      simulate_gate(uniform_register(3), pls, prof, p11, ExecutionMode::sequential);
  const GateResult par =
      simulate_gate(uniform_register(3), pls, prof, p11, ExecutionMode::parallel);
  bool modes_equal = seq.fidelity == par.fidelity && seq.shape_fidelity == par.shape_fidelity &&
                     seq.success_prob == par.success_prob;
  for (std::size_t k = 0; k < seq.per_component.size(); ++k)
    modes_equal &= (seq.per_component[k]->overlap == par.per_component[k]->overlap) &&
                   (seq.per_component[k]->loss == par.per_component[k]->loss) &&
                   (seq.per_component[k]->f_out.samples == par.per_component[k]->f_out.samples);

  const bool pass = (a == b) && (c == d) && modes_equal;
  report(10, "byte-identical reruns and execution-mode equivalence", pass,
         fmt("seeded rerun %s; protocol rerun %s; parallel vs sequential %s",
             a == b ? "identical" : "DIFFERS", c == d ? "identical" : "DIFFERS",
             modes_equal ? "bitwise equal" : "DIFFERS"));
}

}  // namespace

int main() {
  struct Step {
    void (*fn)();
    int first, last;
  };
  const Step steps[] = {{criterion_1, 1, 1}, {criteria_2_3, 2, 3}, {criterion_4, 4, 4},
                        {criterion_5, 5, 5}, {criterion_6, 6, 6},  {criterion_7, 7, 7},
                        {criterion_8, 8, 8}, {criterion_9, 9, 9},  {criterion_10, 10, 10}};
  for (const Step& s : steps) {
    try {
      s.fn();
    } catch (const std::exception& e) {
      for (int i = s.first; i <= s.last; ++i)
        report(i, "criterion runner", false, fmt("unexpected exception: %s", e.what()));
    }
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
