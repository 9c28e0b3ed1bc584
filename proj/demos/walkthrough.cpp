// Walk through one heralded entanglement run: cavity response, choice of the
// preparation angle, the heralded state, readout after transport and the
// error budget.

#include <cstdio>

#include "carvesim/pipeline.hpp"

using namespace carvesim;

int main() {
  const auto cavity = CavityParams::reference();
  const double c = cavity.cooperativity();
  std::printf("cavity: C = %.2f, r(one atom) = %+.3f, r(empty) = %+.3f\n", c,
              on_resonance_amplitude(c, cavity.kappa_wg / cavity.kappa), on_resonance_amplitude(0.0, 0.184));

  const auto amps = amplitudes_from_reflectivities(kMeasuredReflectivities);
  for (double v : {1.0, 0.96, 0.9}) {
    const auto best = optimize_angle(amps, v);
    std::printf("contrast %.2f: best theta = %.3f pi, F = %.3f, herald probability %.3f\n", v,
                best.theta / constants::pi, best.fidelity, best.success_probability);
  }

  ExperimentConfig cfg;
  cfg.bootstrap_resamples = 400;
  const auto r = run_experiment(cfg);
  const auto& in = r.in_situ.tomography;
  const auto& out = r.post_transport.tomography;
  std::printf("\nin situ:         true F = %.3f, estimated %.3f [%.3f, %.3f]\n", r.in_situ.state_fidelity,
              in.estimate.fidelity, in.intervals.at("fidelity").lo, in.intervals.at("fidelity").hi);
  std::printf("after transport: true F = %.3f, estimated %.3f [%.3f, %.3f], uncorrected %.3f\n",
              r.post_transport.state_fidelity, out.estimate.fidelity, out.intervals.at("fidelity").lo,
              out.intervals.at("fidelity").hi, r.uncorrected_fidelity);
  std::printf("transport contrast per atom: %.3f, %.3f\n", r.contrast.atom_a, r.contrast.atom_b);
  std::printf("entanglement certified at %.0f%%: %s (F > %.3f, C > %.3f)\n", 100.0 * out.certification_confidence,
              out.entanglement_certified() ? "yes" : "no", out.fidelity_lower, out.concurrence_lower);

  std::printf("\n%-15s %8s %8s\n", "stage", "in situ", "moved");
  for (const auto& s : fidelity_ladder(cfg))
    std::printf("%-15s %8.4f %8.4f\n", to_string(s.stage).c_str(), s.in_situ, s.post_transport);
  return 0;
}
