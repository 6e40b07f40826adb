// Prints the Lyapunov report of the attracting periodic orbit of the
// cotangent-bundle scenario and checks the spectrum symmetry pairing.

#include <iostream>

#include "cflab/cflab.hpp"

int main() {
  using namespace cflab;
  Scenario sc = build("cotangent_attractor");

  IntegratorOptions opts = sc.integrator;
  opts.rtol = opts.atol = 1e-10;
  const LyapunovReport rep =
      lyapunov_spectrum(*sc.chart, *sc.periodic_point, 200.0, 0.5, opts);

  std::cout << to_json(rep).dump(2) << "\n";
  const SpectrumSymmetry sym = check_spectrum_symmetry(rep, 1e-2);
  std::cout << "pairing lambda_k + lambda_{s-k+1} = r_bar: "
            << (sym.pass ? "holds" : "violated") << " (max residual "
            << sym.max_abs_residual << ")\n";
  return 0;
}
