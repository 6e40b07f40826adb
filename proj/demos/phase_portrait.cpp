// Reproduces the dissipative 2-torus picture: integral curves of the
// H = sin(2 pi y) system from a fan of initial points, written as SVG.

#include <fstream>
#include <iostream>

#include "cflab/cflab.hpp"

int main() {
  using namespace cflab;
  Scenario sc = build("sin2d");

  std::vector<Trajectory> curves;
  IntegratorOptions opts = sc.integrator;
  opts.sample_dt = 0.002;
  for (int k = 0; k < 12; ++k) {
    Vec x0(2);
    x0 << (k % 4) * 0.25, 0.04 + 0.92 * k / 11.0;
    curves.push_back(integrate(*sc.chart, x0, 1.2, opts));
  }

  std::ofstream f("sin2d_phase.svg");
  f << phase_portrait_svg(curves, "H = sin(2 pi y) on the flat torus");
  std::cout << "wrote sin2d_phase.svg\n";
  return 0;
}
