// Coverage of the four reference models at beta = 2 (about 3 dB), analytic and
// simulated side by side.

#include <cstdio>

#include "hetnet/hetnet.hpp"

int main() {
  using namespace hetnet;
  PresetParams p;
  p.beta_m = p.beta_s = 2.0;
  std::printf("model  analytic  simulated (+- 1.96 se)\n");
  for (int model = 1; model <= 4; ++model) {
    const Scenario s = preset(model, p);
    const AnalyticCoverage a = coverage_probability(s);
    SimulationOptions opt;
    opt.trials = 20000;
    opt.window_radius = 5.0 / std::sqrt(std::numbers::pi * p.lambda_m);
    const CoverageEstimate e = estimate_coverage(s, opt);
    std::printf("%5d  %8.4f  %8.4f (+- %.4f)\n", model, a.p_c, e.p_hat, 1.96 * e.std_error);
  }
}
