// Solves the K = 1 traveling wave, compares it with the closed form, and
// checks it against a recentered particle snapshot average.
#include <cstdio>
#include <vector>

#include "mfwave/mfwave.hpp"

int main() {
  using namespace mfwave;
  const ModelParams p;  // exponential(1) jumps, eta(nu) = 1 - nu

  const auto rep = solve_wave({5, 10, 20}, p, 5e-3);
  const double c = closed_form_shift_for_median(1.0, rep.phi.quantile(0.5));
  const auto exact = closed_form_wave(1.0, c, rep.phi.left(), rep.phi.right(), rep.phi.step());
  std::printf("wave: w_B = %.8f (v = %.8f), sup |phi - closed form| = %.2e\n", rep.final_w, rep.speed,
              sup_distance(rep.phi, exact));

  const std::size_t n = 1000;
  const double burn = 10.0 * static_cast<double>(n) / rep.speed;
  std::vector<double> schedule;
  for (int k = 0; k < 10; ++k) schedule.push_back(burn + 100.0 * k);
  const auto log = run(p, n, p.rate, schedule.back(), stream_seed(1, "sample"), schedule);
  std::printf("particles: n = %zu, mean speed %.4f +- %.4f, sup |average - phi| = %.3f\n", n, log.mean_speed(),
              log.speed_standard_error(), empirical_sup_distance(recentered_average(log), rep.phi));
}
