// Times the posterior grid scan with the serial reference loop and the
// OpenMP-parallel loop, and verifies both produce identical bytes.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "roagp/grid_eval.hpp"
#include "roagp/window_gp.hpp"

#ifdef ROAGP_HAVE_OPENMP
#include <omp.h>
#endif

using namespace roagp;

namespace {

double run_pass(const WindowState& state, const DomainGrid& grid, EvalMode mode,
                std::vector<double>& mu, std::vector<double>& sigma) {
  const auto start = std::chrono::steady_clock::now();
  evaluate_posterior_grid(state, grid, mu, sigma, mode);
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main() {
  KernelSpec kernel;
  kernel.length_scale = 0.5;
  kernel.signal_variance = 1.0;
  kernel.noise_variance = 1e-4;

  const int h = 100;
  WindowState state = WindowState::initial(kernel, h, 2);

  // Deterministic synthetic window: observations follow a smooth bowl.
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int i = 0; i < h; ++i) {
    Vec x(2);
    x << coord(rng), coord(rng);
    state = state.push(x, 0.5 * x.squaredNorm());
  }

  DomainGrid grid({0, 1}, Vec::Constant(2, -2.0), Vec::Constant(2, 2.0), {101, 101}, 2);

  std::vector<double> mu_s, sigma_s, mu_p, sigma_p;
  const int reps = 5;

  double serial_best = 1e300;
  double parallel_best = 1e300;
  for (int r = 0; r < reps; ++r) {
    serial_best = std::min(serial_best, run_pass(state, grid, EvalMode::Serial, mu_s, sigma_s));
    parallel_best =
        std::min(parallel_best, run_pass(state, grid, EvalMode::Parallel, mu_p, sigma_p));
  }

  bool identical = mu_s.size() == mu_p.size() && sigma_s.size() == sigma_p.size();
  for (std::size_t i = 0; identical && i < mu_s.size(); ++i) {
    identical = mu_s[i] == mu_p[i] && sigma_s[i] == sigma_p[i];
  }

#ifdef ROAGP_HAVE_OPENMP
  std::printf("threads:        %d\n", omp_get_max_threads());
#else
  std::printf("threads:        1 (built without OpenMP)\n");
#endif
  std::printf("grid:           %lld points, window h = %d\n",
              static_cast<long long>(grid.size()), h);
  std::printf("serial:         %.2f ms\n", serial_best);
  std::printf("parallel:       %.2f ms\n", parallel_best);
  std::printf("speedup:        %.2fx\n", serial_best / parallel_best);
  std::printf("bitwise equal:  %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
