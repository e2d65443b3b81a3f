// Serial vs OpenMP timings for the hot kernels. Prints one line per kernel.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "wigner/kernels.hpp"

using namespace wigner;
using Clock = std::chrono::steady_clock;

namespace {

template <class Fn>
double best_ms(Fn&& fn, int reps = 5) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

template <class Fn>
void report(const char* name, Fn&& fn) {
  double sink = 0.0;
  const double s = best_ms([&] { sink += fn(ExecPolicy::serial); });
  const double p = best_ms([&] { sink += fn(ExecPolicy::parallel); });
  std::printf("%-24s serial %9.2f ms  parallel %9.2f ms  speedup %5.2f  (checksum %.6g)\n", name, s, p, s / p, sink);
}

}  // namespace

int main() {
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;

  const std::size_t axes = 4, per_axis = 24;
  std::vector<double> w(static_cast<std::size_t>(std::pow(per_axis, axes)));
  for (double& x : w) x = std::abs(g(rng));
  std::vector<std::vector<cplx>> phases(axes, std::vector<cplx>(per_axis));
  std::vector<std::vector<double>> centers(axes, std::vector<double>(per_axis));
  for (std::size_t a = 0; a < axes; ++a) {
    for (std::size_t i = 0; i < per_axis; ++i) {
      phases[a][i] = std::polar(1.0, g(rng));
      centers[a][i] = g(rng);
    }
  }
  const std::vector<double> qw{0.5, 1.0, 1.5, 2.0};

  report("grid_fourier_sum", [&](ExecPolicy p) { return std::abs(kernels::grid_fourier_sum(p, phases, w)); });
  report("grid_q_reduce", [&](ExecPolicy p) {
    return kernels::grid_q_reduce(p, centers, qw, w, [](double q) { return std::pow(q, 0.5); });
  });
  report("outer_product", [&](ExecPolicy p) { return kernels::outer_product(p, centers).back(); });

  std::vector<Eigen::MatrixXcd> tables(3, Eigen::MatrixXcd::Random(9, 40));
  std::vector<kernels::HusimiGroup> groups(6);
  for (auto& grp : groups) {
    for (int a = 0; a <= 8; ++a) {
      for (int b = 0; a + b <= 8; ++b) {
        grp.kept.insert(grp.kept.end(), {a, b, 8 - a - b});
        grp.coeffs.emplace_back(g(rng), g(rng));
      }
    }
  }
  report("husimi_contract", [&](ExecPolicy p) { return kernels::husimi_contract(p, tables, groups).front(); });

  const Eigen::Index dim = 120;
  report("weighted_matrix_sum", [&](ExecPolicy p) {
    return std::abs(kernels::weighted_matrix_sum(
        p, 64, dim, [](std::size_t k) { return cplx(1.0 / (1.0 + k), 0.0); },
        [dim](std::size_t k) {
          Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim) * static_cast<double>(k);
          return Eigen::MatrixXcd((m * m.adjoint()).eval());
        })(0, 0));
  });

  Eigen::VectorXcd x = Eigen::VectorXcd::Random(1 << 16), y;
  report("single_mode_field_apply", [&](ExecPolicy p) {
    kernels::single_mode_field_apply(p, cplx(0.3, -0.2), 0.01, x, y);
    return std::abs(y(7));
  });
}
