#pragma once

// Hot loops of the library. Every kernel has a serial reference path and an
// OpenMP path selected by ExecPolicy; tests check that both agree.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "wigner/types.hpp"

namespace wigner::kernels {

/// Evaluates fn(i) for i in [0, n) into out[i]. Results are reduced by the
/// caller in index order, so the outcome does not depend on the policy.
template <class T, class Fn>
void map_indexed(ExecPolicy policy, std::size_t n, std::vector<T>& out, Fn&& fn) {
  out.resize(n);
  if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  }
}

/// sum_cells w[cell] * prod_a phase[a][i_a] for a row-major grid whose last
/// axis varies fastest. Contracts trailing axes one at a time.
cplx grid_fourier_sum(ExecPolicy policy, const std::vector<std::vector<cplx>>& phases, std::span<const double> w);

/// sum_cells w[cell] * g(q(center)) with q = sum_a qw[a] * x_a^2.
template <class G>
double grid_q_reduce(ExecPolicy policy, const std::vector<std::vector<double>>& centers, std::span<const double> qw,
                     std::span<const double> w, G&& g) {
  const std::size_t n_axes = centers.size();
  std::vector<std::size_t> stride(n_axes, 1);
  for (std::size_t a = n_axes; a-- > 1;) stride[a - 1] = stride[a] * centers[a].size();
  std::vector<std::vector<double>> contrib(n_axes);
  for (std::size_t a = 0; a < n_axes; ++a) {
    for (double x : centers[a]) contrib[a].push_back(qw[a] * x * x);
  }
  auto cell_value = [&](std::size_t cell) {
    double q = 0.0;
    std::size_t rem = cell;
    for (std::size_t a = 0; a < n_axes; ++a) {
      q += contrib[a][rem / stride[a]];
      rem %= stride[a];
    }
    return w[cell] == 0.0 ? 0.0 : w[cell] * g(q);
  };
  double total = 0.0;
  const long long n = static_cast<long long>(w.size());
  if (policy == ExecPolicy::parallel) {
#pragma omp parallel for reduction(+ : total) schedule(static)
    for (long long c = 0; c < n; ++c) total += cell_value(static_cast<std::size_t>(c));
  } else {
    for (long long c = 0; c < n; ++c) total += cell_value(static_cast<std::size_t>(c));
  }
  return total;
}

/// Row-major outer product of the factor vectors (last factor fastest).
std::vector<double> outer_product(ExecPolicy policy, const std::vector<std::vector<double>>& factors);

/// One group of basis states sharing the occupations of the traced modes:
/// rows of `kept` index the coherent tables of the kept modes.
struct HusimiGroup {
  std::vector<int> kept;  // n_kept entries per basis state, row-major
  std::vector<cplx> coeffs;
};

/// density[cell] = sum_groups |sum_states coeff * prod_j conj(table_j[n_j][p_j])|^2
/// where cell enumerates the row-major product of per-mode point lists and
/// table_j is (max occupation + 1) x (points of mode j), column-major.
std::vector<double> husimi_contract(ExecPolicy policy, const std::vector<Eigen::MatrixXcd>& tables,
                                    const std::vector<HusimiGroup>& groups);

/// sum_k weights[k] * mats[k] accumulated in index order.
Eigen::MatrixXcd weighted_matrix_sum(ExecPolicy policy, std::size_t n_terms, Eigen::Index dim,
                                     const std::function<cplx(std::size_t)>& weight,
                                     const std::function<Eigen::MatrixXcd(std::size_t)>& matrix);

/// y = phi x for the single-mode field sqrt(h) (xi b* + conj(xi) b) truncated
/// at x.size() - 1 quanta.
void single_mode_field_apply(ExecPolicy policy, cplx xi, double h, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

}  // namespace wigner::kernels
