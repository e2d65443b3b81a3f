#include "wigner/kernels.hpp"

#include <cmath>

namespace wigner::kernels {

cplx grid_fourier_sum(ExecPolicy policy, const std::vector<std::vector<cplx>>& phases, std::span<const double> w) {
  if (phases.empty()) return w.empty() ? cplx{} : cplx(w[0]);
  std::size_t total = 1;
  for (const auto& p : phases) total *= p.size();
  if (total != w.size()) throw DimensionError("grid_fourier_sum: phase tables do not match the grid");

  // First contraction reads the real weights directly.
  const auto& last = phases.back();
  std::size_t outer = total / last.size();
  std::vector<cplx> cur(outer);
  auto contract_first = [&](std::size_t o) {
    cplx s = 0.0;
    const double* row = w.data() + o * last.size();
    for (std::size_t i = 0; i < last.size(); ++i) s += row[i] * last[i];
    return s;
  };
  if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(static)
    for (long long o = 0; o < static_cast<long long>(outer); ++o) cur[o] = contract_first(static_cast<std::size_t>(o));
  } else {
    for (std::size_t o = 0; o < outer; ++o) cur[o] = contract_first(o);
  }
  for (std::size_t a = phases.size() - 1; a-- > 0;) {
    const auto& ph = phases[a];
    const std::size_t next_outer = outer / ph.size();
    std::vector<cplx> next(next_outer);
    auto contract = [&](std::size_t o) {
      cplx s = 0.0;
      const cplx* row = cur.data() + o * ph.size();
      for (std::size_t i = 0; i < ph.size(); ++i) s += row[i] * ph[i];
      return s;
    };
    if (policy == ExecPolicy::parallel && next_outer > 64) {
#pragma omp parallel for schedule(static)
      for (long long o = 0; o < static_cast<long long>(next_outer); ++o) next[o] = contract(static_cast<std::size_t>(o));
    } else {
      for (std::size_t o = 0; o < next_outer; ++o) next[o] = contract(o);
    }
    cur.swap(next);
    outer = next_outer;
  }
  return cur[0];
}

std::vector<double> outer_product(ExecPolicy policy, const std::vector<std::vector<double>>& factors) {
  std::size_t total = 1;
  for (const auto& f : factors) total *= f.size();
  std::vector<double> out(total);
  const std::size_t n_axes = factors.size();
  std::vector<std::size_t> stride(n_axes, 1);
  for (std::size_t a = n_axes; a-- > 1;) stride[a - 1] = stride[a] * factors[a].size();
  auto value = [&](std::size_t cell) {
    double v = 1.0;
    std::size_t rem = cell;
    for (std::size_t a = 0; a < n_axes; ++a) {
      v *= factors[a][rem / stride[a]];
      rem %= stride[a];
    }
    return v;
  };
  if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(total); ++c) out[c] = value(static_cast<std::size_t>(c));
  } else {
    for (std::size_t c = 0; c < total; ++c) out[c] = value(c);
  }
  return out;
}

std::vector<double> husimi_contract(ExecPolicy policy, const std::vector<Eigen::MatrixXcd>& tables,
                                    const std::vector<HusimiGroup>& groups) {
  const std::size_t n_kept = tables.size();
  std::size_t total = 1;
  for (const auto& t : tables) total *= static_cast<std::size_t>(t.cols());
  std::vector<std::size_t> stride(n_kept, 1);
  for (std::size_t a = n_kept; a-- > 1;) stride[a - 1] = stride[a] * static_cast<std::size_t>(tables[a].cols());

  auto density = [&](std::size_t cell) {
    std::vector<Eigen::Index> p(n_kept);
    std::size_t rem = cell;
    for (std::size_t a = 0; a < n_kept; ++a) {
      p[a] = static_cast<Eigen::Index>(rem / stride[a]);
      rem %= stride[a];
    }
    double d = 0.0;
    for (const auto& g : groups) {
      cplx amp = 0.0;
      for (std::size_t s = 0; s < g.coeffs.size(); ++s) {
        cplx overlap = 1.0;
        for (std::size_t a = 0; a < n_kept; ++a) overlap *= std::conj(tables[a](g.kept[s * n_kept + a], p[a]));
        amp += overlap * g.coeffs[s];
      }
      d += std::norm(amp);
    }
    return d;
  };
  std::vector<double> out(total);
  if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(total); ++c) out[c] = density(static_cast<std::size_t>(c));
  } else {
    for (std::size_t c = 0; c < total; ++c) out[c] = density(c);
  }
  return out;
}

Eigen::MatrixXcd weighted_matrix_sum(ExecPolicy policy, std::size_t n_terms, Eigen::Index dim,
                                     const std::function<cplx(std::size_t)>& weight,
                                     const std::function<Eigen::MatrixXcd(std::size_t)>& matrix) {
  if (policy == ExecPolicy::serial) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t k = 0; k < n_terms; ++k) {
      const cplx wk = weight(k);
      if (wk != 0.0) acc += wk * matrix(k);
    }
    return acc;
  }
  // Fixed-size chunks summed in order: independent of the thread count.
  constexpr std::size_t kChunk = 64;
  const std::size_t n_chunks = (n_terms + kChunk - 1) / kChunk;
  std::vector<Eigen::MatrixXcd> partial(n_chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(n_terms, begin + kChunk);
    for (std::size_t k = begin; k < end; ++k) {
      const cplx wk = weight(k);
      if (wk != 0.0) acc += wk * matrix(k);
    }
    partial[static_cast<std::size_t>(c)] = std::move(acc);
  }
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& p : partial) acc += p;
  return acc;
}

void single_mode_field_apply(ExecPolicy policy, cplx xi, double h, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  const Eigen::Index n = x.size();
  y.resize(n);
  const cplx up = std::sqrt(h) * xi;
  const cplx down = std::sqrt(h) * std::conj(xi);
  auto row = [&](Eigen::Index k) {
    cplx v = 0.0;
    if (k > 0) v += up * std::sqrt(static_cast<double>(k)) * x[k - 1];
    if (k + 1 < n) v += down * std::sqrt(static_cast<double>(k + 1)) * x[k + 1];
    return v;
  };
  if (policy == ExecPolicy::parallel && n > 4096) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) y[k] = row(k);
  } else {
    for (Eigen::Index k = 0; k < n; ++k) y[k] = row(k);
  }
}

}  // namespace wigner::kernels
