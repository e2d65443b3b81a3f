#include "wigner/weyl.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace wigner {

namespace {

PhasePoint weyl_argument(const ModeSpace& modes, const PhasePoint& xi, bool use_m) {
  if (xi.size() != modes.n_modes()) throw DimensionError("Weyl argument has wrong mode count");
  return use_m ? modes.apply_m(xi) : xi;
}

double spectral_norm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

FockOperator weyl_operator(const FockSpacePtr& space, const PhasePoint& xi, double h, const WeylOptions& opts) {
  check_h(h);
  const PhasePoint zeta = weyl_argument(space->modes(), xi, opts.use_m);
  const double znorm = std::sqrt(zeta.norm2());
  if (znorm == 0.0) {
    auto id = FockOperator::identity(space, h);
    return FockOperator(space, h, id.matrix(), FockOperator::kNonPolynomial, 0.0);
  }
  const FockOperator phi = field_operator(space, zeta, h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi.matrix());
  const Eigen::MatrixXcd& V = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::VectorXcd phase = (kI * lam.cast<cplx>()).array().exp();
  Eigen::MatrixXcd W = V * phase.asDiagonal() * V.adjoint();

  // Duhamel bound on the certified columns: the truncated field misses only
  // the part of a*(zeta) that maps the top shell out of the space.
  const int N = space->cutoff();
  const int T = opts.exact_total < 0 ? N / 2 : std::min(opts.exact_total, N);
  const auto k = static_cast<Eigen::Index>(space->count_upto(T));
  const auto top_begin = static_cast<Eigen::Index>(space->shell_offset(N));
  const auto n_top = static_cast<Eigen::Index>(space->dim()) - top_begin;
  const Eigen::MatrixXcd Vt = V.middleRows(top_begin, n_top);
  const Eigen::MatrixXcd Vc = V.adjoint().leftCols(k);
  double worst = 0.0;
  const int samples = std::max(1, opts.time_samples);
  for (int i = 1; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    const Eigen::VectorXcd ph = (kI * s * lam.cast<cplx>()).array().exp();
    const Eigen::MatrixXcd top = Vt * ph.asDiagonal() * Vc;
    worst = std::max(worst, top.colwise().norm().maxCoeff());
  }
  const double leak = std::sqrt(h) * znorm * std::sqrt(N + 1.0) * worst;
  if (leak > opts.leak_threshold) {
    throw TruncationError("weyl_operator: leak bound " + std::to_string(leak) + " exceeds threshold at cutoff " +
                              std::to_string(N),
                          leak, 0);
  }
  return FockOperator(space, h, std::move(W), FockOperator::kNonPolynomial, leak);
}

double weyl_relation_residual(const FockSpacePtr& space, const PhasePoint& xi, const PhasePoint& zeta, double h,
                              const WeylOptions& opts) {
  const FockOperator w1 = weyl_operator(space, xi, h, opts);
  const FockOperator w2 = weyl_operator(space, zeta, h, opts);
  const FockOperator w3 = weyl_operator(space, xi + zeta, h, opts);
  const auto& modes = space->modes();
  const double sigma = opts.use_m ? symplectic_form(modes.apply_m(xi), modes.apply_m(zeta)) : symplectic_form(xi, zeta);
  const int N = space->cutoff();
  const int T = opts.exact_total < 0 ? N / 2 : std::min(opts.exact_total, N);
  const auto k = static_cast<Eigen::Index>(space->count_upto(T));
  const Eigen::MatrixXcd lhs = w1.matrix() * w2.matrix().leftCols(k);
  const Eigen::MatrixXcd rhs = std::exp(-kI * h * sigma) * w3.matrix().leftCols(k);
  return spectral_norm(lhs - rhs);
}

int weyl_auto_cutoff(const ModeSpace& modes, const std::vector<PhasePoint>& args, double h, const WeylOptions& opts,
                     int max_cutoff) {
  auto ok = [&](int n) {
    auto space = FockSpace::make(modes, n);
    try {
      for (const auto& a : args) weyl_operator(space, a, h, opts);
    } catch (const TruncationError&) {
      return false;
    }
    return true;
  };
  int hi = 4;
  while (!ok(hi)) {
    if (hi >= max_cutoff) throw TruncationError("weyl_auto_cutoff: no cutoff up to the limit meets the threshold", 0.0, 0);
    hi = std::min(2 * hi, max_cutoff);
  }
  int lo = hi / 2;
  if (lo < 1 || hi == 4) lo = 0;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

Eigen::VectorXcd expm_i_apply(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& apply,
                              double norm_bound, const Eigen::VectorXcd& v,
                              const std::function<void(const Eigen::VectorXcd&)>& on_step, int min_steps) {
  const int steps = std::max(min_steps, static_cast<int>(std::ceil(norm_bound / 0.5)));
  const double tau = 1.0 / steps;
  Eigen::VectorXcd x = v;
  Eigen::VectorXcd term, next, result;
  for (int step = 0; step < steps; ++step) {
    result = x;
    term = x;
    for (int k = 1; k <= 80; ++k) {
      apply(term, next);
      term = next * (kI * tau / static_cast<double>(k));
      result += term;
      if (term.norm() <= 1e-17 * std::max(result.norm(), 1e-300)) break;
    }
    x.swap(result);
    if (on_step) on_step(x);
  }
  return x;
}

WeylApplyResult weyl_apply(const FockSpace& space, const PhasePoint& zeta, double h, const Eigen::VectorXcd& v) {
  check_h(h);
  if (zeta.size() != space.n_modes()) throw DimensionError("weyl_apply: argument has wrong mode count");
  if (v.size() != static_cast<Eigen::Index>(space.dim())) throw DimensionError("weyl_apply: vector size mismatch");
  const double znorm = std::sqrt(zeta.norm2());
  if (znorm == 0.0) return {v, 0.0};
  const double sh = std::sqrt(h);
  const std::size_t M = space.n_modes();
  auto apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y = Eigen::VectorXcd::Zero(x.size());
    for (std::size_t i = 0; i < space.dim(); ++i) {
      auto occ = space.occupation(i);
      for (std::size_t j = 0; j < M; ++j) {
        const auto lo = space.lowered(j, i);
        if (lo < 0) continue;
        const double c = sh * std::sqrt(static_cast<double>(occ[j]));
        y[lo] += c * std::conj(zeta[j]) * x[static_cast<Eigen::Index>(i)];
        y[static_cast<Eigen::Index>(i)] += c * zeta[j] * x[lo];
      }
    }
  };
  const int N = space.cutoff();
  const auto top_begin = static_cast<Eigen::Index>(space.shell_offset(N));
  const auto n_top = static_cast<Eigen::Index>(space.dim()) - top_begin;
  double worst = v.segment(top_begin, n_top).norm();
  auto track = [&](const Eigen::VectorXcd& x) { worst = std::max(worst, x.segment(top_begin, n_top).norm()); };
  const double bound = 2.0 * sh * znorm * std::sqrt(static_cast<double>(std::max(N, 1)));
  Eigen::VectorXcd out = expm_i_apply(apply, bound, v, track, 8);
  return {std::move(out), sh * znorm * std::sqrt(N + 1.0) * worst};
}

SingleModeWeyl::SingleModeWeyl(Eigen::VectorXcd psi, double h, ExecPolicy policy)
    : psi_(std::move(psi)), h_(h), policy_(policy) {
  check_h(h);
  support_ = 0;
  for (Eigen::Index n = psi_.size(); n-- > 0;) {
    if (psi_[n] != 0.0) {
      support_ = static_cast<int>(n);
      break;
    }
  }
  psi_.conservativeResize(support_ + 1);
}

int SingleModeWeyl::required_cutoff(double reach) const {
  const double a = std::sqrt(static_cast<double>(support_)) + std::sqrt(h_) * reach;
  return static_cast<int>(std::ceil(a * a + 12.0 * a + 40.0));
}

void SingleModeWeyl::prepare(double reach) {
  const int need = required_cutoff(reach);
  if (need <= cached_cutoff_) return;
  const int n = std::max(need, cached_cutoff_ + cached_cutoff_ / 4);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd sub(n);
  for (int k = 0; k < n; ++k) sub[k] = std::sqrt(k + 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  vectors_ = es.eigenvectors();
  values_ = es.eigenvalues();
  cached_cutoff_ = n;
}

GFValue SingleModeWeyl::expectation(cplx zeta) const {
  const double r = std::abs(zeta);
  if (r == 0.0) return {norm2(), 0.0};
  if (cached_cutoff_ < required_cutoff(r)) return taylor_expectation(zeta);
  const double theta = std::arg(zeta);
  Eigen::VectorXcd rotated(psi_.size());
  for (Eigen::Index k = 0; k < psi_.size(); ++k) rotated[k] = psi_[k] * std::polar(1.0, -theta * static_cast<double>(k));
  const Eigen::VectorXcd c = vectors_.topRows(psi_.size()).transpose().cast<cplx>() * rotated;
  const double scale = r * std::sqrt(h_);
  // Duhamel samples at s = i/8 share one phase step per eigenvalue.
  std::array<cplx, 8> top{};
  cplx value = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    const cplx step = std::polar(1.0, scale * values_[k] / 8.0);
    const cplx weight = vectors_(cached_cutoff_, k) * c[k];
    cplx phase = 1.0;
    for (int i = 0; i < 8; ++i) {
      phase *= step;
      top[static_cast<std::size_t>(i)] += weight * phase;
    }
    value += phase * std::norm(c[k]);
  }
  double worst = 0.0;
  for (const cplx& t : top) worst = std::max(worst, std::abs(t));
  const double leak = scale * std::sqrt(cached_cutoff_ + 1.0) * worst * std::sqrt(norm2());
  return {value, leak};
}

GFValue SingleModeWeyl::taylor_expectation(cplx zeta) const {
  const double r = std::abs(zeta);
  const int n = required_cutoff(r);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n + 1);
  x.head(psi_.size()) = psi_;
  auto apply = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    kernels::single_mode_field_apply(policy_, zeta, h_, in, out);
  };
  double worst = 0.0;
  auto track = [&](const Eigen::VectorXcd& v) { worst = std::max(worst, std::abs(v[n])); };
  const Eigen::VectorXcd y = expm_i_apply(apply, 2.0 * std::sqrt(h_) * r * std::sqrt(static_cast<double>(n)), x, track, 8);
  const cplx value = x.dot(y);
  return {value, std::sqrt(h_) * r * std::sqrt(n + 1.0) * worst * std::sqrt(norm2())};
}

PolynomialSymbol PolynomialSymbol::constant(std::size_t n, cplx c) {
  PolynomialSymbol p(n);
  p.add(std::vector<int>(n, 0), std::vector<int>(n, 0), c);
  return p;
}

PolynomialSymbol PolynomialSymbol::quadratic(std::size_t n, std::size_t R, std::span<const double> weights) {
  if (R > n) throw DomainError("PolynomialSymbol::quadratic: R exceeds the mode count");
  if (!weights.empty() && weights.size() < R) throw DimensionError("PolynomialSymbol::quadratic: too few weights");
  PolynomialSymbol p(n);
  for (std::size_t j = 0; j < R; ++j) {
    std::vector<int> e(n, 0);
    e[j] = 1;
    p.add(e, e, weights.empty() ? 1.0 : weights[j]);
  }
  return p;
}

PolynomialSymbol& PolynomialSymbol::add(std::vector<int> zbar, std::vector<int> z, cplx coeff) {
  if (zbar.size() != n_modes || z.size() != n_modes) throw DimensionError("PolynomialSymbol::add: multi-degree length");
  for (int d : zbar) {
    if (d < 0) throw DomainError("PolynomialSymbol::add: negative degree");
  }
  for (int d : z) {
    if (d < 0) throw DomainError("PolynomialSymbol::add: negative degree");
  }
  terms.push_back({std::move(zbar), std::move(z), coeff});
  return *this;
}

PolynomialSymbol& PolynomialSymbol::operator+=(const PolynomialSymbol& other) {
  if (other.n_modes != n_modes) throw DimensionError("PolynomialSymbol +=: mode count differs");
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  return *this;
}

int PolynomialSymbol::degree() const {
  int d = 0;
  for (const auto& t : terms) {
    int s = 0;
    for (std::size_t j = 0; j < n_modes; ++j) s += t.zbar[j] + t.z[j];
    d = std::max(d, s);
  }
  return d;
}

cplx PolynomialSymbol::evaluate(const PhasePoint& z) const {
  if (z.size() != n_modes) throw DimensionError("PolynomialSymbol::evaluate: point has wrong mode count");
  cplx total = 0.0;
  for (const auto& t : terms) {
    cplx v = t.coeff;
    for (std::size_t j = 0; j < n_modes; ++j) v *= std::pow(std::conj(z[j]), t.zbar[j]) * std::pow(z[j], t.z[j]);
    total += v;
  }
  return total;
}

bool PolynomialSymbol::is_real(double tol) const {
  std::map<std::pair<std::vector<int>, std::vector<int>>, cplx> c;
  for (const auto& t : terms) c[{t.zbar, t.z}] += t.coeff;
  for (const auto& [key, value] : c) {
    auto it = c.find({key.second, key.first});
    const cplx partner = it == c.end() ? cplx{} : it->second;
    if (std::abs(value - std::conj(partner)) > tol * std::max(1.0, std::abs(value))) return false;
  }
  return true;
}

FockOperator quantize_polynomial(const FockSpacePtr& space, const PolynomialSymbol& p, Ordering ordering, double h,
                                 bool use_m) {
  check_h(h);
  if (p.n_modes != space->n_modes()) throw DimensionError("quantize_polynomial: symbol mode count differs");
  const int deg = p.degree();
  if (deg > space->cutoff()) throw DomainError("quantize_polynomial: degree exceeds the cutoff");
  if (ordering == Ordering::weyl && deg > 4) throw DomainError("quantize_polynomial: Weyl ordering supports degree <= 4");

  const std::size_t M = space->n_modes();
  // factor code 2j: annihilator of mode j, 2j+1: creator of mode j
  std::vector<Eigen::MatrixXcd> factor(2 * M);
  for (std::size_t j = 0; j < M; ++j) {
    const PhasePoint e = PhasePoint::unit(M, j);
    auto [a, adag] = use_m ? m_ladder(space, e, h) : ladder_operators(space, e, h);
    factor[2 * j] = a.matrix();
    factor[2 * j + 1] = adag.matrix();
  }
  const auto n = static_cast<Eigen::Index>(space->dim());
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& t : p.terms) {
    std::vector<int> creators, annihilators;
    for (std::size_t j = 0; j < M; ++j) {
      creators.insert(creators.end(), t.zbar[j], static_cast<int>(2 * j + 1));
      annihilators.insert(annihilators.end(), t.z[j], static_cast<int>(2 * j));
    }
    auto product = [&](const std::vector<int>& codes) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
      for (int c : codes) m = m * factor[static_cast<std::size_t>(c)];
      return m;
    };
    if (ordering == Ordering::wick) {
      std::vector<int> codes = creators;
      codes.insert(codes.end(), annihilators.begin(), annihilators.end());
      total += t.coeff * product(codes);
    } else {
      std::vector<int> codes = creators;
      codes.insert(codes.end(), annihilators.begin(), annihilators.end());
      std::sort(codes.begin(), codes.end());
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
      int count = 0;
      do {
        acc += product(codes);
        ++count;
      } while (std::next_permutation(codes.begin(), codes.end()));
      total += (t.coeff / static_cast<double>(count)) * acc;
    }
  }
  FockOperator op(space, h, std::move(total), deg);
  return p.is_real() ? op.hermitian_part() : op;
}

SampledSymbol::SampledSymbol(std::size_t n_modes, double extent, int points, Generator fhat)
    : n_modes_(n_modes), extent_(extent), points_(points), generator_(std::move(fhat)) {
  if (n_modes_ == 0) throw DomainError("SampledSymbol: at least one mode is required");
  if (!(extent_ > 0.0)) throw DomainError("SampledSymbol: extent must be positive");
  if (points_ < 2) throw DomainError("SampledSymbol: at least two points per axis are required");
  const double cells = std::pow(static_cast<double>(points_), 2.0 * static_cast<double>(n_modes_));
  if (cells > 5e7) throw ResourceError("SampledSymbol: grid has too many cells", cells);
  values_.resize(static_cast<std::size_t>(cells));
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const auto x = node(k);
    values_[k] = generator_(x);
    if (!std::isfinite(values_[k].real()) || !std::isfinite(values_[k].imag())) {
      throw NumericalError("SampledSymbol: non-finite Fourier sample");
    }
  }
}

double SampledSymbol::cell_volume() const { return std::pow(spacing(), 2.0 * static_cast<double>(n_modes_)); }

std::vector<double> SampledSymbol::node(std::size_t k) const {
  const std::size_t axes = 2 * n_modes_;
  std::vector<double> x(axes);
  const double d = spacing();
  for (std::size_t a = axes; a-- > 0;) {
    const auto i = static_cast<int>(k % static_cast<std::size_t>(points_));
    k /= static_cast<std::size_t>(points_);
    x[a] = -extent_ + (i + 0.5) * d;
  }
  return x;
}

PhasePoint SampledSymbol::frequency(std::size_t k) const {
  const auto x = node(k);
  PhasePoint p(n_modes_);
  for (std::size_t j = 0; j < n_modes_; ++j) p[j] = cplx(x[2 * j], x[2 * j + 1]);
  return p;
}

namespace {

bool on_boundary(std::size_t k, std::size_t axes, int points) {
  for (std::size_t a = 0; a < axes; ++a) {
    const auto i = static_cast<int>(k % static_cast<std::size_t>(points));
    if (i == 0 || i == points - 1) return true;
    k /= static_cast<std::size_t>(points);
  }
  return false;
}

}  // namespace

double SampledSymbol::boundary_max() const {
  double b = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (on_boundary(k, 2 * n_modes_, points_)) b = std::max(b, std::abs(values_[k]));
  }
  return b;
}

SampledSymbol SampledSymbol::half_resolution() const {
  if (points_ < 4) throw DomainError("SampledSymbol::half_resolution: grid too coarse");
  return SampledSymbol(n_modes_, extent_, points_ / 2, generator_);
}

double radial_fourier(const std::function<double(double)>& g, double support, std::span<const double> breaks,
                      std::size_t n_modes, double rho) {
  using boost::math::quadrature::gauss;
  std::vector<double> knots{0.0};
  for (double b : breaks) {
    if (b > 0.0 && b < support) knots.push_back(b);
  }
  knots.push_back(support);
  std::sort(knots.begin(), knots.end());
  const double n = static_cast<double>(n_modes);
  if (rho < 1e-14) {
    double s = 0.0;
    for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
      const double len = knots[p + 1] - knots[p];
      const int panels = std::max(1, static_cast<int>(std::ceil(len)));
      const double w = len / panels;
      for (int q = 0; q < panels; ++q) {
        s += gauss<double, 20>::integrate([&](double x) { return g(x) * std::pow(x, 2.0 * n - 1.0); },
                                          knots[p] + q * w, knots[p] + (q + 1) * w);
      }
    }
    return 2.0 * std::pow(kPi, n) / boost::math::tgamma(n) * s;
  }
  const int order = static_cast<int>(n_modes) - 1;
  auto f = [&](double x) { return g(x) * boost::math::cyl_bessel_j(order, 2.0 * kPi * rho * x) * std::pow(x, n); };
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
    const double len = knots[p + 1] - knots[p];
    const int panels = std::max(1, static_cast<int>(std::ceil(len * std::max(rho, 1.0))));
    const double w = len / panels;
    for (int q = 0; q < panels; ++q) {
      s += gauss<double, 20>::integrate(f, knots[p] + q * w, knots[p] + (q + 1) * w);
    }
  }
  return 2.0 * kPi * std::pow(rho, 1.0 - n) * s;
}

SampledSymbol SampledSymbol::from_radial(std::size_t n_modes, double extent, int points,
                                         std::function<double(double)> g, double support, std::vector<double> breaks,
                                         const PhasePoint& center, std::vector<double> scale) {
  if (!(support > 0.0)) throw DomainError("from_radial: support must be positive");
  if (!center.values().empty() && center.size() != n_modes) throw DimensionError("from_radial: center mode count");
  if (scale.empty()) scale.assign(n_modes, 1.0);
  if (scale.size() != n_modes) throw DimensionError("from_radial: scale length");
  double det = 1.0;
  for (double s : scale) {
    if (!(s > 0.0)) throw DomainError("from_radial: scales must be positive");
    det *= s * s;
  }
  struct Cache {
    std::mutex lock;
    std::unordered_map<long long, double> values;
  };
  auto cache = std::make_shared<Cache>();
  std::vector<double> c(2 * n_modes, 0.0);
  for (std::size_t j = 0; j < center.size(); ++j) {
    c[2 * j] = center[j].real();
    c[2 * j + 1] = center[j].imag();
  }
  Generator gen = [=](std::span<const double> eta) -> cplx {
    double rho2 = 0.0;
    double dot = 0.0;
    for (std::size_t a = 0; a < eta.size(); ++a) {
      const double u = eta[a] / scale[a / 2];
      rho2 += u * u;
      dot += eta[a] * c[a];
    }
    const auto key = std::llround(rho2 * 1073741824.0);
    double radial;
    {
      std::lock_guard<std::mutex> guard(cache->lock);
      auto it = cache->values.find(key);
      if (it != cache->values.end()) {
        radial = it->second;
      } else {
        radial = radial_fourier(g, support, breaks, n_modes, std::sqrt(rho2));
        cache->values.emplace(key, radial);
      }
    }
    return std::polar(radial / det, -2.0 * kPi * dot);
  };
  return SampledSymbol(n_modes, extent, points, std::move(gen));
}

namespace {

Eigen::MatrixXcd integral_sum(const FockSpacePtr& space, const SampledSymbol& s, double h, const IntegralOptions& opts) {
  const auto& modes = space->modes();
  const std::size_t M = space->n_modes();
  const auto dim = static_cast<Eigen::Index>(space->dim());
  const double vol = s.cell_volume();
  auto argument = [&](std::size_t k) {
    PhasePoint zeta = (kPi * s.frequency(k)).resized(M);
    return opts.use_m ? modes.apply_m(zeta) : zeta;
  };
  auto weight = [&](std::size_t k) { return vol * s.values()[k]; };
  if (M == 1) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sub(dim - 1);
    for (Eigen::Index k = 0; k + 1 < dim; ++k) sub[k] = std::sqrt(k + 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXcd V = es.eigenvectors().cast<cplx>();
    const Eigen::VectorXd lam = es.eigenvalues();
    auto matrix = [&](std::size_t k) -> Eigen::MatrixXcd {
      const cplx zeta = argument(k)[0];
      const double r = std::abs(zeta);
      const double theta = std::arg(zeta);
      const Eigen::VectorXcd ph = (kI * (r * std::sqrt(h)) * lam.cast<cplx>()).array().exp();
      Eigen::MatrixXcd w = V * ph.asDiagonal() * V.transpose();
      Eigen::VectorXcd u(dim);
      for (Eigen::Index n = 0; n < dim; ++n) u[n] = std::polar(1.0, theta * static_cast<double>(n));
      return u.asDiagonal() * w * u.conjugate().asDiagonal();
    };
    return kernels::weighted_matrix_sum(opts.policy, s.size(), dim, weight, matrix);
  }
  WeylOptions wopts;
  wopts.leak_threshold = std::numeric_limits<double>::infinity();
  auto matrix = [&](std::size_t k) -> Eigen::MatrixXcd {
    return weyl_operator(space, argument(k), h, wopts).matrix();
  };
  return kernels::weighted_matrix_sum(opts.policy, s.size(), dim, weight, matrix);
}

}  // namespace

IntegralQuantization quantize_integral(const FockSpacePtr& space, const SampledSymbol& s, double h,
                                       const IntegralOptions& opts) {
  check_h(h);
  if (s.n_modes() > space->n_modes()) throw DimensionError("quantize_integral: symbol has more modes than the space");
  const double dim = static_cast<double>(space->dim());
  const double work = 1.25 * static_cast<double>(s.size()) * dim * dim * dim;
  if (work > opts.max_work) throw ResourceError("quantize_integral: quadrature work exceeds the limit", work);
  const double b = s.boundary_max();
  if (b > opts.boundary_threshold) {
    throw QuadratureError("quantize_integral: Fourier samples do not decay at the grid boundary", b);
  }
  Eigen::MatrixXcd full = integral_sum(space, s, h, opts);
  double err = std::numeric_limits<double>::infinity();
  if (s.points() >= 4) err = spectral_norm(full - integral_sum(space, s.half_resolution(), h, opts));
  if (err > opts.tolerance) throw QuadratureError("quantize_integral: quadrature estimate above tolerance", err);
  return {FockOperator(space, h, std::move(full), FockOperator::kNonPolynomial, 0.0), err, b};
}

namespace {

struct ExpectationSum {
  cplx value;
  double leak;
  double boundary;
};

ExpectationSum expectation_sum(const SampledSymbol& s, const std::function<GFValue(const PhasePoint&)>& G,
                               ExecPolicy policy) {
  std::vector<GFValue> g;
  kernels::map_indexed(policy, s.size(), g, [&](std::size_t k) {
    const cplx fk = s.values()[k];
    if (fk == 0.0) return GFValue{0.0, 0.0};
    return G(kPi * s.frequency(k));
  });
  const double vol = s.cell_volume();
  ExpectationSum out{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < s.size(); ++k) {
    const cplx fk = s.values()[k];
    out.value += vol * fk * g[k].value;
    out.leak += vol * std::abs(fk) * g[k].leak;
    if (on_boundary(k, 2 * s.n_modes(), s.points())) out.boundary = std::max(out.boundary, std::abs(fk * g[k].value));
  }
  return out;
}

}  // namespace

IntegralExpectation expect_integral(const SampledSymbol& s, const std::function<GFValue(const PhasePoint&)>& G,
                                    ExecPolicy policy, double boundary_threshold) {
  const ExpectationSum full = expectation_sum(s, G, policy);
  if (full.boundary > boundary_threshold) {
    throw QuadratureError("expect_integral: integrand does not decay at the grid boundary", full.boundary);
  }
  double err = std::numeric_limits<double>::infinity();
  if (s.points() >= 4) err = std::abs(full.value - expectation_sum(s.half_resolution(), G, policy).value);
  return {full.value, err, full.boundary, full.leak};
}

double RadialCutoff::operator()(double sqrt_q) const {
  const double s = std::clamp((sqrt_q - inner) / (outer - inner), 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

CutoffGrid cutoff_grid(const RadialCutoff& chi, double r, double h, double state_radius) {
  check_h(h);
  if (!(r > 0.0)) throw DomainError("cutoff_grid: r must be positive");
  const double support = chi.outer * std::sqrt(r);
  // Generating functionals decay like exp(-h pi^2 |eta|^2 / 2).
  const double extent = std::sqrt(2.0 * 27.7 / (h * kPi * kPi));
  // Period 1/spacing clears the symbol plus the state, also at half resolution.
  const double spacing = 1.0 / (2.0 * (support + state_radius + 8.0 * std::sqrt(h) + 1.0));
  int points = 2 * static_cast<int>(std::ceil(extent / spacing));
  return {extent, points};
}

SampledSymbol cutoff_complement_symbol(std::size_t quotient, const RadialCutoff& chi, double r, double extent,
                                       int points) {
  const double sr = std::sqrt(r);
  auto g = [chi, sr](double s) { return 1.0 - chi(s / sr); };
  return SampledSymbol::from_radial(quotient, extent, points, g, chi.outer * sr, {chi.inner * sr});
}

IntegralQuantization quantized_cutoff(const FockSpacePtr& space, std::size_t quotient, const RadialCutoff& chi, double r,
                                      double h, int points, const IntegralOptions& opts) {
  if (quotient == 0 || quotient > space->n_modes()) throw DomainError("quantized_cutoff: invalid quotient size");
  const auto m = space->modes().m_weights();
  double mmax = 0.0;
  for (std::size_t j = 0; j < quotient; ++j) mmax = std::max(mmax, m[j]);
  const double radius = std::sqrt(h * space->cutoff()) * mmax;
  CutoffGrid grid = cutoff_grid(chi, r, h, radius);
  if (points > 0) grid.points = points;
  const double sr = std::sqrt(r);
  auto g = [chi, sr](double s) { return 1.0 - chi(s / sr); };
  std::vector<double> scale;
  if (!opts.use_m) scale.assign(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(quotient));
  const SampledSymbol sym = SampledSymbol::from_radial(quotient, grid.extent, grid.points, g, chi.outer * sr,
                                                       {chi.inner * sr}, {}, scale);
  // Matrix elements of W on the certified subspace carry the same Gaussian
  // damping as the generating functionals; check the damped boundary.
  double mmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < quotient; ++j) mmin = std::min(mmin, opts.use_m ? m[j] : 1.0);
  const double damped = sym.boundary_max() * std::exp(-h * kPi * kPi * mmin * mmin * grid.extent * grid.extent / 2.0);
  if (damped > opts.boundary_threshold) {
    throw QuadratureError("quantized_cutoff: damped Fourier samples do not decay at the grid boundary", damped);
  }
  IntegralOptions inner = opts;
  inner.boundary_threshold = std::numeric_limits<double>::infinity();
  IntegralQuantization q = quantize_integral(space, sym, h, inner);
  FockOperator op = FockOperator::identity(space, h);
  op -= q.op;
  return {op.hermitian_part(), q.error_estimate, damped};
}

}  // namespace wigner
