#include "wigner/fock.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

namespace wigner {

namespace {

double binom(int n, int k) {
  if (k < 0 || n < k) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

void enumerate_shell(int modes, int total, std::vector<int>& prefix, std::vector<int>& out) {
  if (modes == 1) {
    prefix.push_back(total);
    out.insert(out.end(), prefix.begin(), prefix.end());
    prefix.pop_back();
    return;
  }
  for (int n = total; n >= 0; --n) {
    prefix.push_back(n);
    enumerate_shell(modes - 1, total - n, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

void check_h(double h) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("semiclassical parameter h must lie in (0,1), got " + std::to_string(h));
}

std::size_t FockSpace::dimension_for(std::size_t n_modes, int cutoff) {
  if (cutoff < 0) return 0;
  return static_cast<std::size_t>(binom(cutoff + static_cast<int>(n_modes), static_cast<int>(n_modes)));
}

std::shared_ptr<const FockSpace> FockSpace::make(ModeSpace modes, int cutoff, std::size_t max_dim) {
  if (cutoff < 0) throw DomainError("FockSpace: cutoff must be nonnegative");
  const double dim = binom(cutoff + static_cast<int>(modes.n_modes()), static_cast<int>(modes.n_modes()));
  if (dim > static_cast<double>(max_dim)) {
    throw ResourceError("FockSpace: dimension " + std::to_string(static_cast<long long>(dim)) +
                            " exceeds the limit " + std::to_string(max_dim),
                        dim);
  }
  return std::shared_ptr<const FockSpace>(new FockSpace(std::move(modes), cutoff));
}

FockSpace::FockSpace(ModeSpace modes, int cutoff) : modes_(std::move(modes)), cutoff_(cutoff) {
  const int M = static_cast<int>(modes_.n_modes());
  std::vector<int> prefix;
  for (int T = 0; T <= cutoff_; ++T) {
    shell_offsets_.push_back(occ_.size() / static_cast<std::size_t>(M));
    enumerate_shell(M, T, prefix, occ_);
  }
  dim_ = occ_.size() / static_cast<std::size_t>(M);
  shell_offsets_.push_back(dim_);
  totals_.resize(dim_);
  for (int T = 0; T <= cutoff_; ++T) {
    for (std::size_t i = shell_offsets_[T]; i < shell_offsets_[T + 1]; ++i) totals_[i] = T;
  }
  lowered_.assign(static_cast<std::size_t>(M) * dim_, -1);
  std::vector<int> n(M);
  for (std::size_t i = 0; i < dim_; ++i) {
    auto occ = occupation(i);
    for (int j = 0; j < M; ++j) {
      if (occ[j] == 0) continue;
      n.assign(occ.begin(), occ.end());
      --n[j];
      lowered_[static_cast<std::size_t>(j) * dim_ + i] = static_cast<std::int64_t>(index_of(n));
    }
  }
}

std::span<const int> FockSpace::occupation(std::size_t index) const {
  return std::span<const int>(occ_).subspan(index * n_modes(), n_modes());
}

std::size_t FockSpace::count_upto(int total) const {
  if (total < 0) return 0;
  if (total >= cutoff_) return dim_;
  return shell_offsets_[static_cast<std::size_t>(total) + 1];
}

std::size_t FockSpace::index_of(std::span<const int> n) const {
  const int M = static_cast<int>(n_modes());
  if (static_cast<int>(n.size()) != M) throw DimensionError("FockSpace::index_of: occupation length mismatch");
  int total = 0;
  for (int v : n) {
    if (v < 0) throw DomainError("FockSpace::index_of: negative occupation");
    total += v;
  }
  if (total > cutoff_) throw DomainError("FockSpace::index_of: occupation exceeds the cutoff");
  std::size_t rank = 0;
  int rem = total;
  for (int i = 0; i + 1 < M; ++i) {
    const int k = M - i - 1;
    if (n[i] < rem) rank += static_cast<std::size_t>(binom(rem - n[i] - 1 + k, k));
    rem -= n[i];
  }
  return shell_offsets_[static_cast<std::size_t>(total)] + rank;
}

FockVector FockVector::basis(FockSpacePtr space, double h, std::span<const int> n) {
  check_h(h);
  FockVector v{space, h, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space->dim())), 0.0};
  v.coeffs[static_cast<Eigen::Index>(space->index_of(n))] = 1.0;
  return v;
}

FockOperator::FockOperator(FockSpacePtr space, double h, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data,
                           int degree, double leak)
    : space_(std::move(space)), h_(h), data_(std::move(data)), degree_(degree), leak_(leak) {}

FockOperator::FockOperator(FockSpacePtr space, double h, Eigen::MatrixXcd matrix, int degree, double leak)
    : space_(std::move(space)), h_(h), data_(std::move(matrix)), degree_(degree), leak_(leak) {
  const auto n = static_cast<Eigen::Index>(space_->dim());
  const auto& m = std::get<Eigen::MatrixXcd>(data_);
  if (m.rows() != n || m.cols() != n) throw DimensionError("FockOperator: matrix size differs from space dimension");
}

FockOperator FockOperator::diagonal(FockSpacePtr space, double h, Eigen::VectorXcd diag, int degree) {
  if (diag.size() != static_cast<Eigen::Index>(space->dim())) {
    throw DimensionError("FockOperator::diagonal: length differs from space dimension");
  }
  return FockOperator(std::move(space), h, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd>(std::move(diag)), degree,
                      0.0);
}

FockOperator FockOperator::identity(FockSpacePtr space, double h) {
  const auto n = static_cast<Eigen::Index>(space->dim());
  return diagonal(std::move(space), h, Eigen::VectorXcd::Ones(n), 0);
}

FockOperator FockOperator::zero(FockSpacePtr space, double h) {
  const auto n = static_cast<Eigen::Index>(space->dim());
  return diagonal(std::move(space), h, Eigen::VectorXcd::Zero(n), 0);
}

Eigen::MatrixXcd FockOperator::matrix() const {
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) return d->asDiagonal();
  return std::get<Eigen::MatrixXcd>(data_);
}

Eigen::VectorXcd FockOperator::diagonal_entries() const {
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) return *d;
  return std::get<Eigen::MatrixXcd>(data_).diagonal();
}

int FockOperator::exact_total() const noexcept {
  if (degree_ == kNonPolynomial) return -1;
  return space_->cutoff() - degree_;
}

Eigen::VectorXcd FockOperator::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != static_cast<Eigen::Index>(dim())) throw DimensionError("FockOperator::apply: vector size mismatch");
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) return d->cwiseProduct(v);
  return std::get<Eigen::MatrixXcd>(data_) * v;
}

FockVector FockOperator::apply(const FockVector& v) const {
  if (v.space.get() != space_.get() && v.space->dim() != space_->dim()) {
    throw DimensionError("FockOperator::apply: vector lives on another space");
  }
  return FockVector{space_, v.h, apply(v.coeffs), v.leak};
}

cplx FockOperator::expectation(const FockVector& v) const { return v.coeffs.dot(apply(v.coeffs)); }

FockOperator FockOperator::adjoint() const {
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) {
    return FockOperator(space_, h_, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd>(Eigen::VectorXcd(d->conjugate())),
                        degree_, leak_);
  }
  return FockOperator(space_, h_, Eigen::MatrixXcd(std::get<Eigen::MatrixXcd>(data_).adjoint()), degree_, leak_);
}

FockOperator FockOperator::hermitian_part() const {
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) {
    Eigen::VectorXcd re = d->real().cast<cplx>();
    return FockOperator(space_, h_, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd>(std::move(re)), degree_, leak_);
  }
  const auto& m = std::get<Eigen::MatrixXcd>(data_);
  Eigen::MatrixXcd s = 0.5 * (m + m.adjoint());
  return FockOperator(space_, h_, std::move(s), degree_, leak_);
}

bool FockOperator::is_hermitian(double tol) const {
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) return d->imag().cwiseAbs().maxCoeff() <= tol;
  const auto& m = std::get<Eigen::MatrixXcd>(data_);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double FockOperator::restricted_norm(int max_total) const {
  const auto k = static_cast<Eigen::Index>(space_->count_upto(max_total));
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) return d->head(k).norm();
  return std::get<Eigen::MatrixXcd>(data_).leftCols(k).norm();
}

double FockOperator::restricted_spectral_norm(int max_total) const {
  const auto k = static_cast<Eigen::Index>(space_->count_upto(max_total));
  if (k == 0) return 0.0;
  if (auto d = std::get_if<Eigen::VectorXcd>(&data_)) return d->head(k).cwiseAbs().maxCoeff();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(std::get<Eigen::MatrixXcd>(data_).leftCols(k));
  return svd.singularValues()(0);
}

void FockOperator::require_compatible(const FockOperator& other, const char* op) const {
  if (other.dim() != dim()) throw DimensionError(std::string("FockOperator ") + op + ": dimension mismatch");
}

namespace {

int combine_degree(int a, int b) {
  if (a == FockOperator::kNonPolynomial || b == FockOperator::kNonPolynomial) return FockOperator::kNonPolynomial;
  return std::max(a, b);
}

}  // namespace

FockOperator& FockOperator::operator+=(const FockOperator& other) {
  require_compatible(other, "+");
  auto* d1 = std::get_if<Eigen::VectorXcd>(&data_);
  auto* d2 = std::get_if<Eigen::VectorXcd>(&other.data_);
  if (d1 && d2) {
    *d1 += *d2;
  } else {
    Eigen::MatrixXcd m = matrix();
    if (d2) {
      m.diagonal() += *d2;
    } else {
      m += std::get<Eigen::MatrixXcd>(other.data_);
    }
    data_ = std::move(m);
  }
  degree_ = combine_degree(degree_, other.degree_);
  leak_ += other.leak_;
  return *this;
}

FockOperator& FockOperator::operator-=(const FockOperator& other) {
  FockOperator neg = other;
  neg *= -1.0;
  return *this += neg;
}

FockOperator& FockOperator::operator*=(cplx s) {
  std::visit([s](auto& x) { x *= s; }, data_);
  leak_ *= std::abs(s);
  return *this;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  a.require_compatible(b, "*");
  const int degree = (a.degree_ == FockOperator::kNonPolynomial || b.degree_ == FockOperator::kNonPolynomial)
                         ? FockOperator::kNonPolynomial
                         : a.degree_ + b.degree_;
  const double leak = a.leak_ + b.leak_;
  auto* da = std::get_if<Eigen::VectorXcd>(&a.data_);
  auto* db = std::get_if<Eigen::VectorXcd>(&b.data_);
  if (da && db) {
    return FockOperator(a.space_, a.h_, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd>(Eigen::VectorXcd(da->cwiseProduct(*db))),
                        degree, leak);
  }
  Eigen::MatrixXcd m;
  if (da) {
    m = da->asDiagonal() * std::get<Eigen::MatrixXcd>(b.data_);
  } else if (db) {
    m = std::get<Eigen::MatrixXcd>(a.data_) * db->asDiagonal();
  } else {
    m = std::get<Eigen::MatrixXcd>(a.data_) * std::get<Eigen::MatrixXcd>(b.data_);
  }
  return FockOperator(a.space_, a.h_, std::move(m), degree, leak);
}

std::pair<FockOperator, FockOperator> ladder_operators(const FockSpacePtr& space, const PhasePoint& f, double h) {
  check_h(h);
  if (f.size() != space->n_modes()) throw DimensionError("ladder_operators: amplitude has wrong mode count");
  const auto n = static_cast<Eigen::Index>(space->dim());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  const double sh = std::sqrt(h);
  for (std::size_t i = 0; i < space->dim(); ++i) {
    auto occ = space->occupation(i);
    for (std::size_t j = 0; j < space->n_modes(); ++j) {
      const auto lo = space->lowered(j, i);
      if (lo < 0 || f[j] == 0.0) continue;
      a(lo, static_cast<Eigen::Index>(i)) += sh * std::conj(f[j]) * std::sqrt(static_cast<double>(occ[j]));
    }
  }
  Eigen::MatrixXcd adag = a.adjoint();
  return {FockOperator(space, h, std::move(a), 0), FockOperator(space, h, std::move(adag), 1)};
}

FockOperator field_operator(const FockSpacePtr& space, const PhasePoint& xi, double h) {
  auto [a, adag] = ladder_operators(space, xi, h);
  return adag + a;
}

FockOperator dgamma(const FockSpacePtr& space, std::span<const double> weights, double h) {
  check_h(h);
  if (weights.size() != space->n_modes()) throw DimensionError("dgamma: weight count differs from mode count");
  Eigen::VectorXcd d(static_cast<Eigen::Index>(space->dim()));
  for (std::size_t i = 0; i < space->dim(); ++i) {
    auto occ = space->occupation(i);
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) s += occ[j] * weights[j];
    d[static_cast<Eigen::Index>(i)] = h * s;
  }
  return FockOperator::diagonal(space, h, std::move(d), 0);
}

std::pair<FockOperator, FockOperator> m_ladder(const FockSpacePtr& space, const PhasePoint& x, double h) {
  if (x.size() != space->n_modes()) throw DimensionError("m_ladder: amplitude has wrong mode count");
  return ladder_operators(space, space->modes().apply_m(x), h);
}

FockOperator m_number(const FockSpacePtr& space, std::size_t R, double h) {
  check_h(h);
  if (R > space->n_modes()) throw DomainError("m_number: R exceeds the mode count");
  FockOperator total = FockOperator::zero(space, h);
  for (std::size_t j = 0; j < R; ++j) {
    auto [a, adag] = m_ladder(space, PhasePoint::unit(space->n_modes(), j), h);
    // a* a never leaves the truncated space, so the product is exact.
    FockOperator term = adag * a;
    total += FockOperator(space, h, term.matrix(), 0);
  }
  return total;
}

double fractional_moment(const FockVector& psi, const FockOperator& op, double delta) {
  if (!(delta > 0.0)) throw DomainError("fractional_moment: delta must be positive");
  if (psi.coeffs.size() != static_cast<Eigen::Index>(op.dim())) {
    throw DimensionError("fractional_moment: vector and operator sizes differ");
  }
  if (!op.is_hermitian(1e-10)) throw NumericalError("fractional_moment: operator is not Hermitian");
  constexpr double kNegTol = -1e-10;
  if (op.is_diagonal()) {
    Eigen::VectorXd lam = op.diagonal_entries().real();
    if (lam.size() > 0 && lam.minCoeff() < kNegTol) {
      throw NumericalError("fractional_moment: operator has a negative eigenvalue");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double p = std::norm(psi.coeffs[i]);
      if (p != 0.0) s += p * std::pow(std::max(lam[i], 0.0), delta);
    }
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.hermitian_part().matrix());
  const auto& lam = es.eigenvalues();
  if (lam.size() > 0 && lam.minCoeff() < kNegTol) {
    throw NumericalError("fractional_moment: operator has a negative eigenvalue");
  }
  Eigen::VectorXcd c = es.eigenvectors().adjoint() * psi.coeffs;
  double s = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) s += std::norm(c[i]) * std::pow(std::max(lam[i], 0.0), delta);
  return s;
}

double poisson_tail(double lambda, int n) {
  if (lambda < 0.0) throw DomainError("poisson_tail: negative mean");
  if (n < 0) return 1.0;
  if (lambda == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(n) + 1.0, lambda);
}

int poisson_cutoff(double lambda, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("poisson_cutoff: threshold must lie in (0,1)");
  if (lambda < 0.0 || !std::isfinite(lambda)) throw DomainError("poisson_cutoff: mean must be finite and nonnegative");
  if (lambda == 0.0) return 0;
  int lo = -1;
  int hi = static_cast<int>(std::ceil(lambda + 10.0 * std::sqrt(lambda) + 20.0));
  while (poisson_tail(lambda, hi) >= threshold) hi *= 2;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (poisson_tail(lambda, mid) < threshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

int auto_cutoff(const PhasePoint& f, double h, double threshold) {
  check_h(h);
  return poisson_cutoff(f.norm2() / h, threshold);
}

}  // namespace wigner
