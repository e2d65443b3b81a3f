#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "wigner/modes.hpp"

namespace wigner {

using Occupation = std::vector<int>;

/// Symmetric Fock space over a ModeSpace, truncated at total occupation
/// `cutoff`. Basis order is graded lexicographic: shells of increasing total,
/// and inside a shell decreasing lexicographic order, e.g. for two modes
/// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) ...
class FockSpace {
 public:
  static std::shared_ptr<const FockSpace> make(ModeSpace modes, int cutoff,
                                               std::size_t max_dim = 2'000'000);

  /// Number of basis states for the given mode count and cutoff.
  static std::size_t dimension_for(std::size_t n_modes, int cutoff);

  const ModeSpace& modes() const noexcept { return modes_; }
  std::size_t n_modes() const noexcept { return modes_.n_modes(); }
  int cutoff() const noexcept { return cutoff_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Occupation vector of basis state `index`.
  std::span<const int> occupation(std::size_t index) const;
  int total(std::size_t index) const { return totals_[index]; }
  /// Position of an occupation vector in the basis (combinatorial rank).
  std::size_t index_of(std::span<const int> n) const;
  /// First index of shell `total` (shell_offset(cutoff + 1) == dim()).
  std::size_t shell_offset(int total) const { return shell_offsets_.at(static_cast<std::size_t>(total)); }
  /// Number of states with total occupation <= `total`.
  std::size_t count_upto(int total) const;

  /// Index of the state with n_j lowered by one, or -1 when n_j == 0.
  std::int64_t lowered(std::size_t j, std::size_t index) const { return lowered_[j * dim_ + index]; }

 private:
  FockSpace(ModeSpace modes, int cutoff);
  ModeSpace modes_;
  int cutoff_;
  std::size_t dim_ = 0;
  std::vector<int> occ_;
  std::vector<int> totals_;
  std::vector<std::size_t> shell_offsets_;
  std::vector<std::int64_t> lowered_;
};

using FockSpacePtr = std::shared_ptr<const FockSpace>;

void check_h(double h);

struct FockVector {
  FockSpacePtr space;
  double h = 0.5;
  Eigen::VectorXcd coeffs;
  /// Probability mass lost to truncation when the vector was built.
  double leak = 0.0;

  static FockVector basis(FockSpacePtr space, double h, std::span<const int> n);
  static FockVector vacuum(FockSpacePtr space, double h) {
    return basis(space, h, std::vector<int>(space->n_modes(), 0));
  }
  double norm() const { return coeffs.norm(); }
};

/// Operator on a truncated Fock space. Stored either as a diagonal or as a
/// dense matrix. `degree` d means the matrix is exact on states of total
/// occupation <= cutoff - d; kNonPolynomial marks operators with no such
/// subspace (exponentials), whose accuracy is described by `leak` instead.
class FockOperator {
 public:
  static constexpr int kNonPolynomial = -1;

  FockOperator(FockSpacePtr space, double h, Eigen::MatrixXcd matrix, int degree, double leak = 0.0);
  static FockOperator diagonal(FockSpacePtr space, double h, Eigen::VectorXcd diag, int degree = 0);
  static FockOperator identity(FockSpacePtr space, double h);
  static FockOperator zero(FockSpacePtr space, double h);

  const FockSpacePtr& space() const noexcept { return space_; }
  double h() const noexcept { return h_; }
  int degree() const noexcept { return degree_; }
  double leak() const noexcept { return leak_; }
  std::size_t dim() const noexcept { return space_->dim(); }
  bool is_diagonal() const noexcept { return std::holds_alternative<Eigen::VectorXcd>(data_); }

  /// Dense copy of the operator.
  Eigen::MatrixXcd matrix() const;
  /// Diagonal entries (exact for both storage kinds).
  Eigen::VectorXcd diagonal_entries() const;
  /// Largest total occupation on which the operator is truncation-exact.
  int exact_total() const noexcept;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  FockVector apply(const FockVector& v) const;
  cplx expectation(const FockVector& v) const;

  FockOperator adjoint() const;
  /// Hermitian part (A + A^dagger) / 2.
  FockOperator hermitian_part() const;
  bool is_hermitian(double tol = 1e-12) const;

  /// Frobenius norm of the columns with total occupation <= max_total.
  double restricted_norm(int max_total) const;
  /// Spectral norm of A P, P the projector on total occupation <= max_total.
  double restricted_spectral_norm(int max_total) const;

  FockOperator& operator+=(const FockOperator& other);
  FockOperator& operator-=(const FockOperator& other);
  FockOperator& operator*=(cplx s);
  friend FockOperator operator+(FockOperator a, const FockOperator& b) { return a += b; }
  friend FockOperator operator-(FockOperator a, const FockOperator& b) { return a -= b; }
  friend FockOperator operator*(cplx s, FockOperator a) { return a *= s; }
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);

 private:
  FockOperator(FockSpacePtr space, double h, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data, int degree,
               double leak);
  void require_compatible(const FockOperator& other, const char* op) const;

  FockSpacePtr space_;
  double h_;
  std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data_;
  int degree_;
  double leak_;
};

/// a_h(f) = sqrt(h) sum_j conj(f_j) b_j and its adjoint a*_h(f).
std::pair<FockOperator, FockOperator> ladder_operators(const FockSpacePtr& space, const PhasePoint& f, double h);

/// phi(xi) = a*_h(xi) + a_h(xi).
FockOperator field_operator(const FockSpacePtr& space, const PhasePoint& xi, double h);

/// dGamma_h(A): eigenvalue h sum_j n_j A_j on |n>.
FockOperator dgamma(const FockSpacePtr& space, std::span<const double> weights, double h);

/// Ladder operators of m x.
std::pair<FockOperator, FockOperator> m_ladder(const FockSpacePtr& space, const PhasePoint& x, double h);

/// sum_{j < R} m-creator(e_j) m-annihilator(e_j), assembled from ladder products.
FockOperator m_number(const FockSpacePtr& space, std::size_t R, double h);

/// <psi, op^delta psi> through the spectral decomposition of op.
double fractional_moment(const FockVector& psi, const FockOperator& op, double delta);

/// P(X > n) for X ~ Poisson(lambda).
double poisson_tail(double lambda, int n);

/// Smallest n with P(X > n) < threshold for X ~ Poisson(lambda).
int poisson_cutoff(double lambda, double threshold);

/// Cutoff for a coherent amplitude: Poisson mean |f|^2 / h.
int auto_cutoff(const PhasePoint& f, double h, double threshold = 1e-10);

}  // namespace wigner
