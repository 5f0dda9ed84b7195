#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

#include "tisrl/prox_ops.hpp"
#include "tisrl/tensor3.hpp"

namespace tisrl {

/// Penalty schedule and stopping rule of the alternating-direction solver.
struct TisrlConfig {
  double lambda = 0.1;  // weight of the l2,1 error term
  double epsilon = 1e-7;
  double mu0 = 1e-5;
  double rho0 = 1e-5;
  double eta = 2.0;
  double mu_max = 1e12;
  double rho_max = 1e12;
  int max_iters = 200;

  /// Throws ParameterError on a non-positive value, eta <= 1, or an initial
  /// penalty above its cap.
  void validate() const;
};

/// Per-view blocks of the augmented Lagrangian.
struct ViewState {
  Eigen::MatrixXd Z;   // n x n self-representation, X ~ X Z + E
  Eigen::MatrixXd P;   // n x n orthogonal, Z = P C
  Eigen::MatrixXd C;   // n x n rank-preserving representation
  Eigen::MatrixXd E;   // d x n sample-specific error
  Eigen::MatrixXd Yx;  // d x n multiplier of X = X Z + E
  Eigen::MatrixXd Yz;  // n x n multiplier of Z = P C

  /// Zero blocks with P = I.
  static ViewState initial(Eigen::Index dim, Eigen::Index n);
};

struct SolverState {
  std::vector<ViewState> views;
  Tensor3d C_tensor{1, 1, 1};  // construct_phi of the C blocks, n x v x n
  Tensor3d Q{1, 1, 1};         // low-rank auxiliary copy of C_tensor
  Tensor3d W{1, 1, 1};         // multiplier of C_tensor = Q
  double mu = 0;
  double rho = 0;
  int iter = 0;

  static SolverState initial(std::span<const Eigen::MatrixXd> data,
                             const TisrlConfig& config);
};

/// Data-dependent part of the Z-update: X, X^T X and a Cholesky factor of
/// I + X^T X. The Z system matrix is mu (I + X^T X), so one factorization
/// serves every penalty value.
class ViewOperator {
 public:
  explicit ViewOperator(Eigen::MatrixXd x);

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  /// (I + X^T X)^{-1} rhs
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    return llt_.solve(rhs);
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Z = (mu I + mu X^T X)^{-1} (X^T Yx + mu X^T X - mu X^T E - Yz + mu P C)
Eigen::MatrixXd update_Z(const ViewOperator& op, const ViewState& s, double mu);

/// P = procrustes((Z + Yz/mu) C^T)
Eigen::MatrixXd update_P(const ViewState& s, double mu);

/// Joint l2,1 shrinkage of the stacked residuals X_i - X_i Z_i + Yx_i/mu
/// with threshold lambda/mu.
StackedError<double> update_E(std::span<const ViewOperator> ops,
                              std::span<const ViewState> states, double mu,
                              double lambda);

/// C = (rho Q_i - W_i + P^T Yz + mu P^T Z) / (rho + mu), using P^T P = I.
Eigen::MatrixXd update_C(const ViewState& s, double mu, double rho,
                         const Eigen::MatrixXd& q_view,
                         const Eigen::MatrixXd& w_view);

/// Q = tnn_prox(C + W/rho, 1/rho).
Tensor3d update_Q(const Tensor3d& c_tensor, const Tensor3d& w, double rho);

/// Grows mu and rho by eta (capped), then takes multiplier steps with the
/// grown penalties:
///   Yx += mu (X - X Z - E),  Yz += mu (Z - P C),  W += rho (C - Q).
void update_multipliers(SolverState& state,
                        std::span<const Eigen::MatrixXd> data,
                        const TisrlConfig& config);

/// Residuals of one iteration. Norms are the largest absolute entry.
struct TraceRow {
  int iter = 0;
  std::vector<double> err1;  // per view, ||X - X Z - E||_inf
  std::vector<double> err2;  // per view, ||Z - P C||_inf
  double err3 = 0;           // ||C_tensor - Q||_inf
  double mu = 0;             // penalties after the iteration's growth step
  double rho = 0;
  double objective = 0;  // tnn(Q) + lambda ||E||_{2,1}
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;

  /// Header iter,view,err1,err2,err3,mu,rho,objective; one line per
  /// (iteration, view).
  void write_csv(std::ostream& out) const;
};

enum class SolverStatus { converged, max_iters_reached };

struct SolverResult {
  SolverState state;
  ConvergenceTrace trace;
  SolverStatus status = SolverStatus::max_iters_reached;
};

/// Alternating-direction augmented Lagrangian loop. One iteration: Z and P
/// per view, the joint E, C per view, then Q, multipliers and penalties.
/// Stops once every err1, err2 and err3 is below epsilon, or at max_iters.
SolverResult run(std::span<const Eigen::MatrixXd> data,
                 const TisrlConfig& config);

/// (1/v) sum_i (|C_i| + |C_i|^T), elementwise absolute values.
Eigen::MatrixXd intrinsic_affinity(const SolverState& state);

}  // namespace tisrl
