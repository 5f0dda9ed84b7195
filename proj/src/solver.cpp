#include "tisrl/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "tisrl/errors.hpp"
#include "tisrl/parallel.hpp"
#include "tisrl/tensor_algebra.hpp"

namespace tisrl {

void TisrlConfig::validate() const {
  const auto positive = [](double value, const char* name) {
    if (!(value > 0)) {
      throw ParameterError(std::string(name) + " must be positive, got " +
                           std::to_string(value));
    }
  };
  positive(lambda, "lambda");
  positive(epsilon, "epsilon");
  positive(mu0, "mu0");
  positive(rho0, "rho0");
  positive(mu_max, "mu_max");
  positive(rho_max, "rho_max");
  if (!(eta > 1)) throw ParameterError("eta must exceed 1");
  if (mu0 > mu_max) throw ParameterError("mu0 exceeds mu_max");
  if (rho0 > rho_max) throw ParameterError("rho0 exceeds rho_max");
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
}

ViewState ViewState::initial(Eigen::Index dim, Eigen::Index n) {
  return {Eigen::MatrixXd::Zero(n, n),   Eigen::MatrixXd::Identity(n, n),
          Eigen::MatrixXd::Zero(n, n),   Eigen::MatrixXd::Zero(dim, n),
          Eigen::MatrixXd::Zero(dim, n), Eigen::MatrixXd::Zero(n, n)};
}

SolverState SolverState::initial(std::span<const Eigen::MatrixXd> data,
                                 const TisrlConfig& config) {
  if (data.empty()) throw ShapeError("solver: no views");
  const Eigen::Index n = data.front().cols();
  const auto v = static_cast<Eigen::Index>(data.size());
  SolverState s;
  for (const auto& x : data) {
    if (x.cols() != n) throw ShapeError("solver: views disagree on sample count");
    s.views.push_back(ViewState::initial(x.rows(), n));
  }
  s.C_tensor = Tensor3d::Zero(n, v, n);
  s.Q = Tensor3d::Zero(n, v, n);
  s.W = Tensor3d::Zero(n, v, n);
  s.mu = config.mu0;
  s.rho = config.rho0;
  return s;
}

ViewOperator::ViewOperator(Eigen::MatrixXd x)
    : x_(std::move(x)), gram_(x_.transpose() * x_) {
  Eigen::MatrixXd system = gram_;
  system.diagonal().array() += 1.0;
  llt_.compute(system);
}

Eigen::MatrixXd update_Z(const ViewOperator& op, const ViewState& s,
                         double mu) {
  if (!(mu > 0)) throw ParameterError("update_Z: mu must be positive");
  const Eigen::MatrixXd& x = op.x();
  Eigen::MatrixXd rhs = x.transpose() * (s.Yx - mu * s.E);
  rhs += mu * op.gram();
  rhs -= s.Yz;
  rhs.noalias() += mu * (s.P * s.C);
  return op.solve(rhs) / mu;
}

Eigen::MatrixXd update_P(const ViewState& s, double mu) {
  if (!(mu > 0)) throw ParameterError("update_P: mu must be positive");
  return procrustes((s.Z + s.Yz / mu) * s.C.transpose());
}

StackedError<double> update_E(std::span<const ViewOperator> ops,
                              std::span<const ViewState> states, double mu,
                              double lambda) {
  if (!(mu > 0) || !(lambda > 0))
    throw ParameterError("update_E: mu and lambda must be positive");
  if (ops.size() != states.size())
    throw ShapeError("update_E: view count mismatch");
  std::vector<Eigen::MatrixXd> residuals;
  residuals.reserve(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& x = ops[i].x();
    residuals.push_back(x - x * states[i].Z + states[i].Yx / mu);
  }
  StackedError<double> e = StackedError<double>::stack(residuals);
  e.stacked = l21_prox(e.stacked, lambda / mu);
  return e;
}

Eigen::MatrixXd update_C(const ViewState& s, double mu, double rho,
                         const Eigen::MatrixXd& q_view,
                         const Eigen::MatrixXd& w_view) {
  Eigen::MatrixXd rhs = rho * q_view - w_view;
  rhs.noalias() += s.P.transpose() * (s.Yz + mu * s.Z);
  return rhs / (rho + mu);
}

Tensor3d update_Q(const Tensor3d& c_tensor, const Tensor3d& w, double rho) {
  if (!(rho > 0)) throw ParameterError("update_Q: rho must be positive");
  return tnn_prox(c_tensor + w * (1.0 / rho), 1.0 / rho);
}

void update_multipliers(SolverState& state,
                        std::span<const Eigen::MatrixXd> data,
                        const TisrlConfig& config) {
  state.mu = std::min(config.eta * state.mu, config.mu_max);
  state.rho = std::min(config.eta * state.rho, config.rho_max);
  for (std::size_t i = 0; i < state.views.size(); ++i) {
    auto& s = state.views[i];
    const auto& x = data[i];
    s.Yx += state.mu * (x - x * s.Z - s.E);
    s.Yz += state.mu * (s.Z - s.P * s.C);
  }
  state.W += state.rho * (state.C_tensor - state.Q);
}

void ConvergenceTrace::write_csv(std::ostream& out) const {
  out << "iter,view,err1,err2,err3,mu,rho,objective\n";
  char line[256];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.err1.size(); ++i) {
      std::snprintf(line, sizeof(line), "%d,%zu,%.6e,%.6e,%.6e,%.6e,%.6e,%.6e\n",
                    row.iter, i, row.err1[i], row.err2[i], row.err3, row.mu,
                    row.rho, row.objective);
      out << line;
    }
  }
}

SolverResult run(std::span<const Eigen::MatrixXd> data,
                 const TisrlConfig& config) {
  config.validate();
  SolverResult result;
  result.state = SolverState::initial(data, config);
  SolverState& state = result.state;
  const std::size_t v = data.size();

  std::vector<ViewOperator> ops;
  ops.reserve(v);
  for (const auto& x : data) ops.emplace_back(x);

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    state.iter = iter;
    const double mu = state.mu;
    const double rho = state.rho;

    parallel_for(v, [&](std::size_t i) {
      auto& s = state.views[i];
      s.Z = update_Z(ops[i], s, mu);
      s.P = update_P(s, mu);
    });

    const StackedError<double> e = update_E(ops, state.views, mu, config.lambda);
    for (std::size_t i = 0; i < v; ++i) state.views[i].E = e.block(i);

    parallel_for(v, [&](std::size_t i) {
      auto& s = state.views[i];
      const auto view = static_cast<Eigen::Index>(i);
      s.C = update_C(s, mu, rho, phi_view(state.Q, view),
                     phi_view(state.W, view));
    });

    std::vector<Eigen::MatrixXd> cs;
    cs.reserve(v);
    for (const auto& s : state.views) cs.push_back(s.C);
    state.C_tensor = construct_phi(cs);
    state.Q = update_Q(state.C_tensor, state.W, rho);

    TraceRow row;
    row.iter = iter;
    for (std::size_t i = 0; i < v; ++i) {
      const auto& s = state.views[i];
      row.err1.push_back((data[i] - data[i] * s.Z - s.E).cwiseAbs().maxCoeff());
      row.err2.push_back((s.Z - s.P * s.C).cwiseAbs().maxCoeff());
    }
    row.err3 = (state.C_tensor - state.Q).max_abs();
    row.objective =
        tnn(state.Q) + config.lambda * e.stacked.colwise().norm().sum();

    update_multipliers(state, data, config);
    row.mu = state.mu;
    row.rho = state.rho;

    const double worst = std::max(
        {row.err3, *std::max_element(row.err1.begin(), row.err1.end()),
         *std::max_element(row.err2.begin(), row.err2.end())});
    result.trace.rows.push_back(std::move(row));
    if (worst < config.epsilon) {
      result.status = SolverStatus::converged;
      break;
    }
  }
  return result;
}

Eigen::MatrixXd intrinsic_affinity(const SolverState& state) {
  if (state.views.empty()) throw ShapeError("intrinsic_affinity: no views");
  const Eigen::Index n = state.views.front().C.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : state.views) {
    const Eigen::MatrixXd a = s.C.cwiseAbs();
    out += a + a.transpose();
  }
  return out / static_cast<double>(state.views.size());
}

}  // namespace tisrl
