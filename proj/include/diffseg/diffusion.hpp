#pragma once

#include "diffseg/seed.hpp"
#include "diffseg/similarity.hpp"
#include "diffseg/types.hpp"

namespace diffseg {

/// Per-stage walk and blend weights stored as unconstrained logits; the
/// effective parameters mu_t = logistic(mu_logits[t]) and
/// beta_t = logistic(beta_logits[t]) live in (0, 1) by construction.
struct CascadeParams {
  Vector mu_logits;
  Vector beta_logits;

  int stages() const { return static_cast<int>(mu_logits.size()); }
  double mu(int t) const { return logistic(mu_logits[t]); }
  double beta(int t) const { return logistic(beta_logits[t]); }
};

/// All logits zero, i.e. mu_t = beta_t = 0.5.
CascadeParams default_params(int num_stages);

struct CascadeState {
  ScoreMap current;  // y after the last stage
  int stage = 0;     // number of stages applied
  std::vector<Matrix> trace;  // y^0 .. y^stage, kept only on request
};

// ---- expression-level kernels --------------------------------------------

namespace detail {
template <typename YD, typename PD, typename SD>
void check_walk_shapes(const Eigen::MatrixBase<YD>& y, const Eigen::MatrixBase<PD>& P,
                       const Eigen::MatrixBase<SD>& s) {
  if (P.rows() != P.cols() || P.cols() != y.rows() || y.rows() != s.rows() ||
      y.cols() != s.cols())
    throw std::invalid_argument("walk: inconsistent shapes (P " +
                                std::to_string(P.rows()) + "x" + std::to_string(P.cols()) +
                                ", y " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                                ", s " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + ")");
}
}  // namespace detail

/// One random-walk step: mu * P * y + (1 - mu) * s.
template <typename YD, typename PD, typename SD>
Eigen::Matrix<typename YD::Scalar, Eigen::Dynamic, Eigen::Dynamic>
walk_step(const Eigen::MatrixBase<YD>& y, const Eigen::MatrixBase<PD>& P,
          const Eigen::MatrixBase<SD>& s, double mu) {
  detail::check_walk_shapes(y, P, s);
  return mu * (P * y).eval() + (1.0 - mu) * s;
}

/// One cascade stage: beta * walk_step(y, P, s, mu) + (1 - beta) * y.
template <typename YD, typename PD, typename SD>
Eigen::Matrix<typename YD::Scalar, Eigen::Dynamic, Eigen::Dynamic>
cascade_step(const Eigen::MatrixBase<YD>& y, const Eigen::MatrixBase<PD>& P,
             const Eigen::MatrixBase<SD>& s, double mu, double beta) {
  return beta * walk_step(y, P, s, mu) + (1.0 - beta) * y;
}

/// Max-norm of y - (mu * P * y + (1 - mu) * s); zero exactly at the walk
/// fixed point.
template <typename YD, typename PD, typename SD>
double fixed_point_residual(const Eigen::MatrixBase<YD>& y, const Eigen::MatrixBase<PD>& P,
                            const Eigen::MatrixBase<SD>& s, double mu) {
  detail::check_walk_shapes(y, P, s);
  return (y - (mu * (P * y).eval() + (1.0 - mu) * s)).cwiseAbs().maxCoeff();
}

// ---- score-map level operations -------------------------------------------

ScoreMap walk_step(const ScoreMap& y, const TransitionMatrix& P, const ScoreMap& s, double mu);

ScoreMap cascade_step(const ScoreMap& y, const TransitionMatrix& P, const ScoreMap& s,
                      double mu, double beta);

/// Runs the cascade from y^0 = s through all stages in order, skipping the
/// 1-based stage numbers in cfg.skip_stages. When keep_trace is set the
/// state records y^0 .. y^T (skipped stages repeat the previous state).
CascadeState run_cascade(const ScoreMap& s, const std::vector<TransitionMatrix>& transitions,
                         const CascadeParams& params, const EngineConfig& cfg,
                         bool keep_trace = false);

/// Direct solve of (I - mu P) y = (1 - mu) s by partial-pivoting LU. The
/// system is nonsingular for mu < 1 and row-stochastic P; a singular solve
/// is still detected and reported.
ScoreMap closed_form(const TransitionMatrix& P, const ScoreMap& s, double mu);

/// The unrolled expansion (mu P)^{terms+1} s + (1 - mu) sum_{i=0}^{terms} (mu P)^i s.
ScoreMap power_series(const TransitionMatrix& P, const ScoreMap& s, double mu, int terms);

double fixed_point_residual(const ScoreMap& y, const TransitionMatrix& P, const ScoreMap& s,
                            double mu);

/// Diagnostic objective: 1/2 (mu sum_ij W_ij ||y_i/sqrt(d_ii) - y_j/sqrt(d_jj)||_2
/// + (1 - mu) sum_i M_ii ||y_i - x_i||_2). Requires strictly positive degrees.
double energy(const ScoreMap& y, const AffinityMatrix& W, const ImportanceMap& M,
              const ScoreMap& x, double mu);

}  // namespace diffseg
