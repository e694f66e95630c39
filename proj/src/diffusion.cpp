#include "diffseg/diffusion.hpp"

#include <Eigen/LU>

#include <cmath>

namespace diffseg {

namespace {

void check_pair(const ScoreMap& a, const ScoreMap& b, const char* op) {
  if (!a.grid.same_shape(b.grid) || a.values.rows() != b.values.rows() ||
      a.values.cols() != b.values.cols())
    throw std::invalid_argument(std::string(op) + ": score map shapes differ");
}

void check_unit_interval(double v, const char* name, const char* op) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    throw std::invalid_argument(std::string(op) + ": " + name + " must be in [0,1]");
}

}  // namespace

CascadeParams default_params(int num_stages) {
  if (num_stages < 1) throw std::invalid_argument("default_params: need at least one stage");
  return CascadeParams{Vector::Zero(num_stages), Vector::Zero(num_stages)};
}

ScoreMap walk_step(const ScoreMap& y, const TransitionMatrix& P, const ScoreMap& s, double mu) {
  check_pair(y, s, "walk_step");
  check_unit_interval(mu, "mu", "walk_step");
  return ScoreMap{y.grid, walk_step(y.values, P.values, s.values, mu)};
}

ScoreMap cascade_step(const ScoreMap& y, const TransitionMatrix& P, const ScoreMap& s,
                      double mu, double beta) {
  check_pair(y, s, "cascade_step");
  check_unit_interval(mu, "mu", "cascade_step");
  check_unit_interval(beta, "beta", "cascade_step");
  return ScoreMap{y.grid, cascade_step(y.values, P.values, s.values, mu, beta)};
}

CascadeState run_cascade(const ScoreMap& s, const std::vector<TransitionMatrix>& transitions,
                         const CascadeParams& params, const EngineConfig& cfg,
                         bool keep_trace) {
  require_valid(cfg);
  if (static_cast<int>(transitions.size()) != cfg.num_stages)
    throw std::invalid_argument("run_cascade: " + std::to_string(transitions.size()) +
                                " transition matrices for " + std::to_string(cfg.num_stages) +
                                " stages");
  if (params.stages() != cfg.num_stages ||
      params.beta_logits.size() != params.mu_logits.size())
    throw std::invalid_argument("run_cascade: parameter count does not match stage count");
  if (!params.mu_logits.allFinite() || !params.beta_logits.allFinite())
    throw std::invalid_argument("run_cascade: parameters must be finite");
  for (const TransitionMatrix& P : transitions)
    if (P.size() != s.nodes())
      throw std::invalid_argument("run_cascade: transition size " + std::to_string(P.size()) +
                                  " != node count " + std::to_string(s.nodes()));

  CascadeState state;
  Matrix y = s.values;
  if (keep_trace) state.trace.push_back(y);
  for (int t = 0; t < cfg.num_stages; ++t) {
    if (!cfg.skip_stages.contains(t + 1)) {
      y = cascade_step(y, transitions[t].values, s.values, params.mu(t), params.beta(t));
    }
    if (keep_trace) state.trace.push_back(y);
  }
  state.current = ScoreMap{s.grid, std::move(y)};
  state.stage = cfg.num_stages;
  return state;
}

ScoreMap closed_form(const TransitionMatrix& P, const ScoreMap& s, double mu) {
  if (P.size() != s.nodes())
    throw std::invalid_argument("closed_form: transition size != node count");
  if (!std::isfinite(mu) || mu < 0.0 || mu >= 1.0)
    throw std::invalid_argument("closed_form: mu must be in [0,1)");
  const int n = P.size();
  const Matrix system = Matrix::Identity(n, n) - mu * P.values;
  Eigen::PartialPivLU<Matrix> lu(system);
  Matrix solution = lu.solve((1.0 - mu) * s.values);
  if (!solution.allFinite())
    throw std::runtime_error("closed_form: singular system (non-finite solution)");
  return ScoreMap{s.grid, std::move(solution)};
}

ScoreMap power_series(const TransitionMatrix& P, const ScoreMap& s, double mu, int terms) {
  if (P.size() != s.nodes())
    throw std::invalid_argument("power_series: transition size != node count");
  if (terms < 0) throw std::invalid_argument("power_series: terms must be >= 0");
  Matrix term = s.values;        // (mu P)^i s
  Matrix partial = s.values;     // sum_{i=0}^{t} (mu P)^i s
  for (int i = 1; i <= terms; ++i) {
    term = mu * (P.values * term);
    partial += term;
  }
  Matrix result = mu * (P.values * term) + (1.0 - mu) * partial;
  return ScoreMap{s.grid, std::move(result)};
}

double fixed_point_residual(const ScoreMap& y, const TransitionMatrix& P, const ScoreMap& s,
                            double mu) {
  check_pair(y, s, "fixed_point_residual");
  return fixed_point_residual(y.values, P.values, s.values, mu);
}

double energy(const ScoreMap& y, const AffinityMatrix& W, const ImportanceMap& M,
              const ScoreMap& x, double mu) {
  check_pair(y, x, "energy");
  if (W.size() != y.nodes() || M.values.size() != y.nodes())
    throw std::invalid_argument("energy: affinity/importance sizes != node count");
  for (int i = 0; i < W.degrees.size(); ++i)
    if (!(W.degrees[i] > 0.0))
      throw std::invalid_argument("energy: degenerate graph, degree " + std::to_string(i) +
                                  " is not strictly positive");
  const int n = y.nodes();
  Matrix scaled = y.values;
  for (int i = 0; i < n; ++i) scaled.row(i) /= std::sqrt(W.degrees[i]);
  double smooth = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      smooth += W.values(i, j) * (scaled.row(i) - scaled.row(j)).norm();
  double data = 0.0;
  for (int i = 0; i < n; ++i)
    data += M.values[i] * (y.values.row(i) - x.values.row(i)).norm();
  return 0.5 * (mu * smooth + (1.0 - mu) * data);
}

}  // namespace diffseg
