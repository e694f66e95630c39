#pragma once

#include "diffseg/diffusion.hpp"
#include "diffseg/features.hpp"

#include <optional>

namespace diffseg {

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  double momentum = 0.9;
  double fd_epsilon = 1e-5;
  bool train_cascade = true;  // mu/beta logits
  bool train_head = true;     // importance head weights and bias
};

std::vector<std::string> validate_train_config(const TrainConfig& cfg);

struct CrossEntropyResult {
  double loss = 0.0;
  Matrix grad;      // dL/dy; zero rows at ignored nodes
  int counted = 0;  // non-ignored nodes
};

/// Per-node softmax negative log-likelihood averaged over non-ignored nodes,
/// with its exact gradient with respect to the scores.
CrossEntropyResult cross_entropy(const ScoreMap& y, const LabelMap& labels);

struct CascadeGradients {
  Vector mu_logits;
  Vector beta_logits;
  Matrix seed;  // dL/ds
};

/// Reverse-mode pass through a traced cascade. Transition matrices are
/// constants; gradients chain through the logistic reparameterizations.
CascadeGradients backward_cascade(const CascadeState& state,
                                  const std::vector<TransitionMatrix>& transitions,
                                  const CascadeParams& params, const EngineConfig& cfg,
                                  const Matrix& dL_dy);

struct HeadGradients {
  Vector weights;
  double bias = 0.0;
};

/// Chains dL/ds through s = Mx into the importance head parameters.
HeadGradients backward_importance(const ScoreMap& x, const ImportanceMap& M,
                                  const ImportanceHead& head, const Matrix& dL_ds);

/// One training example. The pyramid is used when present, otherwise it is
/// extracted from the image. Labels live on the node grid.
struct TrainItem {
  std::optional<Image> image;
  std::optional<FeaturePyramid> pyramid;
  SparseSeeds seeds;
  LabelMap labels;
};

struct FitResult {
  CascadeParams params;
  ImportanceHead head;
  std::vector<double> loss_history;  // mean loss per epoch, before that epoch's update
};

/// Full-batch gradient descent with momentum over the trainable parameter
/// set; transitions are computed once per item and held fixed. Deterministic
/// for a fixed dataset order. Throws if the loss becomes non-finite.
FitResult fit(const std::vector<TrainItem>& dataset, const EngineConfig& cfg,
              const TrainConfig& tcfg);

struct GradientEntry {
  std::string name;
  double analytic = 0.0;
  double finite_diff = 0.0;
  double rel_error = 0.0;
};

struct GradientReport {
  std::vector<GradientEntry> entries;  // sorted by descending relative error
  double max_rel_error() const;
};

/// Central finite difference of a scalar function with respect to *param.
template <typename Loss>
double central_difference(Loss&& loss, double* param, double eps) {
  const double saved = *param;
  *param = saved + eps;
  const double up = loss();
  *param = saved - eps;
  const double down = loss();
  *param = saved;
  return (up - down) / (2.0 * eps);
}

/// |a - f| / max(1e-12, |a| + |f|), the convention used throughout reports.
double gradient_rel_error(double analytic, double finite_diff);

/// Compares every analytic gradient (mu/beta logits, head weights, bias)
/// against central finite differences on one item.
GradientReport grad_check(const TrainItem& item, const EngineConfig& cfg,
                          const CascadeParams& params, const ImportanceHead& head,
                          double fd_epsilon);

/// Plain-text parameter file: lines mu_logit[t]=..., beta_logit[t]=...,
/// head_w[i]=..., head_b=... with full decimal precision.
void save_params(const CascadeParams& params, const ImportanceHead& head,
                 const std::string& path);
std::pair<CascadeParams, ImportanceHead> load_params(const std::string& path);

}  // namespace diffseg
