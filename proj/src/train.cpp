#include "diffseg/train.hpp"

#include "diffseg/io.hpp"
#include "bytes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace diffseg {

std::vector<std::string> validate_train_config(const TrainConfig& cfg) {
  std::vector<std::string> errors;
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    errors.push_back("learning_rate: must be finite and >= 0");
  if (cfg.epochs < 1) errors.push_back("epochs: must be >= 1");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    errors.push_back("momentum: must be in [0, 1)");
  if (!(cfg.fd_epsilon > 0.0) || !std::isfinite(cfg.fd_epsilon))
    errors.push_back("fd_epsilon: must be finite and > 0");
  return errors;
}

CrossEntropyResult cross_entropy(const ScoreMap& y, const LabelMap& labels) {
  if (!y.grid.same_shape(labels.grid) || labels.labels.size() != y.nodes())
    throw std::invalid_argument("cross_entropy: score and label grids differ");
  const int n = y.nodes(), k = y.classes();
  CrossEntropyResult out;
  out.grad = Matrix::Zero(n, k);
  for (int i = 0; i < n; ++i) {
    const int label = labels.labels[i];
    if (label == kIgnoreLabel) continue;
    if (label < 0 || label >= k)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                  " at node " + std::to_string(i) + " outside 0.." +
                                  std::to_string(k - 1));
    ++out.counted;
  }
  if (out.counted == 0)
    throw std::invalid_argument("cross_entropy: every node is ignored, loss undefined");

  for (int i = 0; i < n; ++i) {
    const int label = labels.labels[i];
    if (label == kIgnoreLabel) continue;
    const Vector row = y.values.row(i).transpose();
    const double shift = row.maxCoeff();
    Vector e = (row.array() - shift).exp();
    const double sum = e.sum();
    out.loss += std::log(sum) + shift - row[label];
    Vector softmax = e / sum;
    softmax[label] -= 1.0;
    out.grad.row(i) = softmax.transpose() / out.counted;
  }
  out.loss /= out.counted;
  return out;
}

CascadeGradients backward_cascade(const CascadeState& state,
                                  const std::vector<TransitionMatrix>& transitions,
                                  const CascadeParams& params, const EngineConfig& cfg,
                                  const Matrix& dL_dy) {
  require_valid(cfg);
  const int stages = cfg.num_stages;
  if (static_cast<int>(state.trace.size()) != stages + 1)
    throw std::invalid_argument("backward_cascade: trace must hold y^0..y^" +
                                std::to_string(stages) + " (run the cascade with keep_trace)");
  if (static_cast<int>(transitions.size()) != stages || params.stages() != stages)
    throw std::invalid_argument("backward_cascade: stage count mismatch");
  const Matrix& s = state.trace.front();
  if (dL_dy.rows() != s.rows() || dL_dy.cols() != s.cols())
    throw std::invalid_argument("backward_cascade: dL_dy shape differs from the scores");

  CascadeGradients grads;
  grads.mu_logits = Vector::Zero(stages);
  grads.beta_logits = Vector::Zero(stages);
  grads.seed = Matrix::Zero(s.rows(), s.cols());

  Matrix g = dL_dy;  // dL/dy^{t+1} while unwinding stage t
  for (int t = stages - 1; t >= 0; --t) {
    if (cfg.skip_stages.contains(t + 1)) continue;
    const double mu = params.mu(t);
    const double beta = params.beta(t);
    const Matrix& y_t = state.trace[t];
    const Matrix propagated = transitions[t].values * y_t;

    // y^{t+1} = beta (mu P y^t + (1-mu) s) + (1-beta) y^t
    const double d_beta =
        ((mu * propagated + (1.0 - mu) * s - y_t).array() * g.array()).sum();
    const double d_mu = beta * ((propagated - s).array() * g.array()).sum();
    grads.beta_logits[t] = d_beta * beta * (1.0 - beta);
    grads.mu_logits[t] = d_mu * mu * (1.0 - mu);

    grads.seed += beta * (1.0 - mu) * g;
    g = (beta * mu) * (transitions[t].values.transpose() * g) + (1.0 - beta) * g;
  }
  grads.seed += g;  // y^0 = s
  return grads;
}

HeadGradients backward_importance(const ScoreMap& x, const ImportanceMap& M,
                                  const ImportanceHead& head, const Matrix& dL_ds) {
  if (dL_ds.rows() != x.values.rows() || dL_ds.cols() != x.values.cols())
    throw std::invalid_argument("backward_importance: dL_ds shape differs from x");
  if (M.values.size() != x.nodes())
    throw std::invalid_argument("backward_importance: importance size differs from x");
  const NodeGrid& grid = x.grid;
  // s = Mx, so dL/dM_ii = <dL/ds_i, x_i>, then through the logistic.
  Vector dz(grid.count());
  for (int i = 0; i < grid.count(); ++i) {
    const double dM = dL_ds.row(i).dot(x.values.row(i));
    dz[i] = dM * M.values[i] * (1.0 - M.values[i]);
  }
  HeadGradients grads;
  grads.weights = Vector::Zero(head.weights.size());
  grads.bias = dz.sum();
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) {
      const int node = r * grid.width + c;
      for (int k = 0; k < head.num_classes; ++k)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int rr = clampi(r + dy, 0, grid.height - 1);
            const int cc = clampi(c + dx, 0, grid.width - 1);
            grads.weights[k * 9 + (dy + 1) * 3 + (dx + 1)] +=
                dz[node] * x.values(rr * grid.width + cc, k);
          }
    }
  return grads;
}

namespace {

struct PreparedItem {
  NodeGrid grid;
  std::vector<TransitionMatrix> transitions;
  ScoreMap x;
  LabelMap labels;
};

PreparedItem prepare_item(const TrainItem& item, const EngineConfig& cfg) {
  FeaturePyramid pyramid;
  if (item.pyramid) {
    pyramid = *item.pyramid;
  } else if (item.image) {
    pyramid = extract_pyramid(*item.image, cfg);
  } else {
    throw std::invalid_argument("train: item has neither image nor pyramid");
  }
  if (pyramid.levels.empty()) throw std::invalid_argument("train: empty pyramid");
  const NodeGrid grid = make_grid(pyramid.levels[0].grid_height,
                                  pyramid.levels[0].grid_width, cfg.downsample_factor);
  PreparedItem prepared;
  prepared.grid = grid;
  prepared.transitions =
      build_transitions(pyramid, default_projections(pyramid, cfg), grid, cfg);
  prepared.x = rasterize_seeds(item.seeds, grid, cfg.num_classes);
  prepared.labels = item.labels;
  if (!prepared.labels.grid.same_shape(grid) || prepared.labels.labels.size() != grid.count())
    throw std::invalid_argument("train: labels do not live on the item's node grid");
  return prepared;
}

double forward_loss(const PreparedItem& item, const EngineConfig& cfg,
                    const CascadeParams& params, const ImportanceHead& head) {
  const ImportanceMap M = importance(item.x, head);
  const ScoreMap s = make_seed(item.x, M);
  const CascadeState state = run_cascade(s, item.transitions, params, cfg, false);
  return cross_entropy(state.current, item.labels).loss;
}

struct ItemGradients {
  double loss = 0.0;
  Vector mu_logits;
  Vector beta_logits;
  Vector head_weights;
  double head_bias = 0.0;
};

ItemGradients backward_item(const PreparedItem& item, const EngineConfig& cfg,
                            const CascadeParams& params, const ImportanceHead& head) {
  const ImportanceMap M = importance(item.x, head);
  const ScoreMap s = make_seed(item.x, M);
  const CascadeState state = run_cascade(s, item.transitions, params, cfg, true);
  const CrossEntropyResult ce = cross_entropy(state.current, item.labels);
  const CascadeGradients cascade =
      backward_cascade(state, item.transitions, params, cfg, ce.grad);
  const HeadGradients head_grads = backward_importance(item.x, M, head, cascade.seed);
  return ItemGradients{ce.loss, cascade.mu_logits, cascade.beta_logits, head_grads.weights,
                       head_grads.bias};
}

}  // namespace

FitResult fit(const std::vector<TrainItem>& dataset, const EngineConfig& cfg,
              const TrainConfig& tcfg) {
  require_valid(cfg);
  {
    const auto errors = validate_train_config(tcfg);
    if (!errors.empty()) throw std::invalid_argument("fit: " + errors.front());
  }
  if (dataset.empty()) throw std::invalid_argument("fit: empty dataset");

  std::vector<PreparedItem> prepared;
  prepared.reserve(dataset.size());
  for (const TrainItem& item : dataset) prepared.push_back(prepare_item(item, cfg));

  FitResult result;
  result.params = default_params(cfg.num_stages);
  result.head = zero_head(cfg.num_classes);

  Vector v_mu = Vector::Zero(cfg.num_stages);
  Vector v_beta = Vector::Zero(cfg.num_stages);
  Vector v_head = Vector::Zero(result.head.weights.size());
  double v_bias = 0.0;
  const double scale = 1.0 / static_cast<double>(prepared.size());

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    double loss = 0.0;
    Vector g_mu = Vector::Zero(cfg.num_stages);
    Vector g_beta = Vector::Zero(cfg.num_stages);
    Vector g_head = Vector::Zero(result.head.weights.size());
    double g_bias = 0.0;
    for (const PreparedItem& item : prepared) {
      const ItemGradients g = backward_item(item, cfg, result.params, result.head);
      loss += g.loss * scale;
      g_mu += g.mu_logits * scale;
      g_beta += g.beta_logits * scale;
      g_head += g.head_weights * scale;
      g_bias += g.head_bias * scale;
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("fit: loss diverged (non-finite) at epoch " +
                               std::to_string(epoch));
    result.loss_history.push_back(loss);

    if (tcfg.train_cascade) {
      v_mu = tcfg.momentum * v_mu - tcfg.learning_rate * g_mu;
      v_beta = tcfg.momentum * v_beta - tcfg.learning_rate * g_beta;
      result.params.mu_logits += v_mu;
      result.params.beta_logits += v_beta;
    }
    if (tcfg.train_head) {
      v_head = tcfg.momentum * v_head - tcfg.learning_rate * g_head;
      v_bias = tcfg.momentum * v_bias - tcfg.learning_rate * g_bias;
      result.head.weights += v_head;
      result.head.bias += v_bias;
    }
  }
  return result;
}

double GradientReport::max_rel_error() const {
  double worst = 0.0;
  for (const GradientEntry& e : entries) worst = std::max(worst, e.rel_error);
  return worst;
}

double gradient_rel_error(double analytic, double finite_diff) {
  return std::abs(analytic - finite_diff) /
         std::max(1e-12, std::abs(analytic) + std::abs(finite_diff));
}

GradientReport grad_check(const TrainItem& item, const EngineConfig& cfg,
                          const CascadeParams& params, const ImportanceHead& head,
                          double fd_epsilon) {
  if (!(fd_epsilon > 0.0)) throw std::invalid_argument("grad_check: fd_epsilon must be > 0");
  const PreparedItem prepared = prepare_item(item, cfg);

  CascadeParams p = params;
  ImportanceHead h = head;
  const ItemGradients analytic = backward_item(prepared, cfg, p, h);
  auto loss = [&]() { return forward_loss(prepared, cfg, p, h); };

  GradientReport report;
  auto add = [&report](std::string name, double a, double f) {
    report.entries.push_back({std::move(name), a, f, gradient_rel_error(a, f)});
  };
  for (int t = 0; t < p.stages(); ++t) {
    add("mu_logit[" + std::to_string(t) + "]", analytic.mu_logits[t],
        central_difference(loss, &p.mu_logits[t], fd_epsilon));
    add("beta_logit[" + std::to_string(t) + "]", analytic.beta_logits[t],
        central_difference(loss, &p.beta_logits[t], fd_epsilon));
  }
  for (int i = 0; i < h.weights.size(); ++i)
    add("head_w[" + std::to_string(i) + "]", analytic.head_weights[i],
        central_difference(loss, &h.weights[i], fd_epsilon));
  add("head_b", analytic.head_bias, central_difference(loss, &h.bias, fd_epsilon));

  std::sort(report.entries.begin(), report.entries.end(),
            [](const GradientEntry& a, const GradientEntry& b) {
              return a.rel_error > b.rel_error;
            });
  return report;
}

void save_params(const CascadeParams& params, const ImportanceHead& head,
                 const std::string& path) {
  std::string out;
  for (int t = 0; t < params.stages(); ++t)
    out += "mu_logit[" + std::to_string(t) + "]=" + detail::fmt_g17(params.mu_logits[t]) + "\n";
  for (int t = 0; t < params.stages(); ++t)
    out += "beta_logit[" + std::to_string(t) + "]=" + detail::fmt_g17(params.beta_logits[t]) + "\n";
  for (int i = 0; i < head.weights.size(); ++i)
    out += "head_w[" + std::to_string(i) + "]=" + detail::fmt_g17(head.weights[i]) + "\n";
  out += "head_b=" + detail::fmt_g17(head.bias) + "\n";
  write_file_atomic(path, out);
}

namespace {

// "name[index]=value" -> (name, index); plain "name=value" -> index -1.
std::pair<std::string, int> split_key(const std::string& key, const std::string& path,
                                      int line_no) {
  const size_t open = key.find('[');
  if (open == std::string::npos) return {key, -1};
  const size_t close = key.find(']', open);
  if (close == std::string::npos || close != key.size() - 1)
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed key '" +
                             key + "'");
  int index = 0;
  try {
    index = std::stoi(key.substr(open + 1, close - open - 1));
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad index in '" +
                             key + "'");
  }
  if (index < 0)
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative index");
  return {key.substr(0, open), index};
}

void store(std::map<int, double>& slot, int index, double value, const std::string& path,
           int line_no) {
  if (!slot.emplace(index, value).second)
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": duplicate entry");
}

Vector to_dense(const std::map<int, double>& values, const std::string& what,
                const std::string& path) {
  if (values.empty()) throw std::runtime_error(path + ": no " + what + " entries");
  const int count = values.rbegin()->first + 1;
  if (static_cast<int>(values.size()) != count)
    throw std::runtime_error(path + ": " + what + " indices are not contiguous from 0");
  Vector dense(count);
  for (const auto& [index, value] : values) dense[index] = value;
  return dense;
}

}  // namespace

std::pair<CascadeParams, ImportanceHead> load_params(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  std::map<int, double> mu, beta, head_w;
  double head_b = 0.0;
  bool saw_bias = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    const auto [name, index] = split_key(line.substr(0, eq), path, line_no);
    char* end = nullptr;
    const std::string value_text = line.substr(eq + 1);
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0' || !std::isfinite(value))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad value '" +
                               value_text + "'");
    if (name == "mu_logit" && index >= 0) {
      store(mu, index, value, path, line_no);
    } else if (name == "beta_logit" && index >= 0) {
      store(beta, index, value, path, line_no);
    } else if (name == "head_w" && index >= 0) {
      store(head_w, index, value, path, line_no);
    } else if (name == "head_b" && index < 0) {
      if (saw_bias)
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": duplicate head_b");
      head_b = value;
      saw_bias = true;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown key '" +
                               line.substr(0, eq) + "'");
    }
  }
  CascadeParams params{to_dense(mu, "mu_logit", path), to_dense(beta, "beta_logit", path)};
  if (params.mu_logits.size() != params.beta_logits.size())
    throw std::runtime_error(path + ": mu_logit and beta_logit counts differ");
  const Vector weights = to_dense(head_w, "head_w", path);
  if (weights.size() % 9 != 0)
    throw std::runtime_error(path + ": head_w count must be a multiple of 9");
  if (!saw_bias) throw std::runtime_error(path + ": missing head_b");
  ImportanceHead head{static_cast<int>(weights.size() / 9), weights, head_b};
  return {std::move(params), std::move(head)};
}

}  // namespace diffseg
