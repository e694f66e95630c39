#include "diffseg/cli.hpp"

#include "diffseg/io.hpp"
#include "diffseg/pipeline.hpp"
#include "diffseg/train.hpp"
#include "bytes.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>

namespace diffseg {

namespace {

namespace fs = std::filesystem;

/// Command-line misuse detected after CLI11 parsing (maps to exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct EngineOptions {
  EngineConfig cfg;
  bool no_affinity_scale = false;
  bool max_pool = false;
  std::string skip_list;

  void attach(CLI::App* cmd) {
    cmd->add_option("--classes", cfg.num_classes, "number of classes")->capture_default_str();
    cmd->add_option("--stages", cfg.num_stages, "number of cascade stages")
        ->capture_default_str();
    cmd->add_option("--embed-dim", cfg.embed_dim, "embedding dimension")
        ->capture_default_str();
    cmd->add_option("--downsample", cfg.downsample_factor, "node grid downsample factor")
        ->capture_default_str();
    cmd->add_option("--temperature", cfg.softmax_temperature, "row softmax temperature")
        ->capture_default_str();
    cmd->add_option("--epsilon", cfg.standardize_epsilon, "standardization epsilon")
        ->capture_default_str();
    cmd->add_flag("--no-affinity-scale", no_affinity_scale,
                  "disable 1/sqrt(d) affinity scaling");
    cmd->add_flag("--max-pool", max_pool, "max pooling instead of average");
    cmd->add_option("--skip-stages", skip_list, "comma-separated 1-based stages to skip");
  }

  EngineConfig finalize() {
    cfg.affinity_scale = !no_affinity_scale;
    cfg.pooling = max_pool ? PoolMode::kMax : PoolMode::kAverage;
    cfg.skip_stages.clear();
    if (!skip_list.empty()) {
      std::stringstream ss(skip_list);
      std::string token;
      while (std::getline(ss, token, ',')) {
        try {
          size_t used = 0;
          const int stage = std::stoi(token, &used);
          if (used != token.size()) throw std::invalid_argument(token);
          cfg.skip_stages.insert(stage);
        } catch (const std::exception&) {
          throw UsageError("--skip-stages: '" + token + "' is not an integer");
        }
      }
    }
    require_valid(cfg);
    return cfg;
  }
};

std::pair<CascadeParams, ImportanceHead> params_or_default(const std::string& path,
                                                           const EngineConfig& cfg) {
  if (path.empty()) return {default_params(cfg.num_stages), zero_head(cfg.num_classes)};
  auto [params, head] = load_params(path);
  if (params.stages() != cfg.num_stages)
    throw std::runtime_error(path + ": holds " + std::to_string(params.stages()) +
                             " stages, config expects " + std::to_string(cfg.num_stages));
  if (head.num_classes != cfg.num_classes)
    throw std::runtime_error(path + ": head covers " + std::to_string(head.num_classes) +
                             " classes, config expects " + std::to_string(cfg.num_classes));
  return {std::move(params), std::move(head)};
}

Matrix node_values_grid(const Vector& values, const NodeGrid& grid) {
  Matrix out(grid.height, grid.width);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) out(r, c) = values[r * grid.width + c];
  return out;
}

Matrix max_score_grid(const Matrix& scores, const NodeGrid& grid) {
  Matrix out(grid.height, grid.width);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c)
      out(r, c) = scores.row(r * grid.width + c).maxCoeff();
  return out;
}

struct InputOptions {
  std::string image_path;
  std::string pyramid_path;
  std::string seeds_path;

  void attach(CLI::App* cmd, bool seeds_required) {
    auto* image = cmd->add_option("--image", image_path, "input PPM/PGM image");
    auto* pyramid =
        cmd->add_option("--pyramid", pyramid_path, "precomputed feature pyramid (FPYR)");
    image->excludes(pyramid);
    auto* seeds =
        cmd->add_option("--seeds", seeds_path, "seed file (text rows or scribble .pgm)");
    if (seeds_required) seeds->required();
  }

  FeaturePyramid load(const EngineConfig& cfg) const {
    if (!pyramid_path.empty()) return load_pyramid(pyramid_path, cfg);
    if (image_path.empty()) throw UsageError("one of --image or --pyramid is required");
    return extract_pyramid(read_image(image_path), cfg);
  }
};

RunManifest make_manifest(const EngineConfig& cfg, const InputOptions& input,
                          const std::string& params_path, const CascadeParams& params,
                          const PhaseTimings& timings,
                          const std::vector<std::string>& outputs) {
  RunManifest m;
  m.config = cfg;
  m.image_path = input.image_path.empty() ? input.pyramid_path : input.image_path;
  m.seeds_path = input.seeds_path;
  m.params_path = params_path;
  for (int t = 0; t < params.stages(); ++t) {
    m.mu.push_back(params.mu(t));
    m.beta.push_back(params.beta(t));
  }
  m.timings = timings;
  m.output_paths = outputs;
  return m;
}

// ---- segment ---------------------------------------------------------------

struct SegmentOptions {
  EngineOptions engine;
  InputOptions input;
  std::string params_path;
  std::string out_path;
  std::string manifest_path;
  std::string trace_prefix;
  std::string transitions_prefix;
};

int cmd_segment(SegmentOptions& opt) {
  const EngineConfig cfg = opt.engine.finalize();
  auto [params, head] = params_or_default(opt.params_path, cfg);

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  FeaturePyramid pyramid = opt.input.load(cfg);
  const double feature_s = std::chrono::duration<double>(Clock::now() - t0).count();

  const PixelSeeds seeds = read_seeds(opt.input.seeds_path);
  const bool keep_trace = !opt.trace_prefix.empty();
  SegmentResult result =
      run_segmentation(std::move(pyramid), seeds, params, head, cfg, keep_trace);
  result.timings.feature_s = feature_s;

  std::vector<std::string> outputs;
  write_label_map(result.labels, opt.out_path);
  outputs.push_back(opt.out_path);

  if (keep_trace) {
    for (size_t t = 0; t < result.state.trace.size(); ++t) {
      const std::string path = opt.trace_prefix + ".stage" + std::to_string(t) + ".pgm";
      encode_heatmap(max_score_grid(result.state.trace[t], result.grid), path);
      outputs.push_back(path);
    }
  }
  if (!opt.transitions_prefix.empty()) {
    for (size_t t = 0; t < result.transitions.size(); ++t) {
      const std::string path =
          opt.transitions_prefix + ".stage" + std::to_string(t + 1) + ".tmat";
      save_transition(result.transitions[t], path);
      outputs.push_back(path);
    }
  }

  const std::string manifest_path =
      opt.manifest_path.empty() ? opt.out_path + ".manifest" : opt.manifest_path;
  write_manifest(make_manifest(cfg, opt.input, opt.params_path, params, result.timings,
                               outputs),
                 manifest_path);
  std::cout << "labels=" << opt.out_path << "\nmanifest=" << manifest_path << "\n";
  return 0;
}

// ---- oracle ----------------------------------------------------------------

struct OracleOptions {
  int n = 64;
  int classes = 4;
  double mu = 0.5;
  int iters = 80;
  uint64_t seed = 1;
  double tol = 1e-8;
};

int cmd_oracle(const OracleOptions& opt) {
  if (opt.n < 1 || opt.classes < 1 || opt.iters < 0)
    throw UsageError("oracle: --n and --classes must be positive, --iters >= 0");
  if (!(opt.mu >= 0.0 && opt.mu < 1.0)) throw UsageError("oracle: --mu must be in [0,1)");
  std::mt19937_64 rng(opt.seed);
  Matrix raw(opt.n, opt.n);
  for (int i = 0; i < opt.n; ++i)
    for (int j = 0; j < opt.n; ++j) raw(i, j) = uniform01(rng) + 0.01;
  for (int i = 0; i < opt.n; ++i) raw.row(i) /= raw.row(i).sum();
  const TransitionMatrix P{raw, 0};

  const NodeGrid grid{1, opt.n, 1};
  ScoreMap s{grid, Matrix(opt.n, opt.classes)};
  for (int i = 0; i < opt.n; ++i)
    for (int k = 0; k < opt.classes; ++k) s.values(i, k) = uniform01(rng);

  ScoreMap y = s;
  for (int i = 0; i < opt.iters; ++i) y = walk_step(y, P, s, opt.mu);
  const ScoreMap direct = closed_form(P, s, opt.mu);
  const double deviation = (y.values - direct.values).cwiseAbs().maxCoeff();
  const double residual = fixed_point_residual(direct, P, s, opt.mu);

  std::cout << "n=" << opt.n << " classes=" << opt.classes << " mu=" << opt.mu
            << " iters=" << opt.iters << "\n";
  std::cout << "deviation=" << detail::fmt_g17(deviation) << "\n";
  std::cout << "solve_residual=" << detail::fmt_g17(residual) << "\n";
  std::cout << "tolerance=" << detail::fmt_g17(opt.tol) << "\n";
  const bool ok = deviation <= opt.tol;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

// ---- viz -------------------------------------------------------------------

struct VizOptions {
  EngineOptions engine;
  InputOptions input;
  std::string what;
  std::string params_path;
  std::string out_path;
  int node = 0;
  int stage = 0;  // 1-based; 0 means the last stage
};

int cmd_viz(VizOptions& opt) {
  const EngineConfig cfg = opt.engine.finalize();
  auto [params, head] = params_or_default(opt.params_path, cfg);
  FeaturePyramid pyramid = opt.input.load(cfg);
  const int image_height = pyramid.levels[0].grid_height;
  const int image_width = pyramid.levels[0].grid_width;
  const NodeGrid grid = make_grid(image_height, image_width, cfg.downsample_factor);

  ScoreMap x{grid, Matrix::Zero(grid.count(), cfg.num_classes)};
  if (!opt.input.seeds_path.empty()) {
    const PixelSeeds seeds = read_seeds(opt.input.seeds_path);
    x = rasterize_seeds(to_node_seeds(seeds, image_height, image_width, grid,
                                      cfg.num_classes),
                        grid, cfg.num_classes);
  } else if (opt.what != "transition-row") {
    throw UsageError("viz: --seeds is required for --what " + opt.what);
  }

  if (opt.what == "scoremap") {
    encode_heatmap(max_score_grid(x.values, grid), opt.out_path);
  } else if (opt.what == "influence") {
    encode_heatmap(node_values_grid(influence(x).values, grid), opt.out_path);
  } else if (opt.what == "importance") {
    encode_heatmap(node_values_grid(importance(x, head).values, grid), opt.out_path);
  } else if (opt.what == "transition-row") {
    const auto transitions =
        build_transitions(pyramid, default_projections(pyramid, cfg), grid, cfg);
    const int stage = opt.stage == 0 ? cfg.num_stages : opt.stage;
    if (stage < 1 || stage > cfg.num_stages)
      throw std::out_of_range("viz: --stage " + std::to_string(stage) + " outside 1.." +
                              std::to_string(cfg.num_stages));
    encode_heatmap(transition_row(transitions[stage - 1], opt.node, grid), opt.out_path);
  } else if (opt.what == "stage-trace") {
    const auto transitions =
        build_transitions(pyramid, default_projections(pyramid, cfg), grid, cfg);
    const ScoreMap s = make_seed(x, importance(x, head));
    const CascadeState state = run_cascade(s, transitions, params, cfg, true);
    for (size_t t = 0; t < state.trace.size(); ++t)
      encode_heatmap(max_score_grid(state.trace[t], grid),
                     opt.out_path + ".stage" + std::to_string(t) + ".pgm");
  } else {
    throw UsageError("viz: unknown --what " + opt.what);
  }
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainCliOptions {
  EngineOptions engine;
  std::string data_dir;
  std::string out_path;
  TrainConfig tcfg;
  bool freeze_cascade = false;
  bool freeze_head = false;
};

std::vector<TrainItem> load_dataset(const std::string& dir, const EngineConfig& cfg) {
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path p = entry.path();
    if (p.extension() == ".ppm" || p.extension() == ".fpyr")
      stems.push_back(p.string());
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty())
    throw std::runtime_error(dir + ": no .ppm or .fpyr inputs found");

  std::vector<TrainItem> dataset;
  for (const std::string& input : stems) {
    const fs::path p(input);
    const fs::path base = fs::path(p).replace_extension();
    TrainItem item;
    if (p.extension() == ".ppm") {
      item.image = read_image(input);
    } else {
      item.pyramid = load_pyramid(input, cfg);
    }
    const int image_height =
        item.image ? item.image->height : item.pyramid->levels[0].grid_height;
    const int image_width =
        item.image ? item.image->width : item.pyramid->levels[0].grid_width;
    const NodeGrid grid = make_grid(image_height, image_width, cfg.downsample_factor);

    fs::path seeds_path = base;
    seeds_path += ".seeds";
    fs::path scribble_path = base;
    scribble_path += ".scribble.pgm";
    PixelSeeds seeds;
    if (fs::exists(seeds_path)) {
      seeds = read_seeds_text(seeds_path.string());
    } else if (fs::exists(scribble_path)) {
      seeds = read_scribble(scribble_path.string());
    } else {
      throw std::runtime_error(input + ": no matching .seeds or .scribble.pgm");
    }
    item.seeds = to_node_seeds(seeds, image_height, image_width, grid, cfg.num_classes);

    fs::path truth_path = base;
    truth_path += ".truth.pgm";
    if (!fs::exists(truth_path))
      throw std::runtime_error(input + ": no matching .truth.pgm");
    item.labels = read_label_map(truth_path.string(), cfg.downsample_factor);
    dataset.push_back(std::move(item));
  }
  return dataset;
}

int cmd_train(TrainCliOptions& opt) {
  const EngineConfig cfg = opt.engine.finalize();
  opt.tcfg.train_cascade = !opt.freeze_cascade;
  opt.tcfg.train_head = !opt.freeze_head;
  {
    const auto errors = validate_train_config(opt.tcfg);
    if (!errors.empty()) throw UsageError("train: " + errors.front());
  }
  const std::vector<TrainItem> dataset = load_dataset(opt.data_dir, cfg);
  std::cout << "items=" << dataset.size() << " epochs=" << opt.tcfg.epochs << "\n";
  const FitResult result = fit(dataset, cfg, opt.tcfg);
  const int stride = std::max(1, opt.tcfg.epochs / 10);
  for (int e = 0; e < static_cast<int>(result.loss_history.size()); e += stride)
    std::cout << "epoch " << e << " loss=" << detail::fmt_g17(result.loss_history[e]) << "\n";
  std::cout << "final loss=" << detail::fmt_g17(result.loss_history.back()) << "\n";
  for (int t = 0; t < result.params.stages(); ++t)
    std::cout << "stage " << (t + 1) << " mu=" << detail::fmt_g17(result.params.mu(t))
              << " beta=" << detail::fmt_g17(result.params.beta(t)) << "\n";
  save_params(result.params, result.head, opt.out_path);
  std::cout << "params=" << opt.out_path << "\n";
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  std::string dir;
  int classes = 2;
};

int cmd_eval(const EvalOptions& opt) {
  if (opt.classes < 1) throw UsageError("eval: --classes must be positive");
  std::vector<std::string> pred_paths;
  for (const auto& entry : fs::directory_iterator(opt.dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > 9 && name.compare(name.size() - 9, 9, ".pred.pgm") == 0)
      pred_paths.push_back(entry.path().string());
  }
  std::sort(pred_paths.begin(), pred_paths.end());
  if (pred_paths.empty())
    throw std::runtime_error(opt.dir + ": no *.pred.pgm files found");
  for (const std::string& pred_path : pred_paths) {
    std::string truth_path = pred_path;
    truth_path.replace(truth_path.size() - 9, 9, ".truth.pgm");
    if (!fs::exists(truth_path))
      throw std::runtime_error(pred_path + ": no matching " + truth_path);
  }

  double sum = 0.0;
  for (const std::string& pred_path : pred_paths) {
    std::string truth_path = pred_path;
    truth_path.replace(truth_path.size() - 9, 9, ".truth.pgm");
    const LabelMap pred = read_label_map(pred_path);
    const LabelMap truth = read_label_map(truth_path);
    const IoUReport report = miou(pred, truth, opt.classes);
    sum += report.mean;
    std::cout << fs::path(pred_path).filename().string()
              << " miou=" << detail::fmt_g17(report.mean) << "\n";
  }
  std::cout << "pairs=" << pred_paths.size() << "\n";
  std::cout << "mean_miou=" << detail::fmt_g17(sum / pred_paths.size()) << "\n";
  return 0;
}

// ---- grad-check ------------------------------------------------------------

struct GradCheckOptions {
  int side = 4;
  double fd_epsilon = 1e-5;
  double threshold = 1e-4;
  uint64_t seed = 7;
  EngineOptions engine;
};

int cmd_grad_check(GradCheckOptions& opt) {
  const EngineConfig cfg = opt.engine.finalize();
  if (opt.side < 3) throw UsageError("grad-check: --side must be >= 3");
  std::mt19937_64 rng(opt.seed);

  const int image_side = opt.side * cfg.downsample_factor;
  Image image = make_image(3, image_side, image_side);
  for (double& v : image.data) v = uniform01(rng);

  const NodeGrid grid = make_grid(image_side, image_side, cfg.downsample_factor);
  TrainItem item;
  SparseSeeds seeds;
  LabelMap labels{grid, Eigen::VectorXi(grid.count())};
  for (int node = 0; node < grid.count(); ++node) {
    if (uniform01(rng) < 0.3 || node == 0)
      seeds.entries.push_back({node, static_cast<int>(rng() % cfg.num_classes),
                               0.5 + 1.5 * uniform01(rng)});
    labels.labels[node] = uniform01(rng) < 0.1 && node != 0
                              ? kIgnoreLabel
                              : static_cast<int>(rng() % cfg.num_classes);
  }
  item.image = std::move(image);
  item.seeds = std::move(seeds);
  item.labels = std::move(labels);

  CascadeParams params = default_params(cfg.num_stages);
  ImportanceHead head = zero_head(cfg.num_classes);
  for (int t = 0; t < cfg.num_stages; ++t) {
    params.mu_logits[t] = 2.0 * uniform01(rng) - 1.0;
    params.beta_logits[t] = 2.0 * uniform01(rng) - 1.0;
  }
  for (int i = 0; i < head.weights.size(); ++i) head.weights[i] = uniform01(rng) - 0.5;
  head.bias = uniform01(rng) - 0.5;

  const GradientReport report = grad_check(item, cfg, params, head, opt.fd_epsilon);
  std::cout << "parameters=" << report.entries.size() << " fd_epsilon=" << opt.fd_epsilon
            << "\n";
  const size_t show = std::min<size_t>(5, report.entries.size());
  for (size_t i = 0; i < show; ++i) {
    const GradientEntry& e = report.entries[i];
    std::cout << e.name << " analytic=" << detail::fmt_g17(e.analytic)
              << " fd=" << detail::fmt_g17(e.finite_diff)
              << " rel_error=" << detail::fmt_g17(e.rel_error) << "\n";
  }
  std::cout << "max_rel_error=" << detail::fmt_g17(report.max_rel_error()) << "\n";
  const bool ok = report.max_rel_error() < opt.threshold;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

// ---- bench -----------------------------------------------------------------

struct BenchOptions {
  int size = 160;
  uint64_t seed = 3;
  std::string manifest_path;
  EngineOptions engine;
};

int cmd_bench(BenchOptions& opt) {
  const EngineConfig cfg = opt.engine.finalize();
  if (opt.size < 15) throw UsageError("bench: --size must be >= 15");
  std::mt19937_64 rng(opt.seed);

  Image image = make_image(3, opt.size, opt.size);
  for (double& v : image.data) v = uniform01(rng);
  const NodeGrid grid = make_grid(opt.size, opt.size, cfg.downsample_factor);

  PixelSeeds seeds;
  const int rho = cfg.downsample_factor;
  for (int node = 0; node < grid.count(); ++node) {
    if (uniform01(rng) >= 0.05 && node != 0) continue;
    const auto [nr, nc] = node_cell(node, grid);
    seeds.entries.push_back(
        {std::min(nr * rho + rho / 2, opt.size - 1), std::min(nc * rho + rho / 2, opt.size - 1),
         static_cast<int>(rng() % cfg.num_classes), 1.0});
  }

  const CascadeParams params = default_params(cfg.num_stages);
  const ImportanceHead head = zero_head(cfg.num_classes);
  const SegmentResult result = run_segmentation(image, seeds, params, head, cfg, false);

  std::cout << "nodes=" << grid.count() << " classes=" << cfg.num_classes
            << " stages=" << cfg.num_stages << "\n";
  std::cout << "time.feature_s=" << result.timings.feature_s << "\n";
  std::cout << "time.similarity_s=" << result.timings.similarity_s << "\n";
  std::cout << "time.seed_s=" << result.timings.seed_s << "\n";
  std::cout << "time.diffusion_s=" << result.timings.diffusion_s << "\n";

  if (!opt.manifest_path.empty()) {
    InputOptions input;
    input.image_path = "<synthetic " + std::to_string(opt.size) + "x" +
                       std::to_string(opt.size) + ">";
    write_manifest(make_manifest(cfg, input, "", params, result.timings, {}),
                   opt.manifest_path);
    std::cout << "manifest=" << opt.manifest_path << "\n";
  }
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"seeded graph-diffusion image segmentation"};
  app.require_subcommand(1);

  SegmentOptions segment;
  CLI::App* segment_cmd =
      app.add_subcommand("segment", "segment an image from seeds; writes labels + manifest");
  segment.engine.attach(segment_cmd);
  segment.input.attach(segment_cmd, true);
  segment_cmd->add_option("--params", segment.params_path, "trained parameter file");
  segment_cmd->add_option("--out", segment.out_path, "output label PGM")->required();
  segment_cmd->add_option("--manifest", segment.manifest_path,
                          "manifest path (default: <out>.manifest)");
  segment_cmd->add_option("--trace-prefix", segment.trace_prefix,
                          "write per-stage score heatmaps with this prefix");
  segment_cmd->add_option("--dump-transitions", segment.transitions_prefix,
                          "write per-stage transition matrices with this prefix");

  OracleOptions oracle;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "compare the iterated walk against the direct linear solve");
  oracle_cmd->add_option("--n", oracle.n, "node count")->capture_default_str();
  oracle_cmd->add_option("--classes", oracle.classes, "class count")->capture_default_str();
  oracle_cmd->add_option("--mu", oracle.mu, "walk strength in [0,1)")->capture_default_str();
  oracle_cmd->add_option("--iters", oracle.iters, "walk iterations")->capture_default_str();
  oracle_cmd->add_option("--seed", oracle.seed, "rng seed")->capture_default_str();
  oracle_cmd->add_option("--tol", oracle.tol, "max-norm tolerance")->capture_default_str();

  VizOptions viz;
  CLI::App* viz_cmd = app.add_subcommand("viz", "render engine internals as PGM heatmaps");
  viz.engine.attach(viz_cmd);
  viz.input.attach(viz_cmd, false);
  viz_cmd
      ->add_option("--what", viz.what,
                   "scoremap|influence|importance|transition-row|stage-trace")
      ->required()
      ->check(CLI::IsMember(
          {"scoremap", "influence", "importance", "transition-row", "stage-trace"}));
  viz_cmd->add_option("--params", viz.params_path, "trained parameter file");
  viz_cmd->add_option("--out", viz.out_path, "output PGM (prefix for stage-trace)")
      ->required();
  viz_cmd->add_option("--node", viz.node, "node id for transition-row")
      ->capture_default_str();
  viz_cmd->add_option("--stage", viz.stage, "1-based stage for transition-row (default: last)");

  TrainCliOptions train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit cascade and importance-head parameters");
  train.engine.attach(train_cmd);
  train_cmd->add_option("--data", train.data_dir, "directory of <x>.ppm/.fpyr + <x>.seeds + <x>.truth.pgm")
      ->required();
  train_cmd->add_option("--out", train.out_path, "output parameter file")->required();
  train_cmd->add_option("--epochs", train.tcfg.epochs, "training epochs")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.tcfg.learning_rate, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--momentum", train.tcfg.momentum, "momentum")->capture_default_str();
  train_cmd->add_flag("--freeze-cascade", train.freeze_cascade, "do not train mu/beta");
  train_cmd->add_flag("--freeze-head", train.freeze_head, "do not train the importance head");

  EvalOptions eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "mean IoU over a directory of *.pred.pgm / *.truth.pgm pairs");
  eval_cmd->add_option("--dir", eval.dir, "directory of label pairs")->required();
  eval_cmd->add_option("--classes", eval.classes, "class count")->capture_default_str();

  GradCheckOptions grad;
  grad.engine.cfg.num_classes = 3;  // small synthetic instance by default
  CLI::App* grad_cmd = app.add_subcommand(
      "grad-check", "finite-difference check of every analytic gradient");
  grad.engine.attach(grad_cmd);
  grad_cmd->add_option("--side", grad.side, "node grid side length")->capture_default_str();
  grad_cmd->add_option("--fd-eps", grad.fd_epsilon, "finite-difference step")
      ->capture_default_str();
  grad_cmd->add_option("--threshold", grad.threshold, "max acceptable relative error")
      ->capture_default_str();
  grad_cmd->add_option("--seed", grad.seed, "rng seed")->capture_default_str();

  BenchOptions bench;
  bench.engine.cfg.num_classes = 21;  // dense many-class walks by default
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "phase timings on a synthetic image");
  bench.engine.attach(bench_cmd);
  bench_cmd->add_option("--size", bench.size, "synthetic image side length")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "rng seed")->capture_default_str();
  bench_cmd->add_option("--out", bench.manifest_path, "write a manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (segment_cmd->parsed()) return cmd_segment(segment);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle);
    if (viz_cmd->parsed()) return cmd_viz(viz);
    if (train_cmd->parsed()) return cmd_train(train);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (grad_cmd->parsed()) return cmd_grad_check(grad);
    if (bench_cmd->parsed()) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int cli_dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("diffseg");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace diffseg
