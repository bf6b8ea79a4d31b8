#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ssc/evaluation/evaluate.hpp"
#include "ssc/io/config.hpp"
#include "ssc/io/dataset_io.hpp"
#include "ssc/io/ply.hpp"
#include "ssc/networks/builders.hpp"
#include "ssc/networks/model_io.hpp"
#include "ssc/testing/verify.hpp"
#include "ssc/training/strategy.hpp"
#include "ssc/training/trainer.hpp"

namespace ssc::cli {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Every setting a config file may contain, with its default.
inline Config default_settings() {
  Config c;
  c.set("seed", "1");
  c.set("count", "4");
  write_grid(c, default_grid());
  write_intrinsics(c, default_intrinsics());
  c.set("max_range", "10");
  c.set("min_objects", "1");
  c.set("max_objects", "4");
  c.set("tau", "4");
  c.set("variant", "depth");
  c.set("strategy", "random");
  c.set("width", "0.5");
  c.set("residual", "true");
  c.set("lr", "0.01");
  c.set("momentum", "0.9");
  c.set("iterations", "500");
  c.set("batch", "1");
  c.set("loss_mask", "observed");
  c.set("class_weights", "");
  c.set("checkpoint_every", "0");
  c.set("donor_ratio", format_real(kDonorRateRatio));
  c.set("log_every", "50");
  return c;
}

inline std::set<std::string> known_settings() {
  std::set<std::string> keys;
  const Config defaults = default_settings();
  for (const auto& [k, v] : defaults.values()) keys.insert(k);
  return keys;
}

/// Malformed values in flags or config files are usage errors, caught before
/// any work starts.
inline void check_setting_types(const Config& c) {
  try {
    for (const char* k : {"seed", "count", "min_objects", "max_objects", "iterations", "batch", "checkpoint_every",
                          "log_every", "image_width", "image_height"})
      c.integer(k);
    for (const char* k : {"max_range", "tau", "width", "lr", "momentum", "donor_ratio", "fx", "fy", "cx", "cy",
                          "voxel_size"})
      c.real(k);
    for (const char* k : {"grid_origin", "grid_dims", "class_weights"}) c.reals(k);
    c.flag("residual", true);
  } catch (const UsageError&) {
    throw;
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

struct Context {
  std::ostream& out;
  Config settings = default_settings();

  void log_settings() const {
    out << "resolved config:\n";
    for (const auto& [k, v] : settings.values()) out << "  " << k << '=' << v << '\n';
  }
};

inline std::size_t positive(const Config& c, const std::string& key) {
  const long long v = c.integer(key);
  if (v < 1) throw UsageError("setting '" + key + "' must be at least 1");
  return static_cast<std::size_t>(v);
}

inline std::size_t non_negative(const Config& c, const std::string& key) {
  const long long v = c.integer(key);
  if (v < 0) throw UsageError("setting '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

inline double tau_of(const Config& c) {
  const double tau = c.real("tau");
  if (!(tau > 0)) throw UsageError("setting 'tau' must be positive");
  return tau;
}

// synth -----------------------------------------------------------------

inline int cmd_synth(Context& ctx, const std::string& out_dir) {
  const Config& s = ctx.settings;
  ctx.log_settings();
  const long long count = s.integer("count");
  if (count < 1) throw DataError("count must be at least 1");
  DatasetInfo info;
  info.seed = static_cast<std::uint64_t>(s.integer("seed"));
  info.grid = read_grid(s);
  info.intrinsics = read_intrinsics(s);
  info.max_range = s.real("max_range");
  SynthOptions opt;
  opt.max_range = info.max_range;
  opt.min_objects = static_cast<int>(s.integer("min_objects"));
  opt.max_objects = static_cast<int>(s.integer("max_objects"));
  if (opt.min_objects < 0 || opt.max_objects < opt.min_objects) {
    throw UsageError("need 0 <= min_objects <= max_objects");
  }
  const auto samples = make_dataset(info.seed, static_cast<std::size_t>(count), info.grid, info.intrinsics,
                                    info.labels, opt);
  save_dataset(out_dir, samples, info);
  ctx.out << "wrote " << samples.size() << " samples to " << out_dir << '\n';
  return kOk;
}

// encode ----------------------------------------------------------------

inline int cmd_encode(Context& ctx, const std::string& data) {
  ctx.log_settings();
  const DatasetInfo info = read_manifest(data);
  const double tau = tau_of(ctx.settings);
  for (const auto& id : info.ids) {
    const Sample s = load_sample(data, id, info);
    const EncodedSample e = encode_sample(s, info.intrinsics, info.grid, tau, info.max_range);
    save_encoded(data, e);
    ctx.out << "encoded " << id << '\n';
  }
  return kOk;
}

// train -----------------------------------------------------------------

inline HyperParams hyper_params(const Config& s) {
  HyperParams hp;
  hp.lr = s.real("lr");
  hp.momentum = s.real("momentum");
  hp.iterations = positive(s, "iterations");
  hp.batch = positive(s, "batch");
  hp.seed = static_cast<std::uint64_t>(s.integer("seed"));
  hp.mask = parse_loss_mask(s.str("loss_mask"));
  hp.class_weights = s.reals("class_weights");
  hp.checkpoint_every = non_negative(s, "checkpoint_every");
  hp.validate();
  return hp;
}

inline std::string sibling(const std::string& model, const std::string& suffix) {
  fs::path p(model);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

struct TrainPaths {
  std::string data, out, donor, history;
};

inline int cmd_train(Context& ctx, TrainPaths paths) {
  const Config& s = ctx.settings;
  ctx.log_settings();
  const Variant variant = parse_variant(s.str("variant"));
  const Strategy strategy = parse_strategy(s.str("strategy"));
  check_strategy(strategy, variant, !paths.donor.empty());
  if (!paths.donor.empty() && strategy == Strategy::kRandomInit) {
    throw UsageError("strategy 'random' takes no donor model");
  }
  const HyperParams hp = hyper_params(s);
  const double donor_ratio = s.real("donor_ratio");
  if (!(donor_ratio >= 0)) throw UsageError("donor_ratio must be >= 0");
  const std::size_t log_every = positive(s, "log_every");

  const DatasetInfo info = read_manifest(paths.data);
  NetConfig cfg;
  cfg.grid = info.grid.dims;
  cfg.classes = static_cast<int>(info.labels.size());
  cfg.width = s.real("width");
  cfg.residual = s.flag("residual", true);
  cfg.seed = hp.seed;
  NetworkGraph<float> net = build_network<float>(variant, cfg);
  NetworkGraph<float> donor;
  if (!paths.donor.empty()) donor = load_model<float>(paths.donor);
  const StrategyResult r = apply_strategy(net, strategy, paths.donor.empty() ? nullptr : &donor, hp.seed, donor_ratio);
  ctx.out << "network " << variant_name(variant) << ": " << net.parameter_count() << " parameters, input "
          << shape_str(net.input_shape()) << ", output " << shape_str(net.output_shape()) << '\n';
  if (strategy != Strategy::kRandomInit) {
    ctx.out << "donor blocks " << r.donor_blocks.size() << ", new blocks " << r.new_blocks.size() << " ("
            << join(r.new_blocks, ',') << ")\n";
  }

  const auto data = make_examples<float>(load_encoded_dataset(paths.data, info, tau_of(s)), variant, hp.mask);
  if (paths.history.empty()) paths.history = sibling(paths.out, ".history.csv");

  TrainHooks<float> hooks;
  double window = 0;
  std::size_t in_window = 0;
  hooks.progress = [&](const HistoryRow& row) {
    window += row.loss;
    ++in_window;
    if (row.iteration % log_every == 0 || row.iteration == hp.iterations) {
      ctx.out << "iter " << row.iteration << "  loss " << std::fixed << std::setprecision(5) << row.loss
              << "  window mean " << window / static_cast<double>(in_window) << '\n'
              << std::defaultfloat;
      window = 0;
      in_window = 0;
    }
  };
  hooks.checkpoint = [&](std::size_t it, const NetworkGraph<float>& n) {
    const std::string path = sibling(paths.out, ".iter" + std::to_string(it) + ".sscm");
    save_model(path, n);
    ctx.out << "checkpoint " << path << '\n';
  };
  const auto t0 = std::chrono::steady_clock::now();
  const History history = train(net, data, hp, hooks);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_model(paths.out, net);
  std::ofstream hs(paths.history);
  if (!hs) throw DataError("cannot write " + paths.history);
  write_history_csv(hs, history);
  ctx.out << "trained " << history.size() << " iterations in " << std::fixed << std::setprecision(1) << secs
          << " s\n" << std::defaultfloat << "model " << paths.out << "\nhistory " << paths.history << '\n';
  return kOk;
}

// eval ------------------------------------------------------------------

inline int cmd_eval(Context& ctx, const std::string& model, const std::string& data, const std::string& report) {
  ctx.log_settings();
  const NetworkGraph<float> net = load_model<float>(model);
  const DatasetInfo info = read_manifest(data);
  if (!(net.config.grid == info.grid.dims)) {
    throw DataError("model grid " + net.config.grid.str() + " does not match dataset grid " + info.grid.dims.str());
  }
  const auto examples =
      make_examples<float>(load_encoded_dataset(data, info, tau_of(ctx.settings)), net.variant, LossMask::kObserved);
  const EvalReport r = evaluate_dataset(net, examples, info.labels);
  ctx.out << "model " << model << " (" << variant_name(net.variant) << ") on " << examples.size() << " samples\n";
  print_report(ctx.out, r);
  if (!report.empty()) {
    std::ofstream os(report);
    if (!os) throw DataError("cannot write " + report);
    write_report_csv(os, r);
  }
  if (!r.defined()) {
    ctx.out << "a headline metric is undefined\n";
    return kNumerical;
  }
  return kOk;
}

// predict ---------------------------------------------------------------

struct PredictPaths {
  std::string model, rgb, depth, intrinsics, pose, out, ply, variant;
};

inline int cmd_predict(Context& ctx, const PredictPaths& p) {
  const Config& s = ctx.settings;
  ctx.log_settings();
  if (p.intrinsics.empty()) throw DataError("predict needs --intrinsics");
  const NetworkGraph<float> net = load_model<float>(p.model);
  if (!p.variant.empty() && parse_variant(p.variant) != net.variant) {
    throw UsageError("--variant " + p.variant + " but the model is '" + variant_name(net.variant) + "'");
  }
  const bool wants_rgb = net.variant != Variant::kDepth;
  if (wants_rgb && p.rgb.empty()) throw DataError(std::string(variant_name(net.variant)) + " model needs --rgb");
  const CameraIntrinsics K = load_intrinsics(p.intrinsics);
  const Pose pose = p.pose.empty() ? Pose::identity() : load_pose(p.pose);
  VoxelGrid grid = read_grid(s);
  grid.dims = net.config.grid;
  const double max_range = s.real("max_range");

  // Depth fixes visibility for every variant; colour-only still needs it to
  // place the pixels.
  const DepthMap depth = load_depth(p.depth);
  if (depth.width != K.width || depth.height != K.height) throw DataError("depth map does not match the intrinsics");
  const VisibilityVolume vis = classify_visibility(depth, K, pose, grid, max_range);
  EncodedSample e;
  e.id = "input";
  e.ftsdf = ftsdf_encode<float>(vis, tau_of(s));
  if (wants_rgb) {
    const RgbImage rgb = read_rgb_png(p.rgb);
    e.colour = colour_encode<float>(rgb, depth, K, pose, grid, vis, max_range).volume;
  }
  const LabelVolume labels = predict(net, network_input<float>(e, net.variant));
  save_labels(p.out, labels);
  const std::size_t factor = grid.dims.d / labels.dims.d;
  ctx.out << "wrote " << p.out << " (" << labels.dims.str() << ", " << occupied_count(labels) << " occupied)\n";
  if (!p.ply.empty()) {
    save_ply(p.ply, labels, grid.coarsened(factor));
    ctx.out << "wrote " << p.ply << '\n';
  }
  return kOk;
}

// verify ----------------------------------------------------------------

/// Prints one PASS/FAIL line per check.
inline int cmd_verify_checks(std::ostream& out, const std::vector<testing::CheckResult>& checks) {
  bool ok = true;
  for (const auto& r : checks) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " [" << std::fixed
        << std::setprecision(1) << r.seconds << " s]\n" << std::defaultfloat;
    ok = ok && r.passed;
  }
  return ok ? kOk : kNumerical;
}

inline int cmd_verify(Context& ctx, const testing::VerifyHooks& hooks = {}) {
  ctx.log_settings();
  return cmd_verify_checks(ctx.out, testing::run_verify(hooks));
}

// dispatch --------------------------------------------------------------

/// Runs one command. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const testing::VerifyHooks& hooks = {}) {
  CLI::App app{"Semantic scene completion from RGB-D volumes"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value settings file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override one setting, key=value (repeatable)");
  };
  Config flags;
  auto setting = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(flag, [&flags, key](const std::string& v) { flags.set(key, v); }, help);
  };

  std::string out_dir, data, model, report;
  TrainPaths tp;
  PredictPaths pp;

  CLI::App* synth = app.add_subcommand("synth", "render a synthetic dataset");
  common(synth);
  synth->add_option("--out", out_dir, "dataset directory")->required();
  setting(synth, "--seed", "seed", "dataset seed");
  setting(synth, "--count", "count", "number of samples");

  CLI::App* encode = app.add_subcommand("encode", "write fTSDF and colour volumes for a dataset");
  common(encode);
  encode->add_option("--data", data, "dataset directory")->required();

  CLI::App* trn = app.add_subcommand("train", "train a network");
  common(trn);
  trn->add_option("--data", tp.data, "dataset directory")->required();
  trn->add_option("--out", tp.out, "model file to write")->required();
  trn->add_option("--donor", tp.donor, "trained depth model for transfer strategies");
  trn->add_option("--history", tp.history, "history CSV (default: next to the model)");
  for (const auto& [flag, key] : std::vector<std::pair<std::string, std::string>>{
           {"--variant", "variant"}, {"--strategy", "strategy"}, {"--width", "width"}, {"--seed", "seed"},
           {"--lr", "lr"}, {"--momentum", "momentum"}, {"--iterations", "iterations"}, {"--batch", "batch"},
           {"--loss-mask", "loss_mask"}, {"--checkpoint-every", "checkpoint_every"}})
    setting(trn, flag, key, key);

  CLI::App* ev = app.add_subcommand("eval", "evaluate a model on a dataset");
  common(ev);
  ev->add_option("--model", model, "model file")->required();
  ev->add_option("--data", data, "dataset directory")->required();
  ev->add_option("--report", report, "CSV report to write");

  CLI::App* pred = app.add_subcommand("predict", "label one RGB-D frame");
  common(pred);
  pred->add_option("--model", pp.model, "model file")->required();
  pred->add_option("--depth", pp.depth, "depth map: 16-bit PNG in mm or VXT1 in metres")->required();
  pred->add_option("--rgb", pp.rgb, "8-bit RGB PNG (unused by depth models)");
  pred->add_option("--intrinsics", pp.intrinsics, "camera intrinsics file");
  pred->add_option("--pose", pp.pose, "camera-to-world pose file (default identity)");
  pred->add_option("--variant", pp.variant, "expected model variant");
  pred->add_option("--out", pp.out, "label volume to write (VXT1)")->required();
  pred->add_option("--ply", pp.ply, "also write a coloured point PLY");

  CLI::App* ver = app.add_subcommand("verify", "run gradient checks and oracle comparisons");
  common(ver);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  Context ctx{out};
  try {
    if (!config_path.empty()) ctx.settings.merge(Config::load(config_path));
    for (const auto& kv : sets) {
      std::istringstream is(kv);
      ctx.settings.merge(Config::parse(is, "--set"));
    }
    ctx.settings.merge(flags);
    ctx.settings.require_known(known_settings());
    check_setting_types(ctx.settings);

    if (*synth) return cmd_synth(ctx, out_dir);
    if (*encode) return cmd_encode(ctx, data);
    if (*trn) return cmd_train(ctx, tp);
    if (*ev) return cmd_eval(ctx, model, data, report);
    if (*pred) return cmd_predict(ctx, pp);
    if (*ver) return cmd_verify(ctx, hooks);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace ssc::cli
