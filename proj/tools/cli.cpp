#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "terraclass/cloudio.hpp"
#include "terraclass/ensemble.hpp"
#include "terraclass/error.hpp"
#include "terraclass/evaluate.hpp"
#include "terraclass/feature_matrix.hpp"
#include "terraclass/parallel.hpp"
#include "terraclass/pipeline.hpp"
#include "terraclass/scene.hpp"

namespace terraclass {
namespace {

namespace fs = std::filesystem;

// Raised for bad flag values found after CLI11 has parsed the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log(std::string_view level, const std::string& msg) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char ts[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
  std::cerr << ts << " terraclass " << level << ": " << msg << '\n';
}

void info(const std::string& msg) { log("info", msg); }
void warn(const std::string& msg) { log("warn", msg); }

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string closest(std::string_view word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best_d <= std::max<std::size_t>(2, word.size() / 3) ? best : std::string{};
}

CloudFormat output_format(const fs::path& path, const std::string& requested) {
  if (!requested.empty()) {
    auto f = format_from_name(requested);
    if (!f) throw UsageError("unknown cloud format '" + requested + "' (expected ply, ply_ascii or xyz)");
    return *f;
  }
  const auto ext = path.extension().string();
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::xyzrgb_text;
  return CloudFormat::ply_binary_le;
}

// Flags shared by every stage that computes features.
struct FeatureFlags {
  double gsd = kDefaultGsd;
  std::size_t k = kDefaultNeighbors;
  std::size_t levels = kDefaultLevels;
  std::vector<double> radii = kDefaultColorRadii;
  std::string features = "all";
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::size_t batch = 1u << 16;
};

struct TrainFlags {
  std::string classifier = "gbt";
  std::size_t trees = 100;
  std::size_t max_depth = 30;
  std::size_t max_leaves = 16;
  double learning_rate = 0.2;
  double bagging = 0.5;
  double feature_fraction = 0.5;
  std::size_t per_class = 10000;
};

void add_feature_flags(CLI::App* app, FeatureFlags& f, bool with_feature_set = true) {
  app->add_option("--gsd", f.gsd, "Ground sampling distance in m/px; the finest voxel is 4x this")
      ->capture_default_str();
  app->add_option("-k,--k", f.k, "Neighbors per scale for the eigen features")->capture_default_str();
  app->add_option("--levels", f.levels, "Pyramid levels, each twice the voxel size of the previous")
      ->capture_default_str();
  app->add_option("--radii", f.radii, "Neighborhood color radii in meters (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  if (with_feature_set)
    app->add_option("--features", f.features, "Feature set: g, cp, cn:R, all, or a '+' combination like g+cn:0.6")
        ->capture_default_str();
  app->add_option("--threads", f.threads, "Worker threads (default: TERRACLASS_THREADS or logical cores)");
  app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  app->add_option("--batch", f.batch, "Points per feature batch during prediction")->capture_default_str();
}

void add_train_flags(CLI::App* app, TrainFlags& t) {
  app->add_option("--classifier", t.classifier, "rf or gbt")->capture_default_str()->check(CLI::IsMember({"rf", "gbt"}));
  app->add_option("--trees", t.trees, "RF trees or GBT iterations")->capture_default_str();
  app->add_option("--max-depth", t.max_depth, "RF maximum tree depth")->capture_default_str();
  app->add_option("--max-leaves", t.max_leaves, "GBT leaves per tree")->capture_default_str();
  app->add_option("--learning-rate", t.learning_rate, "GBT shrinkage")->capture_default_str();
  app->add_option("--bagging", t.bagging, "GBT row fraction per iteration")->capture_default_str();
  app->add_option("--feature-fraction", t.feature_fraction, "Fraction of columns tried at each split")
      ->capture_default_str();
  app->add_option("--per-class", t.per_class, "Balanced training points per class and cloud")->capture_default_str();
}

PipelineConfig make_config(const FeatureFlags& f, const TrainFlags* t) {
  PipelineConfig c;
  c.gsd = f.gsd;
  c.k = f.k;
  c.n_levels = f.levels;
  c.radii = f.radii;
  std::sort(c.radii.begin(), c.radii.end());
  try {
    c.features = FeatureSetSpec::parse(f.features, c.radii);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.threads = f.threads ? f.threads : default_thread_count();
  c.seed = f.seed;
  c.batch_size = f.batch;
  if (t) {
    c.classifier = model_kind_from_name(t->classifier);
    c.train.n_trees = t->trees;
    c.train.rf_max_depth = t->max_depth;
    c.train.gbt_max_leaves = t->max_leaves;
    c.train.gbt_learning_rate = t->learning_rate;
    c.train.gbt_bagging_fraction = t->bagging;
    c.train.rf_feature_fraction = t->feature_fraction;
    c.train.gbt_feature_fraction = t->feature_fraction;
    c.per_class = t->per_class;
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::string join(const std::vector<std::string>& v, std::string_view sep = ",") {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : std::string(sep)) + s;
  return out;
}

std::string class_summary(const PointCloud& cloud) {
  const auto counts = class_counts(cloud);
  std::string out;
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out += (c ? " " : "") + std::string(class_name(static_cast<Label>(c))) + "=" + std::to_string(counts[c]);
  out += " unlabeled=" + std::to_string(counts[kNumClasses]);
  return out;
}

std::string timing_summary(const TimingReport& t) {
  return "features=" + num(t.feature_s) + "s train=" + num(t.train_s) + "s predict=" + num(t.predict_s) +
         "s total=" + num(t.total()) + "s points=" + std::to_string(t.points) + " rows=" + std::to_string(t.rows) +
         " threads=" + std::to_string(t.threads);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- stages

struct SynthArgs {
  std::string recipe;
  std::uint64_t seed = 0;
  double extent = 60.0;
  std::string output;
  std::string format;
};

int run_synth(const SynthArgs& a) {
  info("config command=synth recipe=" + a.recipe + " seed=" + std::to_string(a.seed) + " extent=" + num(a.extent) +
       " output=" + a.output + " format=" + (a.format.empty() ? "auto" : a.format));
  const CloudFormat fmt = output_format(a.output, a.format);
  SceneRecipe recipe;
  if (fs::exists(a.recipe)) {
    recipe = load_recipe(a.recipe, a.seed);
  } else {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), a.recipe) == names.end())
      throw UsageError("recipe '" + a.recipe + "' is neither a file nor a preset (" + join(names) + ")");
    recipe = preset_recipe(a.recipe, a.seed, a.extent);
  }
  const PointCloud cloud = synth_scene(recipe, a.seed);
  write_cloud(cloud, a.output, fmt);
  info("wrote " + std::to_string(cloud.size()) + " points to " + a.output + " (" + class_summary(cloud) + ")");
  return 0;
}

struct SplitArgs {
  std::string input;
  std::size_t angles = kDefaultSplitAngles;
  std::size_t offsets = kDefaultSplitOffsets;
  std::vector<std::string> outputs;
  std::string format;
  unsigned threads = 0;
};

int run_split(const SplitArgs& a) {
  const unsigned threads = a.threads ? a.threads : default_thread_count();
  info("config command=split input=" + a.input + " angles=" + std::to_string(a.angles) +
       " offsets=" + std::to_string(a.offsets) + " outputs=" + join(a.outputs) + " threads=" + std::to_string(threads));
  if (a.angles < 1 || a.offsets < 1) throw UsageError("--angles and --offsets must be >= 1");
  const PointCloud cloud = read_cloud(a.input);
  if (!cloud.has_labels()) throw Error("'" + a.input + "' carries no labels; the split needs them");
  const SplitSearchResult best = find_split_plane(cloud, a.angles, a.offsets, threads);
  auto [pos, neg] = split_cloud(cloud, best.plane);
  info("plane theta=" + num(best.plane.theta) + " offset=" + num(best.plane.offset) +
       " objective=" + num(best.objective) + " positive=" + std::to_string(pos.size()) +
       " negative=" + std::to_string(neg.size()));
  if (pos.empty() || neg.empty())
    throw Error("no candidate plane splits every class; one side would be empty (objective " + num(best.objective) + ")");
  write_cloud(pos, a.outputs[0], output_format(a.outputs[0], a.format));
  write_cloud(neg, a.outputs[1], output_format(a.outputs[1], a.format));
  return 0;
}

struct ExtractArgs {
  std::string input;
  std::string output;
  FeatureFlags f;
};

int run_extract(const ExtractArgs& a) {
  const PipelineConfig c = make_config(a.f, nullptr);
  info("config command=extract input=" + a.input + " output=" + a.output + " " + c.describe());
  const PointCloud cloud = read_cloud(a.input);
  const auto t0 = std::chrono::steady_clock::now();
  const FeatureMatrix m = extract_features(cloud, c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_feature_matrix(m, a.output);
  info("wrote " + std::to_string(m.rows()) + " x " + std::to_string(m.cols()) + " features to " + a.output + " in " +
       num(secs) + "s");
  return 0;
}

struct TrainArgs {
  std::vector<std::string> inputs;
  std::string output;
  FeatureFlags f;
  TrainFlags t;
};

int run_train_cmd(const TrainArgs& a) {
  const PipelineConfig c = make_config(a.f, &a.t);
  info("config command=train inputs=" + join(a.inputs) + " output=" + a.output + " " + c.describe());
  std::vector<PointCloud> clouds;
  for (const auto& in : a.inputs) clouds.push_back(read_cloud(in));
  std::vector<const PointCloud*> ptrs;
  for (const auto& cl : clouds) ptrs.push_back(&cl);
  const TrainResult r = run_train(ptrs, c);
  for (const auto& w : r.warnings) warn(w);
  std::string sampled;
  for (std::size_t k = 0; k < kNumClasses; ++k)
    sampled += (k ? " " : "") + std::string(class_name(static_cast<Label>(k))) + "=" + std::to_string(r.sampled[k]);
  info("sampled " + sampled);
  save_model(r.model, a.output);
  info("saved " + std::string(model_kind_name(r.model.kind)) + " model with " + std::to_string(r.model.trees.size()) +
       " trees to " + a.output + "; " + timing_summary(r.timing));
  return 0;
}

// Feature set of a saved model; --features/--levels given on the command
// line must agree with it.
PipelineConfig predict_config(const Ensemble& model, FeatureFlags f, bool features_given, bool levels_given) {
  std::size_t levels = 0;
  FeatureSetSpec spec;
  try {
    spec = FeatureSetSpec::from_columns(model.columns, &levels);
  } catch (const std::invalid_argument& e) {
    throw Error(std::string("model manifest: ") + e.what());
  }
  if (spec.geometry) {
    if (levels_given && f.levels != levels)
      throw UsageError("--levels " + std::to_string(f.levels) + " conflicts with the model's " + std::to_string(levels) +
                       " levels");
    f.levels = levels;
  }
  if (!features_given) f.features = spec.to_string();
  PipelineConfig c = make_config(f, nullptr);
  c.classifier = model.kind;
  if (!(c.features == spec))
    throw UsageError("--features " + f.features + " does not match the model's feature set " + spec.to_string());
  return c;
}

struct PredictArgs {
  std::string model;
  std::string input;
  std::string output;
  std::string probabilities;
  std::string format;
  bool colorize = false;
  FeatureFlags f;
  bool features_given = false;
  bool levels_given = false;
};

void write_probabilities(const fs::path& path, const std::vector<float>& p, std::size_t n_classes) {
  std::string out = "#";
  for (std::size_t c = 0; c < n_classes; ++c)
    out += ' ' + (c < kNumClasses ? std::string(class_name(static_cast<Label>(c))) : "class" + std::to_string(c));
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r * n_classes < p.size(); ++r) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      auto res = std::to_chars(buf, buf + sizeof buf, p[r * n_classes + c]);
      if (c) out += ' ';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  write_text(path, out);
}

int run_predict_cmd(const PredictArgs& a) {
  const Ensemble model = load_model(a.model);
  const PipelineConfig c = predict_config(model, a.f, a.features_given, a.levels_given);
  info("config command=predict model=" + a.model + " input=" + a.input + " output=" + a.output +
       " probabilities=" + (a.probabilities.empty() ? "none" : a.probabilities) +
       " colorize=" + (a.colorize ? "1" : "0") + " " + c.describe());
  const CloudFormat fmt = output_format(a.output, a.format);
  const PointCloud cloud = read_cloud(a.input);
  const PredictResult r = run_predict(model, cloud, c, !a.probabilities.empty());
  write_cloud(r.cloud, a.output, fmt, WriteOptions{a.colorize});
  if (!a.probabilities.empty()) write_probabilities(a.probabilities, r.probabilities, model.n_classes);
  info("labeled " + std::to_string(r.cloud.size()) + " points (" + class_summary(r.cloud) + "); " +
       timing_summary(r.timing));
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string input;
  std::string output;
  FeatureFlags f;
};

int run_evaluate_cmd(const EvaluateArgs& a) {
  const Ensemble model = load_model(a.model);
  const PipelineConfig c = predict_config(model, a.f, false, false);
  info("config command=evaluate model=" + a.model + " input=" + a.input +
       " output=" + (a.output.empty() ? "stdout" : a.output) + " " + c.describe());
  const PointCloud cloud = read_cloud(a.input);
  const auto t0 = std::chrono::steady_clock::now();
  const EvaluationResult r = evaluate_model(model, cloud, c);
  Report report;
  report.test_set = a.input;
  ReportRow row;
  row.feature_set = c.features.to_string();
  row.classifier = std::string(model_kind_name(model.kind));
  row.confusion = r.confusion;
  row.overall_error = r.confusion.overall_error();
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.rows.push_back(row);
  const std::string text = format_report(report);
  if (a.output.empty())
    std::cout << text;
  else
    write_text(a.output, text);
  info("overall_error=" + num(row.overall_error) + " points=" + std::to_string(r.confusion.total()));
  return 0;
}

struct AblateArgs {
  std::vector<std::string> train;
  std::string test;
  std::vector<std::string> feature_sets = {"g", "g+cn:0.6", "all"};
  std::vector<std::string> classifiers = {"rf", "gbt"};
  std::string output;
  FeatureFlags f;
  TrainFlags t;
};

int run_ablate_cmd(const AblateArgs& a) {
  const PipelineConfig c = make_config(a.f, &a.t);
  std::vector<FeatureSetSpec> sets;
  std::vector<ModelKind> kinds;
  try {
    for (const auto& s : a.feature_sets) sets.push_back(FeatureSetSpec::parse(s, c.radii));
    for (const auto& k : a.classifiers) kinds.push_back(model_kind_from_name(k));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  info("config command=ablate train=" + join(a.train) + " test=" + a.test + " feature_sets=" + join(a.feature_sets) +
       " classifiers=" + join(a.classifiers) + " output=" + (a.output.empty() ? "stdout" : a.output) + " " +
       c.describe());
  std::vector<PointCloud> clouds;
  for (const auto& in : a.train) clouds.push_back(read_cloud(in));
  const PointCloud test = read_cloud(a.test);
  std::vector<NamedCloud> named;
  for (std::size_t i = 0; i < clouds.size(); ++i) named.push_back({a.train[i], &clouds[i]});
  const Report report = ablation_run(named, {a.test, &test}, sets, kinds, c);
  const std::string text = format_report(report);
  if (a.output.empty())
    std::cout << text;
  else
    write_text(a.output, text);
  for (const auto& r : report.rows)
    info(r.feature_set + " " + r.classifier + " overall_error=" + num(r.overall_error) + " wall_time_s=" +
         num(r.wall_time_s));
  return 0;
}

// Flags in argv that no option of the chosen subcommand accepts, reported
// with the closest known spelling.
std::optional<std::string> unknown_flag(CLI::App& app, int argc, char** argv) {
  CLI::App* sub = nullptr;
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a.empty() || a[0] == '-') continue;
    sub = app.get_subcommand_no_throw(std::string(a));
    if (!sub) {
      std::vector<std::string> names;
      for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; })) names.push_back(s->get_name());
      const auto hint = closest(a, names);
      return "unknown command '" + std::string(a) + "'" + (hint.empty() ? "" : "; did you mean '" + hint + "'?");
    }
    break;
  }
  std::vector<std::string> known;
  auto collect = [&](const CLI::App& a) {
    for (const auto* o : a.get_options())
      for (const auto& n : o->get_lnames()) known.push_back("--" + n);
  };
  collect(app);
  if (sub) collect(*sub);
  for (int i = 1; i < argc; ++i) {
    std::string_view a = argv[i];
    if (a.size() < 3 || a.substr(0, 2) != "--") continue;
    const std::string name(a.substr(0, a.find('=')));
    if (std::find(known.begin(), known.end(), name) != known.end()) continue;
    const auto hint = closest(name, known);
    return "unknown option '" + name + "'" + (hint.empty() ? "" : "; did you mean '" + hint + "'?");
  }
  return std::nullopt;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"terraclass: semantic classification of colored point clouds"};
  app.name("terraclass");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a labeled synthetic scene");
  s->add_option("--recipe", synth.recipe, "Scene recipe JSON file or preset name (demo, ankeny, buildings, cadastre)")
      ->required();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--extent", synth.extent, "Side length of preset scenes in meters")->capture_default_str();
  s->add_option("-o,--output", synth.output, "Output cloud (.ply or .xyz)")->required();
  s->add_option("--format", synth.format, "ply, ply_ascii or xyz (default from extension)");

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "Cut a labeled cloud by the vertical plane that best halves every class");
  sp->add_option("input", split.input, "Labeled input cloud")->required();
  sp->add_option("--angles", split.angles, "Plane orientations over [0, pi)")->capture_default_str();
  sp->add_option("--offsets", split.offsets, "Plane offsets across the projected extent")->capture_default_str();
  sp->add_option("-o,--output", split.outputs, "Positive-side and negative-side output clouds")
      ->required()
      ->expected(2);
  sp->add_option("--format", split.format, "ply, ply_ascii or xyz (default from extension)");
  sp->add_option("--threads", split.threads, "Worker threads (default: TERRACLASS_THREADS or logical cores)");

  ExtractArgs extract;
  auto* ex = app.add_subcommand("extract", "Compute a feature matrix for every point of a cloud");
  ex->add_option("input", extract.input, "Input cloud")->required();
  ex->add_option("-o,--output", extract.output, "Output feature matrix (binary TCFM)")->required();
  add_feature_flags(ex, extract.f);

  TrainArgs trainargs;
  auto* tr = app.add_subcommand("train", "Train a classifier on balanced samples of labeled clouds");
  tr->add_option("inputs", trainargs.inputs, "Labeled training clouds")->required();
  tr->add_option("-o,--output", trainargs.output, "Output model file")->required();
  add_feature_flags(tr, trainargs.f);
  add_train_flags(tr, trainargs.t);

  PredictArgs predict;
  auto* pr = app.add_subcommand("predict", "Label every point of a cloud");
  pr->add_option("model", predict.model, "Model file")->required();
  pr->add_option("input", predict.input, "Input cloud")->required();
  pr->add_option("-o,--output", predict.output, "Labeled output cloud")->required();
  pr->add_option("--probabilities", predict.probabilities, "Optional text file of per-point class probabilities");
  pr->add_option("--format", predict.format, "ply, ply_ascii or xyz (default from extension)");
  pr->add_flag("--colorize", predict.colorize, "Replace colors with the class palette");
  add_feature_flags(pr, predict.f);

  EvaluateArgs evaluate;
  auto* ev = app.add_subcommand("evaluate", "Score a model on a labeled test cloud");
  ev->add_option("model", evaluate.model, "Model file")->required();
  ev->add_option("input", evaluate.input, "Labeled test cloud")->required();
  ev->add_option("-o,--output", evaluate.output, "Report file (default stdout)");
  add_feature_flags(ev, evaluate.f, false);

  AblateArgs ablate;
  auto* ab = app.add_subcommand("ablate", "Compare feature sets and classifiers: train on some clouds, test on another");
  ab->add_option("--train", ablate.train, "Labeled training clouds")->required();
  ab->add_option("--test", ablate.test, "Labeled test cloud")->required();
  ab->add_option("--feature-sets", ablate.feature_sets, "Feature sets to compare (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  ab->add_option("--classifiers", ablate.classifiers, "Classifiers to compare (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  ab->add_option("-o,--output", ablate.output, "Report file (default stdout)");
  add_feature_flags(ab, ablate.f, false);
  add_train_flags(ab, ablate.t);

  if (auto bad = unknown_flag(app, argc, argv)) {
    std::cerr << "error: " << *bad << "\nRun with --help for usage.\n";
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (s->parsed()) return run_synth(synth);
    if (sp->parsed()) return run_split(split);
    if (ex->parsed()) return run_extract(extract);
    if (tr->parsed()) return run_train_cmd(trainargs);
    if (pr->parsed()) {
      predict.features_given = pr->count("--features") > 0;
      predict.levels_given = pr->count("--levels") > 0;
      return run_predict_cmd(predict);
    }
    if (ev->parsed()) return run_evaluate_cmd(evaluate);
    if (ab->parsed()) return run_ablate_cmd(ablate);
  } catch (const UsageError& e) {
    log("error", e.what());
    return 1;
  } catch (const Error& e) {
    log("error", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    log("error", e.what());
    return 2;
  } catch (const std::exception& e) {
    log("error", e.what());
    return 2;
  }
  return 1;
}

}  // namespace terraclass
