#include "terraclass/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

#include "terraclass/evaluate.hpp"
#include "terraclass/parallel.hpp"
#include "seed_stream.hpp"

namespace terraclass {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  std::string out(s.substr(b, e - b + 1));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

double parse_radius(std::string_view s) {
  double r = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), r);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("invalid color radius '" + std::string(s) + "'");
  return r;
}

void normalize_radii(std::vector<double>& radii) {
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
}

std::string join_radii(const std::vector<double>& radii) {
  std::string out;
  for (double r : radii) out += (out.empty() ? "" : ",") + radius_tag(r);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- FeatureSetSpec

FeatureSetSpec FeatureSetSpec::parse(std::string_view text, std::span<const double> all_radii) {
  FeatureSetSpec spec;
  std::size_t b = 0;
  while (b <= text.size()) {
    std::size_t e = text.find('+', b);
    if (e == std::string_view::npos) e = text.size();
    const std::string part = trim(text.substr(b, e - b));
    if (part == "g") {
      spec.geometry = true;
    } else if (part == "cp") {
      spec.point_color = true;
    } else if (part == "cn") {
      spec.radii.insert(spec.radii.end(), all_radii.begin(), all_radii.end());
    } else if (part.rfind("cn:", 0) == 0) {
      spec.radii.push_back(parse_radius(std::string_view(part).substr(3)));
    } else if (part == "all") {
      spec.geometry = spec.point_color = true;
      spec.radii.insert(spec.radii.end(), all_radii.begin(), all_radii.end());
    } else {
      throw std::invalid_argument("unknown feature set '" + part + "' (expected g, cp, cn:R or all)");
    }
    b = e + 1;
  }
  normalize_radii(spec.radii);
  if (spec.empty()) throw std::invalid_argument("empty feature set");
  return spec;
}

FeatureSetSpec FeatureSetSpec::all(std::span<const double> radii) {
  FeatureSetSpec spec{true, true, std::vector<double>(radii.begin(), radii.end())};
  normalize_radii(spec.radii);
  return spec;
}

FeatureSetSpec FeatureSetSpec::from_columns(const std::vector<std::string>& columns, std::size_t* n_levels) {
  FeatureSetSpec spec;
  std::size_t levels = 0;
  for (const auto& c : columns) {
    const auto at = c.find('@');
    if (at == std::string::npos) {
      if (c == "h" || c == "s" || c == "v") {
        spec.point_color = true;
        continue;
      }
      throw std::invalid_argument("unrecognized feature column '" + c + "'");
    }
    const std::string_view tag = std::string_view(c).substr(at + 1);
    if (tag.size() > 1 && tag[0] == 's') {
      std::size_t level = 0;
      auto res = std::from_chars(tag.data() + 1, tag.data() + tag.size(), level);
      if (res.ec != std::errc() || res.ptr != tag.data() + tag.size())
        throw std::invalid_argument("unrecognized feature column '" + c + "'");
      spec.geometry = true;
      levels = std::max(levels, level + 1);
    } else if (tag.size() > 1 && tag[0] == 'r') {
      spec.radii.push_back(parse_radius(tag.substr(1)));
    } else {
      throw std::invalid_argument("unrecognized feature column '" + c + "'");
    }
  }
  normalize_radii(spec.radii);
  const auto expected = spec.columns(levels);
  if (std::set<std::string>(expected.begin(), expected.end()) != std::set<std::string>(columns.begin(), columns.end()) ||
      expected.size() != columns.size())
    throw std::invalid_argument("feature columns do not form a complete feature set");
  if (n_levels) *n_levels = levels;
  return spec;
}

std::string FeatureSetSpec::to_string() const {
  std::string out;
  auto add = [&](const std::string& s) { out += (out.empty() ? "" : "+") + s; };
  if (geometry) add("g");
  if (point_color) add("cp");
  for (double r : radii) add("cn:" + radius_tag(r));
  return out;
}

FeatureSetSpec FeatureSetSpec::unite(const FeatureSetSpec& other) const {
  FeatureSetSpec u{geometry || other.geometry, point_color || other.point_color, radii};
  u.radii.insert(u.radii.end(), other.radii.begin(), other.radii.end());
  normalize_radii(u.radii);
  return u;
}

std::vector<std::string> FeatureSetSpec::columns(std::size_t n_levels) const {
  std::vector<std::string> out;
  if (geometry) out = geom_column_names(n_levels);
  for (auto& c : color_column_names(point_color, radii)) out.push_back(std::move(c));
  return out;
}

// ---------------------------------------------------------------- PipelineConfig

void PipelineConfig::validate() const {
  if (!(gsd > 0.0) || !std::isfinite(gsd)) throw std::invalid_argument("gsd must be positive");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (n_levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (!(level_factor > 1.0) || !std::isfinite(level_factor)) throw std::invalid_argument("level factor must be > 1");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw std::invalid_argument("color radii must be positive and ascending");
  if (features.empty()) throw std::invalid_argument("empty feature set");
  for (std::size_t i = 0; i < features.radii.size(); ++i)
    if (!(features.radii[i] > 0.0) || (i > 0 && !(features.radii[i] > features.radii[i - 1])))
      throw std::invalid_argument("feature-set radii must be positive and ascending");
  if (per_class < 1) throw std::invalid_argument("per-class sample size must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  train.validate();
}

TrainConfig PipelineConfig::effective_train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  t.threads = threads;
  t.n_classes = kNumClasses;
  return t;
}

std::string PipelineConfig::describe() const {
  const TrainConfig t = effective_train_config();
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    if (!out.empty()) out += ' ';
    out += key;
    out += '=';
    out += value;
  };
  auto num = [](double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  kv("gsd", num(gsd));
  kv("k", std::to_string(k));
  kv("levels", std::to_string(n_levels));
  kv("level_factor", num(level_factor));
  kv("radii", join_radii(radii));
  kv("features", features.to_string());
  kv("classifier", std::string(model_kind_name(classifier)));
  kv("trees", std::to_string(t.n_trees));
  kv("rf_max_depth", std::to_string(t.rf_max_depth));
  kv("rf_feature_fraction", num(t.rf_feature_fraction));
  kv("rf_bootstrap", t.rf_bootstrap ? "1" : "0");
  kv("gbt_max_leaves", std::to_string(t.gbt_max_leaves));
  kv("gbt_learning_rate", num(t.gbt_learning_rate));
  kv("gbt_bagging_fraction", num(t.gbt_bagging_fraction));
  kv("gbt_feature_fraction", num(t.gbt_feature_fraction));
  kv("gbt_lambda", num(t.gbt_lambda));
  kv("min_samples_leaf", std::to_string(t.min_samples_leaf));
  kv("per_class", std::to_string(per_class));
  kv("batch_size", std::to_string(batch_size));
  kv("threads", std::to_string(threads));
  kv("seed", std::to_string(seed));
  return out;
}

// ---------------------------------------------------------------- extraction

FeatureExtractor::FeatureExtractor(const PointCloud& cloud, const PipelineConfig& config)
    : cloud_(cloud), config_(config), columns_(config.columns()) {
  config_.validate();
  if (cloud.empty()) throw std::invalid_argument("cannot extract features from an empty cloud");
  if (config_.features.needs_color() && !cloud.has_color())
    throw std::invalid_argument("feature set '" + config_.features.to_string() + "' needs color but the cloud has none");
  if (config_.features.geometry)
    pyramid_ = std::make_unique<ScalePyramid>(cloud, base_scale(config_.gsd), config_.n_levels, config_.level_factor,
                                              config_.threads);
  if (!config_.features.radii.empty()) color_ = std::make_unique<ColorField>(cloud);
}

void FeatureExtractor::fill_row(std::size_t point, std::span<float> out, std::vector<double>& scratch) const {
  const Point& p = cloud_[point];
  std::size_t col = 0;
  if (pyramid_) {
    const std::size_t n = kGeomFeatureCount * pyramid_->size();
    scratch.resize(n);
    features_multiscale(p.pos, *pyramid_, config_.k, scratch);
    for (std::size_t i = 0; i < n; ++i) out[col++] = static_cast<float>(scratch[i]);
  }
  if (config_.features.needs_color()) {
    const auto& radii = config_.features.radii;
    const std::size_t n = 3 + 3 * radii.size();
    scratch.resize(n);
    color_feature_block(p, color_.get(), radii, scratch);
    for (std::size_t i = config_.features.point_color ? 0 : 3; i < n; ++i) out[col++] = static_cast<float>(scratch[i]);
  }
}

FeatureMatrix FeatureExtractor::extract(std::span<const std::size_t> rows) const {
  for (std::size_t r : rows)
    if (r >= cloud_.size()) throw std::out_of_range("point index " + std::to_string(r) + " out of range");
  FeatureMatrix m(columns_, rows.size(), config_.features.to_string());
  parallel_for(rows.size(), config_.threads, 256, [&](std::size_t b, std::size_t e) {
    std::vector<double> scratch;
    for (std::size_t i = b; i < e; ++i) fill_row(rows[i], m.row(i), scratch);
  });
  return m;
}

FeatureMatrix FeatureExtractor::extract_range(std::size_t begin, std::size_t end) const {
  if (begin > end || end > cloud_.size()) throw std::out_of_range("point range out of bounds");
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return extract(rows);
}

FeatureMatrix extract_features(const PointCloud& cloud, const PipelineConfig& config,
                               std::optional<std::span<const std::size_t>> rows) {
  FeatureExtractor fx(cloud, config);
  return rows ? fx.extract(*rows) : fx.extract_range(0, cloud.size());
}

// ---------------------------------------------------------------- training / prediction

TrainResult run_train(std::span<const PointCloud* const> clouds, const PipelineConfig& config) {
  config.validate();
  if (clouds.empty()) throw std::invalid_argument("no training clouds");
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    if (!clouds[i]->has_labels()) throw std::invalid_argument("training cloud " + std::to_string(i) + " is unlabeled");
    if (config.features.needs_color() && !clouds[i]->has_color())
      throw std::invalid_argument("training cloud " + std::to_string(i) + " has no color but feature set '" +
                                  config.features.to_string() + "' needs it");
  }

  TrainResult result;
  result.timing.threads = config.threads;
  FeatureMatrix pooled(config.columns(), 0, config.features.to_string());
  std::vector<Label> labels;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const PointCloud& cloud = *clouds[i];
    SampleResult sample = balanced_sample(cloud, config.per_class, detail::stream_seed(config.seed, 0x53414D50, i));
    for (auto& w : sample.warnings) result.warnings.push_back("cloud " + std::to_string(i) + ": " + w);
    for (std::size_t c = 0; c < kNumClasses; ++c) result.sampled[c] += sample.per_class[c];
    FeatureExtractor fx(cloud, config);
    pooled.append(fx.extract(sample.indices));
    for (std::size_t idx : sample.indices) labels.push_back(cloud[idx].label);
    result.timing.points += cloud.size();
  }
  result.timing.feature_s = seconds_since(t0);
  result.timing.rows = pooled.rows();

  const auto t1 = std::chrono::steady_clock::now();
  result.model = train(config.classifier, pooled, labels, config.effective_train_config());
  result.timing.train_s = seconds_since(t1);
  return result;
}

TrainResult run_train(const PointCloud& cloud, const PipelineConfig& config) {
  const PointCloud* clouds[] = {&cloud};
  return run_train(clouds, config);
}

PredictResult run_predict(const Ensemble& model, const PointCloud& cloud, const PipelineConfig& config,
                          bool keep_probabilities) {
  config.validate();
  const auto expected = config.columns();
  if (std::set<std::string>(expected.begin(), expected.end()) !=
      std::set<std::string>(model.columns.begin(), model.columns.end())) {
    throw std::invalid_argument("model manifest (" + std::to_string(model.columns.size()) +
                                " columns) does not match feature set '" + config.features.to_string() + "' (" +
                                std::to_string(expected.size()) + " columns)");
  }

  PredictResult result;
  result.timing.threads = config.threads;
  result.timing.points = cloud.size();
  result.timing.rows = cloud.size();
  result.cloud = cloud;
  result.cloud.set_has_labels(true);
  if (keep_probabilities) result.probabilities.resize(cloud.size() * model.n_classes);
  if (cloud.empty()) return result;

  auto t0 = std::chrono::steady_clock::now();
  FeatureExtractor fx(cloud, config);
  result.timing.feature_s += seconds_since(t0);
  for (std::size_t b = 0; b < cloud.size(); b += config.batch_size) {
    const std::size_t e = std::min(cloud.size(), b + config.batch_size);
    t0 = std::chrono::steady_clock::now();
    const FeatureMatrix batch = fx.extract_range(b, e);
    result.timing.feature_s += seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const Prediction p = model.predict(batch, config.threads);
    for (std::size_t i = 0; i < p.labels.size(); ++i) result.cloud.set_label(b + i, p.labels[i]);
    if (keep_probabilities)
      std::transform(p.probabilities.begin(), p.probabilities.end(),
                     result.probabilities.begin() + static_cast<std::ptrdiff_t>(b * model.n_classes),
                     [](double v) { return static_cast<float>(v); });
    result.timing.predict_s += seconds_since(t0);
  }
  return result;
}

}  // namespace terraclass
