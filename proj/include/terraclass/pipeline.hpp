#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/colorfeat.hpp"
#include "terraclass/ensemble.hpp"
#include "terraclass/feature_matrix.hpp"
#include "terraclass/geomfeat.hpp"
#include "terraclass/pyramid.hpp"

namespace terraclass {

/// Which feature blocks to compute: geometry at every pyramid level (G),
/// the point's own HSV (Cp) and mean HSV in balls of the given radii (CN).
struct FeatureSetSpec {
  bool geometry = false;
  bool point_color = false;
  std::vector<double> radii;  // ascending

  /// Parses "g", "cp", "cn:R", "cn" (every radius in `all_radii`), "all",
  /// or a '+'-joined combination such as "g+cn:0.6".
  static FeatureSetSpec parse(std::string_view text, std::span<const double> all_radii = kDefaultColorRadii);
  static FeatureSetSpec all(std::span<const double> radii = kDefaultColorRadii);

  /// Recovers the spec and level count from a column manifest.
  static FeatureSetSpec from_columns(const std::vector<std::string>& columns, std::size_t* n_levels = nullptr);

  /// Canonical '+'-joined form, e.g. "g+cp+cn:0.4".
  std::string to_string() const;
  bool needs_color() const { return point_color || !radii.empty(); }
  bool empty() const { return !geometry && !needs_color(); }
  FeatureSetSpec unite(const FeatureSetSpec& other) const;

  /// [geom@s0..s{n-1} | h,s,v | h,s,v@r per radius], filtered by the spec.
  std::vector<std::string> columns(std::size_t n_levels) const;

  bool operator==(const FeatureSetSpec&) const = default;
};

struct PipelineConfig {
  double gsd = kDefaultGsd;
  std::size_t k = kDefaultNeighbors;
  std::size_t n_levels = kDefaultLevels;
  double level_factor = kDefaultLevelFactor;
  std::vector<double> radii = kDefaultColorRadii;
  FeatureSetSpec features = FeatureSetSpec::all();
  ModelKind classifier = ModelKind::gbt;
  TrainConfig train;
  std::size_t per_class = 10000;   // balanced training sample per class and cloud
  std::size_t batch_size = 1u << 16;
  unsigned threads = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument describing the first conflict.
  void validate() const;
  std::vector<std::string> columns() const { return features.columns(n_levels); }
  /// Training parameters with the pipeline's seed, threads and class count.
  TrainConfig effective_train_config() const;
  /// Single-line "key=value ..." echo of every setting.
  std::string describe() const;
};

struct TimingReport {
  double feature_s = 0.0;
  double train_s = 0.0;
  double predict_s = 0.0;
  std::size_t points = 0;
  std::size_t rows = 0;
  unsigned threads = 1;

  double total() const { return feature_s + train_s + predict_s; }
};

/// Pyramid and color index of one cloud, built once and shared read-only by
/// every extraction batch.
class FeatureExtractor {
 public:
  FeatureExtractor(const PointCloud& cloud, const PipelineConfig& config);

  const std::vector<std::string>& columns() const { return columns_; }
  /// Features of the listed points, one row each.
  FeatureMatrix extract(std::span<const std::size_t> rows) const;
  /// Features of points [begin, end).
  FeatureMatrix extract_range(std::size_t begin, std::size_t end) const;

 private:
  void fill_row(std::size_t point, std::span<float> out, std::vector<double>& scratch) const;

  const PointCloud& cloud_;
  PipelineConfig config_;
  std::vector<std::string> columns_;
  std::unique_ptr<ScalePyramid> pyramid_;
  std::unique_ptr<ColorField> color_;
};

/// Features of every point (or of `rows` only) of the cloud.
FeatureMatrix extract_features(const PointCloud& cloud, const PipelineConfig& config,
                               std::optional<std::span<const std::size_t>> rows = std::nullopt);

struct TrainResult {
  Ensemble model;
  TimingReport timing;
  std::array<std::size_t, kNumClasses> sampled{};  // pooled rows per class
  std::vector<std::string> warnings;
};

/// Balanced sample per cloud, pooled; features only for sampled points.
TrainResult run_train(std::span<const PointCloud* const> clouds, const PipelineConfig& config);
TrainResult run_train(const PointCloud& cloud, const PipelineConfig& config);

struct PredictResult {
  PointCloud cloud;                  // input with labels replaced
  std::vector<float> probabilities;  // points x classes, only if requested
  TimingReport timing;
};

/// Labels every point, streaming features in batches of config.batch_size.
/// Throws std::invalid_argument when the model manifest differs from the
/// configured feature columns.
PredictResult run_predict(const Ensemble& model, const PointCloud& cloud, const PipelineConfig& config,
                          bool keep_probabilities = false);

}  // namespace terraclass
