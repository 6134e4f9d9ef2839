#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/ensemble.hpp"
#include "terraclass/pipeline.hpp"

namespace terraclass {

inline constexpr std::size_t kDefaultSplitAngles = 36;
inline constexpr std::size_t kDefaultSplitOffsets = 200;

/// Vertical plane x cos(theta) + y sin(theta) = offset. Points with
/// x cos(theta) + y sin(theta) >= offset lie on the positive side.
struct SplitPlane {
  double theta = 0.0;
  double offset = 0.0;

  double project(const Vec3& p) const;
  bool positive(const Vec3& p) const { return project(p) >= offset; }
};

struct SplitSearchResult {
  SplitPlane plane;
  double objective = 0.0;  // in [0, 1/2]
  std::size_t angle_index = 0;
  std::size_t offset_index = 0;
};

/// Candidate angle k of n: k * pi / n.
double split_angle(std::size_t k, std::size_t n_angles);
/// Candidate offset j of n over the projected extent [lo, hi]:
/// lo + (hi - lo) * j / (n - 1), or the midpoint when n == 1.
double split_offset(double lo, double hi, std::size_t j, std::size_t n_offsets);

/// max over present classes c of |#{c on positive side} / #c - 1/2|;
/// unlabeled points are ignored.
double split_objective(const PointCloud& cloud, const SplitPlane& plane);

/// Exhaustive search over the angle x offset grid for the plane that best
/// halves every class. Ties go to the smaller angle, then the smaller offset.
SplitSearchResult find_split_plane(const PointCloud& cloud, std::size_t n_angles = kDefaultSplitAngles,
                                   std::size_t n_offsets = kDefaultSplitOffsets, unsigned threads = 1);

/// (positive side, negative side); point order is preserved.
std::pair<PointCloud, PointCloud> split_cloud(const PointCloud& cloud, const SplitPlane& plane);

struct SampleResult {
  std::vector<std::size_t> indices;  // ascending
  std::array<std::size_t, kNumClasses> per_class{};
  std::vector<std::string> warnings;
};

/// min(per_class, available) points of each class drawn uniformly without
/// replacement; deterministic for a seed.
SampleResult balanced_sample(const PointCloud& cloud, std::size_t per_class, std::uint64_t seed);

/// Counts with true label by row, predicted label by column.
class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Counts& counts) : counts_(counts) {}

  void add(Label truth, Label predicted);
  std::uint64_t count(Label truth, Label predicted) const { return counts_[truth][predicted]; }
  const Counts& counts() const { return counts_; }

  std::uint64_t total() const;
  std::uint64_t correct() const;
  /// Cell count over the total number of test points.
  double fraction(Label truth, Label predicted) const;
  /// Misclassified / total.
  double overall_error() const;
  /// Misclassified points of one true class over the total number of points.
  double class_error(Label truth) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  Counts counts_{};
};

/// Throws std::invalid_argument on length mismatch or labels outside the
/// six classes.
ConfusionMatrix confusion_matrix(std::span<const Label> truth, std::span<const Label> predicted);

struct EvaluationResult {
  ConfusionMatrix confusion;
  TimingReport timing;
};

/// Predicts every point of a labeled test cloud and scores the argmax labels.
EvaluationResult evaluate_model(const Ensemble& model, const PointCloud& test, const PipelineConfig& config);

struct ReportRow {
  std::string feature_set;
  std::string classifier;
  double overall_error = 0.0;
  double wall_time_s = 0.0;
  ConfusionMatrix confusion;

  bool operator==(const ReportRow&) const = default;
};

struct Report {
  std::vector<std::string> train_sets;
  std::string test_set;
  std::vector<ReportRow> rows;

  bool operator==(const Report&) const = default;
};

/// Text report: key-value header, error table, then one confusion block per
/// row (see docs/FORMATS.md).
std::string format_report(const Report& report);
Report parse_report(std::string_view text);

struct NamedCloud {
  std::string name;
  const PointCloud* cloud = nullptr;
};

/// Trains every (feature set, classifier) pair on the pooled balanced sample
/// of the training clouds and scores it on the test cloud. Features for the
/// union of the requested sets are computed once and sliced per row.
Report ablation_run(std::span<const NamedCloud> train, const NamedCloud& test,
                    std::span<const FeatureSetSpec> feature_sets, std::span<const ModelKind> classifiers,
                    const PipelineConfig& config);

}  // namespace terraclass
