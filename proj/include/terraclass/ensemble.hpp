#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/feature_matrix.hpp"

namespace terraclass {

enum class ModelKind { rf, gbt };

std::string_view model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(std::string_view name);

/// Training parameters. Defaults are the reference setup: 100 trees, half
/// of the columns as split candidates, RF depth 30, GBT 16 leaves with
/// learning rate 0.2 and bagging fraction 0.5.
struct TrainConfig {
  std::size_t n_trees = 100;  // RF trees, or GBT iterations
  std::size_t rf_max_depth = 30;
  double rf_feature_fraction = 0.5;
  bool rf_bootstrap = true;
  std::size_t gbt_max_leaves = 16;
  double gbt_learning_rate = 0.2;
  double gbt_bagging_fraction = 0.5;
  double gbt_feature_fraction = 0.5;
  double gbt_lambda = 1e-3;  // Newton leaf regularizer
  std::size_t min_samples_leaf = 1;
  /// Number of classes; 0 infers max(label) + 1.
  std::size_t n_classes = 0;
  std::uint64_t seed = 0;
  /// Worker threads; never changes the result.
  unsigned threads = 1;

  void validate() const;
};

/// Binary decision tree, flattened. Rows go left iff value < threshold.
struct Tree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    float threshold = 0.f;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t value_offset = 0;  // leaves: first entry in `values`
    bool operator==(const Node&) const = default;
  };
  std::vector<Node> nodes;
  /// RF: one class-probability vector per leaf; GBT: one score per leaf.
  std::vector<double> values;

  std::uint32_t leaf_for(std::span<const float> row) const;
  std::size_t leaf_count() const;
  bool operator==(const Tree&) const = default;
};

struct Prediction {
  std::size_t n_classes = 0;
  std::vector<double> probabilities;  // rows x n_classes
  std::vector<Label> labels;          // argmax, ties to the smaller class id

  std::span<const double> row(std::size_t r) const { return {probabilities.data() + r * n_classes, n_classes}; }
};

class Ensemble {
 public:
  ModelKind kind = ModelKind::rf;
  std::size_t n_classes = 0;
  std::vector<std::string> columns;  // feature manifest
  TrainConfig config;                // as trained (threads not recorded)
  /// RF: one tree per entry. GBT: iteration-major, tree it*n_classes + c
  /// scores class c.
  std::vector<Tree> trees;

  /// Class probabilities of one row whose columns follow `columns`.
  void predict_row(std::span<const float> row, std::span<double> probs) const;

  /// Columns are matched by name; a matrix with the same columns in another
  /// order is accepted. Throws std::invalid_argument naming missing or
  /// unexpected columns.
  Prediction predict(const FeatureMatrix& features, unsigned threads = 1) const;

  bool operator==(const Ensemble&) const = default;
};

struct RfDiagnostics {
  double oob_error = 0.0;      // argmax error over rows left out of at least one tree
  std::size_t oob_rows = 0;
};

/// Random Forest: bootstrap resample per tree, Gini splits over a random
/// half of the columns at each node, leaves store class frequencies.
Ensemble train_rf(const FeatureMatrix& features, std::span<const Label> labels, const TrainConfig& config,
                  RfDiagnostics* diagnostics = nullptr);

/// Multiclass softmax gradient boosting: per iteration one leaf-wise Newton
/// tree per class on a bagged row subset. If `loss_trace` is given it receives
/// the training log-loss over all rows after each iteration.
Ensemble train_gbt(const FeatureMatrix& features, std::span<const Label> labels, const TrainConfig& config,
                   std::vector<double>* loss_trace = nullptr);

Ensemble train(ModelKind kind, const FeatureMatrix& features, std::span<const Label> labels,
               const TrainConfig& config);

/// Mean multiclass cross-entropy of a model on labeled rows.
double log_loss(const Ensemble& model, const FeatureMatrix& features, std::span<const Label> labels);

/// Versioned, line-oriented text format (see docs/FORMATS.md).
std::string serialize_model(const Ensemble& model);
Ensemble parse_model(std::string_view text);
void save_model(const Ensemble& model, const std::filesystem::path& path);
Ensemble load_model(const std::filesystem::path& path);

}  // namespace terraclass
