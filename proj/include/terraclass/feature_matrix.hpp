#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace terraclass {

/// Dense row-major float32 matrix with named columns. `provenance` records
/// the feature-set expression that produced it (e.g. "g+cn:0.6").
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> columns, std::size_t rows, std::string provenance = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::string& provenance() const { return provenance_; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
  float& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<const float> data() const { return data_; }

  /// Rows stacked below this matrix; columns must match exactly.
  void append(const FeatureMatrix& other);

  /// Matrix with columns reordered to `order` (names); throws if any is missing.
  FeatureMatrix reorder(const std::vector<std::string>& order) const;

  /// Subset of rows.
  FeatureMatrix take_rows(std::span<const std::size_t> rows) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> columns_;
  std::string provenance_;
  std::size_t rows_ = 0;
  std::vector<float> data_;
};

/// Binary layout, little endian:
///   "TCFM" | u32 version=1 | u32 len + provenance bytes
///   | u32 column count | per column: u16 len + UTF-8 name
///   | u64 row count | rows x cols float32, row-major
void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

}  // namespace terraclass
