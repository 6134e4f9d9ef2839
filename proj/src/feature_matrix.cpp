#include "terraclass/feature_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "terraclass/error.hpp"

namespace terraclass {
namespace {

constexpr char kMagic[4] = {'T', 'C', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    std::array<char, sizeof(T)> bytes;
    read(bytes.data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }

  std::string get_string(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  std::size_t offset() const { return offset_; }

  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ParseError("feature matrix truncated at byte offset " + std::to_string(offset_ + in_.gcount()));
    offset_ += n;
  }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> columns, std::size_t rows, std::string provenance)
    : columns_(std::move(columns)), provenance_(std::move(provenance)), rows_(rows), data_(rows * columns_.size(), 0.f) {}

void FeatureMatrix::append(const FeatureMatrix& other) {
  if (other.columns_ != columns_) throw std::invalid_argument("append: column mismatch");
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  rows_ += other.rows_;
}

FeatureMatrix FeatureMatrix::reorder(const std::vector<std::string>& order) const {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t c = 0; c < columns_.size(); ++c) pos.emplace(columns_[c], c);
  std::vector<std::size_t> src;
  std::vector<std::string> missing;
  for (const auto& name : order) {
    auto it = pos.find(name);
    if (it == pos.end())
      missing.push_back(name);
    else
      src.push_back(it->second);
  }
  if (!missing.empty()) {
    std::string msg = "feature matrix lacks columns:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }
  FeatureMatrix out(order, rows_, provenance_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < src.size(); ++c) out.at(r, c) = at(r, src[c]);
  return out;
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out(columns_, rows.size(), provenance_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) throw std::out_of_range("take_rows: row index out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * cols()), cols(),
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols()));
  }
  return out;
}

void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.provenance().size()));
  out.write(m.provenance().data(), static_cast<std::streamsize>(m.provenance().size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (const auto& name : m.columns()) {
    if (name.size() > 0xFFFF) throw std::invalid_argument("column name too long");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  put<std::uint64_t>(out, m.rows());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data().data()), static_cast<std::streamsize>(m.data().size_bytes()));
  } else {
    for (float v : m.data()) put(out, v);
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Reader r(in);
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a feature matrix file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw ParseError("unsupported feature matrix version " + std::to_string(version));
  std::string provenance = r.get_string(r.get<std::uint32_t>());
  const auto ncols = r.get<std::uint32_t>();
  std::vector<std::string> columns;
  columns.reserve(ncols);
  for (std::uint32_t c = 0; c < ncols; ++c) columns.push_back(r.get_string(r.get<std::uint16_t>()));
  const auto nrows = r.get<std::uint64_t>();
  const std::uintmax_t total = std::filesystem::file_size(path);
  const std::uintmax_t payload = total - r.offset();
  if (ncols > 0 && nrows > payload / (4 * std::uintmax_t{ncols}))
    throw ParseError("feature matrix truncated: header declares " + std::to_string(nrows) + " rows");
  FeatureMatrix m(std::move(columns), nrows, std::move(provenance));
  for (std::size_t row = 0; row < nrows; ++row) {
    auto dst = m.row(row);
    for (float& v : dst) v = r.get<float>();
  }
  return m;
}

}  // namespace terraclass
