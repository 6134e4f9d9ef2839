#include "terraclass/cloudio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "terraclass/error.hpp"

namespace terraclass {
namespace {

enum class ScalarType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<ScalarType> scalar_type(std::string_view name) {
  if (name == "char" || name == "int8") return ScalarType::i8;
  if (name == "uchar" || name == "uint8") return ScalarType::u8;
  if (name == "short" || name == "int16") return ScalarType::i16;
  if (name == "ushort" || name == "uint16") return ScalarType::u16;
  if (name == "int" || name == "int32") return ScalarType::i32;
  if (name == "uint" || name == "uint32") return ScalarType::u32;
  if (name == "float" || name == "float32") return ScalarType::f32;
  if (name == "double" || name == "float64") return ScalarType::f64;
  return std::nullopt;
}

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::i8:
    case ScalarType::u8: return 1;
    case ScalarType::i16:
    case ScalarType::u16: return 2;
    case ScalarType::i32:
    case ScalarType::u32:
    case ScalarType::f32: return 4;
    case ScalarType::f64: return 8;
  }
  return 0;
}

bool is_integral(ScalarType t) { return t != ScalarType::f32 && t != ScalarType::f64; }

template <typename T>
T load_le(const char* p) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

template <typename T>
void store_le(std::string& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

double load_scalar(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::i8: return load_le<std::int8_t>(p);
    case ScalarType::u8: return load_le<std::uint8_t>(p);
    case ScalarType::i16: return load_le<std::int16_t>(p);
    case ScalarType::u16: return load_le<std::uint16_t>(p);
    case ScalarType::i32: return load_le<std::int32_t>(p);
    case ScalarType::u32: return load_le<std::uint32_t>(p);
    case ScalarType::f32: return load_le<float>(p);
    case ScalarType::f64: return load_le<double>(p);
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::f32;
  bool is_list = false;
  ScalarType count_type = ScalarType::u8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

struct PlyHeader {
  CloudFormat format = CloudFormat::ply_ascii;
  std::vector<Element> elements;
  std::size_t body_offset = 0;  // byte offset of the first body byte
  std::size_t body_line = 0;    // 1-based line number of the first body line
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_offset(std::size_t offset, const std::string& what) {
  throw ParseError("byte offset " + std::to_string(offset) + ": " + what);
}

PlyHeader parse_header(std::string_view data) {
  PlyHeader header;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  auto next_line = [&]() -> std::string_view {
    if (pos >= data.size()) fail_line(line_no + 1, "unexpected end of file inside header");
    std::size_t end = data.find('\n', pos);
    if (end == std::string_view::npos) end = data.size();
    std::string_view line = data.substr(pos, end - pos);
    pos = std::min(end + 1, data.size());
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  if (next_line() != "ply") fail_line(1, "missing 'ply' magic");
  while (true) {
    std::string_view line = next_line();
    auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() != 3) fail_line(line_no, "malformed format line");
      if (tok[1] == "ascii")
        header.format = CloudFormat::ply_ascii;
      else if (tok[1] == "binary_little_endian")
        header.format = CloudFormat::ply_binary_le;
      else
        fail_line(line_no, "unsupported PLY format '" + std::string(tok[1]) + "'");
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail_line(line_no, "malformed element line");
      Element el;
      el.name = std::string(tok[1]);
      std::uint64_t count = 0;
      auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (ec != std::errc{} || p != tok[2].data() + tok[2].size())
        fail_line(line_no, "bad element count");
      el.count = count;
      header.elements.push_back(std::move(el));
    } else if (tok[0] == "property") {
      if (header.elements.empty()) fail_line(line_no, "property before any element");
      Property prop;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = scalar_type(tok[2]);
        auto vt = scalar_type(tok[3]);
        if (!ct || !vt || !is_integral(*ct)) fail_line(line_no, "unknown property type");
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *vt;
        prop.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        auto t = scalar_type(tok[1]);
        if (!t) fail_line(line_no, "unknown property type '" + std::string(tok[1]) + "'");
        prop.type = *t;
        prop.name = std::string(tok[2]);
      } else {
        fail_line(line_no, "malformed property line");
      }
      header.elements.back().props.push_back(std::move(prop));
    } else {
      fail_line(line_no, "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_format) fail_line(line_no, "header has no format line");
  header.body_offset = pos;
  header.body_line = line_no + 1;
  return header;
}

struct VertexLayout {
  int x = -1, y = -1, z = -1;
  int red = -1, green = -1, blue = -1;
  int label = -1;
};

VertexLayout vertex_layout(const Element& el) {
  VertexLayout layout;
  for (std::size_t i = 0; i < el.props.size(); ++i) {
    const auto& name = el.props[i].name;
    int idx = static_cast<int>(i);
    if (name == "x") layout.x = idx;
    else if (name == "y") layout.y = idx;
    else if (name == "z") layout.z = idx;
    else if (name == "red" || name == "r" || name == "diffuse_red") layout.red = idx;
    else if (name == "green" || name == "g" || name == "diffuse_green") layout.green = idx;
    else if (name == "blue" || name == "b" || name == "diffuse_blue") layout.blue = idx;
    else if (name == "classification") layout.label = idx;
  }
  return layout;
}

// Converts a stored color value to [0,1]. uint8 channels are divided by 255;
// float channels are taken as already normalized.
float to_unit_color(ScalarType t, double v, bool& ok) {
  if (t == ScalarType::u8) return static_cast<float>(v / 255.0);
  if (t == ScalarType::f32 || t == ScalarType::f64) {
    ok = v >= 0.0 && v <= 1.0;
    return static_cast<float>(v);
  }
  ok = false;
  return 0.f;
}

struct VertexBuilder {
  const Element& el;
  VertexLayout layout;
  bool has_color = false;
  bool has_labels = false;
  std::vector<Point> points;

  explicit VertexBuilder(const Element& e) : el(e), layout(vertex_layout(e)) {
    has_color = layout.red >= 0 && layout.green >= 0 && layout.blue >= 0;
    has_labels = layout.label >= 0;
    points.reserve(e.count);
  }

  // values[i] holds the scalar of property i (list properties are rejected).
  // Returns an error message or empty string.
  std::string add(const std::vector<double>& values) {
    Point p;
    p.pos = {values[layout.x], values[layout.y], values[layout.z]};
    if (!std::isfinite(p.pos.x) || !std::isfinite(p.pos.y) || !std::isfinite(p.pos.z))
      return "non-finite coordinate";
    if (has_color) {
      bool ok = true;
      p.rgb[0] = to_unit_color(el.props[layout.red].type, values[layout.red], ok);
      p.rgb[1] = to_unit_color(el.props[layout.green].type, values[layout.green], ok);
      p.rgb[2] = to_unit_color(el.props[layout.blue].type, values[layout.blue], ok);
      if (!ok) return "color value out of range or unsupported color type";
    }
    if (has_labels) {
      double v = values[layout.label];
      if (v != std::floor(v) || v < 0 || v > 255 || !is_valid_label(static_cast<Label>(v)))
        return "classification value " + std::to_string(v) + " is not a known class";
      p.label = static_cast<Label>(v);
    }
    points.push_back(p);
    return {};
  }
};

void check_vertex_element(const Element& el, const VertexLayout& layout) {
  if (layout.x < 0 || layout.y < 0 || layout.z < 0)
    throw ParseError("vertex element lacks x/y/z properties");
  for (const auto& p : el.props)
    if (p.is_list) throw ParseError("list property '" + p.name + "' on vertex element is not supported");
  if (layout.label >= 0 && !is_integral(el.props[layout.label].type))
    throw ParseError("classification property must be an integer type");
}

PointCloud read_ply_ascii(std::string_view data, const PlyHeader& header) {
  std::size_t pos = header.body_offset;
  std::size_t line_no = header.body_line - 1;
  auto next_line = [&]() -> std::string_view {
    while (pos < data.size()) {
      std::size_t end = data.find('\n', pos);
      if (end == std::string_view::npos) end = data.size();
      std::string_view line = data.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!split_ws(line).empty()) return line;
    }
    fail_line(line_no + 1, "truncated body: expected more element lines");
  };

  for (const auto& el : header.elements) {
    if (el.name != "vertex") {
      for (std::size_t i = 0; i < el.count; ++i) next_line();
      continue;
    }
    VertexBuilder builder(el);
    check_vertex_element(el, builder.layout);
    std::vector<double> values(el.props.size());
    for (std::size_t i = 0; i < el.count; ++i) {
      auto tok = split_ws(next_line());
      if (tok.size() != el.props.size())
        fail_line(line_no, "expected " + std::to_string(el.props.size()) + " values, got " +
                               std::to_string(tok.size()));
      for (std::size_t j = 0; j < tok.size(); ++j) {
        auto [p, ec] = std::from_chars(tok[j].data(), tok[j].data() + tok[j].size(), values[j]);
        if (ec != std::errc{} || p != tok[j].data() + tok[j].size())
          fail_line(line_no, "bad number '" + std::string(tok[j]) + "'");
      }
      if (auto err = builder.add(values); !err.empty()) fail_line(line_no, err);
    }
    return PointCloud(std::move(builder.points), builder.has_color, builder.has_labels);
  }
  throw ParseError("PLY file has no vertex element");
}

PointCloud read_ply_binary(std::string_view data, const PlyHeader& header) {
  std::size_t pos = header.body_offset;
  auto need = [&](std::size_t n) {
    if (pos + n > data.size())
      fail_offset(pos, "truncated payload: need " + std::to_string(n) + " more bytes");
  };
  for (const auto& el : header.elements) {
    if (el.name != "vertex") {
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const auto& prop : el.props) {
          if (prop.is_list) {
            need(type_size(prop.count_type));
            double n = load_scalar(prop.count_type, data.data() + pos);
            if (n < 0) fail_offset(pos, "negative list length");
            pos += type_size(prop.count_type);
            std::size_t bytes = static_cast<std::size_t>(n) * type_size(prop.type);
            need(bytes);
            pos += bytes;
          } else {
            need(type_size(prop.type));
            pos += type_size(prop.type);
          }
        }
      }
      continue;
    }
    VertexBuilder builder(el);
    check_vertex_element(el, builder.layout);
    std::size_t stride = 0;
    for (const auto& p : el.props) stride += type_size(p.type);
    std::vector<double> values(el.props.size());
    for (std::size_t i = 0; i < el.count; ++i) {
      need(stride);
      std::size_t start = pos;
      for (std::size_t j = 0; j < el.props.size(); ++j) {
        values[j] = load_scalar(el.props[j].type, data.data() + pos);
        pos += type_size(el.props[j].type);
      }
      if (auto err = builder.add(values); !err.empty()) fail_offset(start, err);
    }
    return PointCloud(std::move(builder.points), builder.has_color, builder.has_labels);
  }
  throw ParseError("PLY file has no vertex element");
}

PointCloud read_text(std::string_view data) {
  std::vector<Point> points;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (pos < data.size()) {
    std::size_t end = data.find('\n', pos);
    if (end == std::string_view::npos) end = data.size();
    std::string_view line = data.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (columns == 0) {
      if (tok.size() != 3 && tok.size() != 6 && tok.size() != 7)
        fail_line(line_no, "expected 'x y z [r g b [label]]', got " + std::to_string(tok.size()) +
                               " values");
      columns = tok.size();
    } else if (tok.size() != columns) {
      fail_line(line_no, "expected " + std::to_string(columns) + " values, got " +
                             std::to_string(tok.size()));
    }
    double v[7];
    for (std::size_t j = 0; j < tok.size(); ++j) {
      auto [p, ec] = std::from_chars(tok[j].data(), tok[j].data() + tok[j].size(), v[j]);
      if (ec != std::errc{} || p != tok[j].data() + tok[j].size())
        fail_line(line_no, "bad number '" + std::string(tok[j]) + "'");
    }
    Point p;
    p.pos = {v[0], v[1], v[2]};
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
      fail_line(line_no, "non-finite coordinate");
    if (columns >= 6) {
      for (int c = 0; c < 3; ++c) {
        double ch = v[3 + c];
        if (ch != std::floor(ch) || ch < 0 || ch > 255)
          fail_line(line_no, "color channel must be an integer in [0,255]");
        p.rgb[c] = static_cast<float>(ch / 255.0);
      }
    }
    if (columns == 7) {
      if (v[6] != std::floor(v[6]) || v[6] < 0 || v[6] > 255 ||
          !is_valid_label(static_cast<Label>(v[6])))
        fail_line(line_no, "label must be 0..5 or 255");
      p.label = static_cast<Label>(v[6]);
    }
    points.push_back(p);
  }
  return PointCloud(std::move(points), columns >= 6, columns == 7);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string data;
  in.seekg(0, std::ios::end);
  data.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (!in) throw IoError("failed reading '" + path.string() + "'");
  return data;
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, p);
}

void append_int(std::string& out, unsigned v) {
  char buf[16];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, p);
}

std::uint8_t to_byte(float c) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(static_cast<double>(c) * 255.0), 0L, 255L));
}

Rgb8 output_color(const Point& p, bool colorize) {
  if (colorize) return class_color(p.label);
  return {to_byte(p.rgb[0]), to_byte(p.rgb[1]), to_byte(p.rgb[2])};
}

}  // namespace

std::string_view format_name(CloudFormat format) {
  switch (format) {
    case CloudFormat::ply_ascii: return "ply_ascii";
    case CloudFormat::ply_binary_le: return "ply_binary_le";
    case CloudFormat::xyzrgb_text: return "xyzrgb_text";
  }
  return "?";
}

std::optional<CloudFormat> format_from_name(std::string_view name) {
  if (name == "ply_ascii") return CloudFormat::ply_ascii;
  if (name == "ply_binary_le" || name == "ply") return CloudFormat::ply_binary_le;
  if (name == "xyzrgb_text" || name == "xyz" || name == "text") return CloudFormat::xyzrgb_text;
  return std::nullopt;
}

CloudFormat detect_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string first;
  std::getline(in, first);
  if (first == "ply" || first == "ply\r") {
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("format binary_little_endian", 0) == 0) return CloudFormat::ply_binary_le;
      if (line.rfind("format ascii", 0) == 0) return CloudFormat::ply_ascii;
      if (line.rfind("end_header", 0) == 0) break;
    }
    return CloudFormat::ply_ascii;
  }
  return CloudFormat::xyzrgb_text;
}

PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format) {
  const std::string data = slurp(path);
  if (format == CloudFormat::xyzrgb_text) return read_text(data);
  PlyHeader header = parse_header(data);
  if (header.format != format)
    throw ParseError("'" + path.string() + "' is " + std::string(format_name(header.format)) +
                     ", expected " + std::string(format_name(format)));
  return header.format == CloudFormat::ply_ascii ? read_ply_ascii(data, header)
                                                 : read_ply_binary(data, header);
}

PointCloud read_cloud(const std::filesystem::path& path) { return read_cloud(path, detect_format(path)); }

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format,
                 const WriteOptions& options) {
  if (cloud.empty()) throw std::invalid_argument("refusing to write an empty cloud");
  if (options.colorize && !cloud.has_labels())
    throw std::invalid_argument("colorized output requires a labeled cloud");
  const bool with_color = cloud.has_color() || options.colorize;
  const bool with_labels = cloud.has_labels();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

  std::string buf;
  buf.reserve(1 << 20);
  auto flush = [&](bool force) {
    if (force || buf.size() >= (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  };

  if (format != CloudFormat::xyzrgb_text) {
    buf += "ply\nformat ";
    buf += format == CloudFormat::ply_ascii ? "ascii" : "binary_little_endian";
    buf += " 1.0\nelement vertex " + std::to_string(cloud.size()) + "\n";
    buf += "property double x\nproperty double y\nproperty double z\n";
    if (with_color) buf += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (with_labels) buf += "property uchar classification\n";
    buf += "end_header\n";
  }

  for (const Point& p : cloud.points()) {
    const Rgb8 c = output_color(p, options.colorize);
    if (format == CloudFormat::ply_binary_le) {
      store_le(buf, p.pos.x);
      store_le(buf, p.pos.y);
      store_le(buf, p.pos.z);
      if (with_color) {
        buf.push_back(static_cast<char>(c.r));
        buf.push_back(static_cast<char>(c.g));
        buf.push_back(static_cast<char>(c.b));
      }
      if (with_labels) buf.push_back(static_cast<char>(p.label));
    } else {
      // Text format always carries colors (black when the cloud has none).
      const bool color_cols = with_color || format == CloudFormat::xyzrgb_text;
      append_number(buf, p.pos.x);
      buf.push_back(' ');
      append_number(buf, p.pos.y);
      buf.push_back(' ');
      append_number(buf, p.pos.z);
      if (color_cols) {
        for (unsigned ch : {unsigned(c.r), unsigned(c.g), unsigned(c.b)}) {
          buf.push_back(' ');
          append_int(buf, ch);
        }
      }
      if (with_labels) {
        buf.push_back(' ');
        append_int(buf, p.label);
      }
      buf.push_back('\n');
    }
    flush(false);
  }
  flush(true);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace terraclass
