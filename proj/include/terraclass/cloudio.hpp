#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "terraclass/cloud.hpp"

namespace terraclass {

enum class CloudFormat { ply_ascii, ply_binary_le, xyzrgb_text };

std::string_view format_name(CloudFormat format);
std::optional<CloudFormat> format_from_name(std::string_view name);

/// Guesses a format from the extension and, for .ply, the header line
/// `format ...`. Throws IoError if the file cannot be opened.
CloudFormat detect_format(const std::filesystem::path& path);

/// Reads a cloud. For PLY input the header's declared format must match
/// `format`. Errors carry the line number (text) or byte offset (binary).
PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud read_cloud(const std::filesystem::path& path);

struct WriteOptions {
  /// Replace vertex colors with the class palette (label must be present).
  bool colorize = false;
};

/// Writes x,y,z as float64, colors as uint8 and, for labeled clouds, a
/// `classification` uint8 property (255 = unlabeled). Empty clouds are
/// rejected before the file is created.
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format,
                 const WriteOptions& options = {});

}  // namespace terraclass
