#pragma once

// Artifact output: CSV tables, JSON documents, atomic file writes and the
// SHA-256 manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace logcascade::io {

using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

// RFC 4180 style table with a mandatory header. Non-finite doubles are
// rejected when a row is added.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<Cell>& row);
  std::size_t rows() const noexcept { return rows_; }
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::string body_;
  std::size_t rows_ = 0;
};

// Writes to a temporary sibling and renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string dump_json(const nlohmann::json& j);  // two-space indent, trailing newline

std::string sha256_hex(std::string_view data);

struct ArtifactEntry {
  std::string path;  // relative to the output directory
  std::string kind;
  std::string sha256;
  std::uint64_t bytes = 0;
  double wall_seconds = 0.0;
};

class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir);
  const std::filesystem::path& dir() const noexcept { return dir_; }
  // Writes the artifact atomically and records it.
  const ArtifactEntry& write(const std::string& relative, const std::string& kind, std::string_view content,
                             double wall_seconds = 0.0);
  const std::vector<ArtifactEntry>& entries() const noexcept { return entries_; }
  nlohmann::json to_json(const nlohmann::json& extra = {}) const;
  // Writes manifest.json; returns its path.
  std::filesystem::path finish(const nlohmann::json& extra = {}) const;

 private:
  std::filesystem::path dir_;
  std::vector<ArtifactEntry> entries_;
};

nlohmann::json versions();

}  // namespace logcascade::io
