#include "logcascade/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include <gmp.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>
#include <unistd.h>

#include "logcascade/error.hpp"

namespace logcascade::io {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw Error(ErrorKind::PreconditionViolation, "CSV header is empty");
}

void CsvTable::add_row(const std::vector<Cell>& row) {
  if (row.size() != header_.size()) {
    throw Error(ErrorKind::PreconditionViolation, "CSV row has " + std::to_string(row.size()) + " cells, header has " +
                                                      std::to_string(header_.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) body_ += ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            if (!std::isfinite(v)) {
              throw Error(ErrorKind::PreconditionViolation, "non-finite value in CSV column " + header_[i]);
            }
            body_ += format_double(v);
          } else if constexpr (std::is_same_v<T, std::string>) {
            body_ += quote(v);
          } else {
            body_ += std::to_string(v);
          }
        },
        row[i]);
  }
  body_ += '\n';
  ++rows_;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += quote(header_[i]);
  }
  out += '\n';
  return out + body_;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Manifest::Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {}

const ArtifactEntry& Manifest::write(const std::string& relative, const std::string& kind, std::string_view content,
                                     double wall_seconds) {
  write_atomic(dir_ / relative, content);
  entries_.push_back({relative, kind, sha256_hex(content), content.size(), wall_seconds});
  return entries_.back();
}

nlohmann::json Manifest::to_json(const nlohmann::json& extra) const {
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& e : entries_) {
    arts.push_back({{"path", e.path}, {"kind", e.kind}, {"sha256", e.sha256}, {"bytes", e.bytes},
                    {"wall_seconds", e.wall_seconds}});
  }
  nlohmann::json j = {{"artifacts", arts}, {"versions", versions()}};
  if (!extra.is_null()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  }
  return j;
}

std::filesystem::path Manifest::finish(const nlohmann::json& extra) const {
  const auto path = dir_ / "manifest.json";
  write_atomic(path, dump_json(to_json(extra)));
  return path;
}

nlohmann::json versions() {
  return {{"logcascade", "0.1.0"},
          {"gmp", gmp_version},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"compiler", __VERSION__},
          {"fraction_bits", 256}};
}

}  // namespace logcascade::io
