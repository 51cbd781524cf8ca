#pragma once

// Shared primitives: error codes, diagnostics, string and path helpers.
// Everything in this library reports recoverable oddities through
// Diagnostic lists and reserves exceptions for contract violations.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace miniscope {

enum class ErrorCode {
  MissingManifest,
  MalformedManifest,
  DuplicatePagePath,
  DanglingManifestEntry,
  UnknownSubpackage,
  PageOutsidePrefix,
  ParseError,
  InconsistentAnchors,
  EmptyScreen,
  IllegalAction,
  StackFull,
  UnknownApi,
  InvalidConfig,
  IoError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::DuplicatePagePath: return "DuplicatePagePath";
    case ErrorCode::DanglingManifestEntry: return "DanglingManifestEntry";
    case ErrorCode::UnknownSubpackage: return "UnknownSubpackage";
    case ErrorCode::PageOutsidePrefix: return "PageOutsidePrefix";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InconsistentAnchors: return "InconsistentAnchors";
    case ErrorCode::EmptyScreen: return "EmptyScreen";
    case ErrorCode::IllegalAction: return "IllegalAction";
    case ErrorCode::StackFull: return "StackFull";
    case ErrorCode::UnknownApi: return "UnknownApi";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal finding attached to a file, page or node. `code` is a short
// kebab-case tag; `where` names the artifact the finding belongs to.
struct Diagnostic {
  std::string code;
  std::string message;
  std::string where;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

inline void append(Diagnostics& dst, const Diagnostics& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

// ---- string helpers ----

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// ASCII-only casefold; multi-byte sequences pass through untouched.
inline std::string casefold(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// trim + casefold, the normalization used for fuzzy attribute comparison.
inline std::string normalize_text(std::string_view s) { return casefold(trim(s)); }

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

// ---- page/module path normalization ----
//
// Page paths are slash-separated, extensionless and never absolute:
// "pages/home/index". `..` segments are rejected; `.` and empty segments
// collapse away.

inline std::optional<std::string> normalize_page_path(std::string_view raw) {
  std::string s{trim(raw)};
  if (auto q = s.find('?'); q != std::string::npos) s.resize(q);
  while (!s.empty() && s.front() == '/') s.erase(s.begin());
  for (std::string_view ext : {".wxml", ".js"})
    if (s.size() > ext.size() && s.ends_with(ext)) s.resize(s.size() - ext.size());
  std::vector<std::string> kept;
  for (auto& seg : split(s, '/')) {
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") return std::nullopt;
    kept.push_back(seg);
  }
  if (kept.empty()) return std::nullopt;
  return join(kept, '/');
}

// Query-string suffix of a routing url, "" when none.
inline std::string page_path_query(std::string_view raw) {
  auto q = raw.find('?');
  return q == std::string_view::npos ? std::string{} : std::string(raw.substr(q + 1));
}

// Resolves a require/import source against the importing file. Relative
// sources resolve from the importer's directory, others from the package
// root. A missing extension defaults to .js.
inline std::optional<std::string> resolve_import(std::string_view importer_file,
                                                 std::string_view source) {
  std::string src{trim(source)};
  if (src.empty()) return std::nullopt;
  std::vector<std::string> base;
  if (src.starts_with("./") || src.starts_with("../")) {
    base = split(importer_file, '/');
    base.pop_back();  // drop the file name
  }
  while (!src.empty() && src.front() == '/') src.erase(src.begin());
  for (auto& seg : split(src, '/')) {
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (base.empty()) return std::nullopt;
      base.pop_back();
    } else {
      base.push_back(seg);
    }
  }
  if (base.empty()) return std::nullopt;
  std::string out = join(base, '/');
  if (!out.ends_with(".js")) out += ".js";
  return out;
}

// ---- file IO ----

inline std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Source location of a syntax node, byte offsets plus 1-based line:col.
struct Span {
  size_t begin = 0;
  size_t end = 0;
  int line = 1;
  int col = 1;
  int end_line = 1;
  int end_col = 1;

  bool operator==(const Span&) const = default;
};

inline std::string to_string(const Span& s) {
  std::ostringstream ss;
  ss << s.line << ':' << s.col << '-' << s.end_line << ':' << s.end_col;
  return ss.str();
}

}  // namespace miniscope
