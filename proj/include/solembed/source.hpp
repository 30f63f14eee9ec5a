#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace solembed {

/// 1-based line/column position in a source text. Columns count bytes.
struct Position {
  int line = 1;
  int col = 1;

  auto operator<=>(const Position&) const = default;
};

/// Half-open source range: `end` points just past the last byte.
struct Span {
  Position start;
  Position end;

  bool operator==(const Span&) const = default;

  bool encloses(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
};

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string to_hex(const Digest& digest);

struct SourceUnit {
  std::string id;
  std::string path;
  std::string text;
  Digest content_hash{};

  /// Builds a unit whose id is derived from the content hash, so identical
  /// texts map to the same id.
  static SourceUnit from_text(std::string path, std::string text);
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  int line = 1;
  int col = 1;

  bool operator==(const Diagnostic&) const = default;
};

std::string_view to_string(Severity severity);

/// True when `text` is well-formed UTF-8 without NUL bytes.
bool is_text(std::string_view text);

}  // namespace solembed
