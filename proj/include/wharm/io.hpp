#pragma once

/// Text formats. Numbers are written with %.17g so that files round-trip
/// bit-exactly.
///
/// Field file: one header line, then one row per node in index order:
///   # wharm-field v1 kind=halfspace d=3 m=3 n=65 L=4 H=8 sigma=0.5625 columns=index,x1,x2,x3,u1,u2,u3
///   # wharm-field v1 kind=box d=3 m=3 n=17 columns=index,x1,x2,x3,u1,u2,u3

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "wharm/box.hpp"
#include "wharm/halfspace.hpp"

namespace wharm {

std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
// Throws MissingArtifacts if the file cannot be read.
std::string read_text(const std::filesystem::path& path);

// Lines "key = value"; blank lines and '#' comments skipped. Throws
// InvalidConfig naming the line on malformed input or duplicate keys.
std::map<std::string, std::string> parse_kv(const std::string& text);

std::string field_to_text(const Field& u);
std::string field_to_text(const BoxField& u);

struct LoadedField {
  std::string kind;  // "halfspace" or "box"
  std::optional<Field> half;
  std::optional<BoxField> box;
};
LoadedField field_from_text(const std::string& text);

}  // namespace wharm
