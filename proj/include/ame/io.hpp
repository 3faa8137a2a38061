#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ame/crt.hpp"
#include "ame/phase.hpp"

namespace ame {

// Self-describing text format, version tag "ame-phase v1":
//
//   ame-phase v1
//   N 17
//   field prime 73            (or: field primepower p m c0 c1 ... cm
//                               or: field composite p1 p2 ...)
//   <N rows of N space-separated integers>
//
// Lines starting with '#' and blank lines are ignored; a trailing
// "# manifest <json>" comment carries run provenance.

std::string matrix_to_string(const PhaseMatrix& p);
std::string field_to_string(const FieldSpec& f);

// Inverse of field_to_string; the leading "field" token is optional.
FieldSpec field_from_string(std::string_view text);

PhaseMatrix parse_matrix(std::string_view text); // ParseError with line diagnostics

void save_matrix(const PhaseMatrix& p, const std::string& path,
                 const std::string& manifest_json = "");
PhaseMatrix load_matrix(const std::string& path);

// Split-on-load for composite files; throws NotComposite for single-field files.
CompositePhase load_composite(const std::string& path);

std::optional<std::string> extract_manifest(std::string_view text);
std::optional<std::string> extract_manifest_from_file(const std::string& path);

// FNV-1a 64-bit content digest used for reproducibility checks.
std::uint64_t fnv1a64(std::string_view data);
std::string digest_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace ame
