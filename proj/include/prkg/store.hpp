#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prkg/access.hpp"
#include "prkg/graph.hpp"
#include "prkg/ingest.hpp"

namespace prkg::store {

inline constexpr std::string_view kFormatTag = "prkg-snapshot";
inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kDefaultRdfBase = "urn:prkg:";

/// Everything one snapshot file holds.
struct State {
  Graph graph;
  access::RoleTable roles;
  ingest::Inbox inbox;
  ingest::Thresholds thresholds;

  static State fresh(std::string_view owner_name);
  friend bool operator==(const State&, const State&) = default;
};

/// Canonical text: fixed key order, id-sorted lists, two-space indentation,
/// trailing newline. Equal states serialize to identical bytes.
std::string serialize_snapshot(const State& state);

/// Throws unsupported for an unknown format tag or version and integrity for
/// structural violations.
State parse_snapshot(std::string_view text);

/// Writes through a temporary file in the same directory and renames it into
/// place. `before_commit` runs after the temporary file is complete and
/// before the rename; an exception from it leaves `path` untouched.
void atomic_write(const std::filesystem::path& path, std::string_view content,
                  const std::function<void()>& before_commit = {});

std::size_t save_snapshot(const State& state, const std::filesystem::path& path);
State load_snapshot(const std::filesystem::path& path);

/// Sorted N-Triples lines over the whole graph, or over the view of `role`.
std::vector<std::string> rdf_lines(const Graph& graph, const access::View& view,
                                   std::string_view base = kDefaultRdfBase);

std::size_t export_rdf(const Graph& graph, const access::RoleTable& roles,
                       const std::optional<std::string>& role, const std::filesystem::path& path,
                       std::string_view base = kDefaultRdfBase);

}  // namespace prkg::store
