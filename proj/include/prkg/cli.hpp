#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prkg/error.hpp"
#include "prkg/ingest.hpp"
#include "prkg/schema.hpp"

namespace prkg::cli {

using Environment = std::map<std::string, std::string>;

struct Config {
  std::filesystem::path data_path = "prkg-snapshot.json";
  std::string default_role = "admin";
  ingest::Thresholds thresholds;
  bool thresholds_configured = false;
  std::string rdf_base = "urn:prkg:";
  std::vector<schema::RelationSpec> extra_relations;
};

/// Reads the JSON config at `path` (or $PRKG_CONFIG when `path` is empty),
/// then applies $PRKG_DATA and $PRKG_ROLE. A missing config means defaults.
/// Throws io for an unreadable file and parse for malformed content,
/// including a threshold pair violating 0 <= reject < accept <= 1.
Config load_config(const std::optional<std::filesystem::path>& path, const Environment& env);

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDomain = 2;
inline constexpr int kIoOrParse = 3;

int exit_code_for(Errc code);

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, const Environment& env, std::ostream& out,
        std::ostream& err);

}  // namespace prkg::cli
