#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prkg/graph.hpp"
#include "prkg/schema.hpp"

namespace prkg::ingest {

enum class CandidateSource { paper, conversation, activity, manual };

std::string_view to_string(CandidateSource source);
std::optional<CandidateSource> parse_candidate_source(std::string_view text);

/// A machine-extracted fact awaiting routing.
struct CandidateTriple {
  std::string head;
  std::string head_label;
  std::string rel;
  std::string tail;
  std::string tail_label;
  double confidence = 0.0;
  CandidateSource source = CandidateSource::manual;
  std::string provenance;

  /// Throws invalid_argument describing the first violated field.
  void check() const;
  friend bool operator==(const CandidateTriple&, const CandidateTriple&) = default;
};

struct Thresholds {
  double accept = 0.9;
  double reject = 0.25;

  /// Requires 0 <= reject < accept <= 1.
  void check() const;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

enum class EntryState { pending, accepted, rejected };

std::string_view to_string(EntryState state);
std::optional<EntryState> parse_entry_state(std::string_view text);

struct InboxEntry {
  std::uint64_t id = 0;
  CandidateTriple candidate;
  EntryState state = EntryState::pending;
  std::optional<PartialDate> decided_at;
  friend bool operator==(const InboxEntry&, const InboxEntry&) = default;
};

/// Human validation queue for mid-confidence candidates.
class Inbox {
 public:
  const std::map<std::uint64_t, InboxEntry>& entries() const { return entries_; }
  std::uint64_t next_id() const { return next_id_; }

  const InboxEntry& enqueue(CandidateTriple candidate);
  const InboxEntry& entry(std::uint64_t id) const;

  std::vector<InboxEntry> list(std::optional<EntryState> state = std::nullopt) const;

  /// Used when restoring persisted state.
  static Inbox restore(std::vector<InboxEntry> entries, std::uint64_t next_id);

  friend bool operator==(const Inbox&, const Inbox&) = default;

 private:
  friend InboxEntry& mutable_entry(Inbox& inbox, std::uint64_t id);
  std::map<std::uint64_t, InboxEntry> entries_;
  std::uint64_t next_id_ = 1;
};

struct MergeReport {
  NodeId head;
  NodeId tail;
  std::optional<RelId> relationship;  // absent for a duplicate
  std::size_t nodes_created = 0;
  bool duplicate = false;
  std::vector<std::string> warnings;
};

struct SubmitReport {
  std::size_t merged = 0;
  std::size_t queued = 0;
  std::size_t dropped = 0;
  std::size_t duplicates = 0;  // merges that matched an existing fact
  std::vector<std::string> warnings;

  std::size_t total() const { return merged + queued + dropped; }
};

/// A candidate is anchored when at least one endpoint resolves to a node that
/// is already connected to the owner. Only anchored candidates can merge
/// without creating orphans.
bool is_anchored(const Graph& graph, const CandidateTriple& candidate);

/// Exact (label, case-insensitive name) lookup; lowest id wins.
std::optional<NodeId> resolve_entity(const Graph& graph, const std::string& name,
                                     const std::string& label);

/// Routes by confidence: >= accept merges (or queues when unanchored),
/// between the thresholds queues, <= reject drops. The batch is validated
/// up front and rejected as a whole on any malformed candidate.
SubmitReport submit_candidates(Graph& graph, Inbox& inbox, const Thresholds& thresholds,
                               const std::vector<CandidateTriple>& candidates,
                               const schema::Registry& registry = schema::builtin_registry(),
                               const MutationGuard* guard = nullptr);

MergeReport inbox_accept(Graph& graph, Inbox& inbox, std::uint64_t entry_id,
                         const schema::Registry& registry = schema::builtin_registry(),
                         std::optional<PartialDate> decided_at = std::nullopt,
                         const MutationGuard* guard = nullptr);

const InboxEntry& inbox_reject(Graph& graph, Inbox& inbox, std::uint64_t entry_id,
                               std::optional<PartialDate> decided_at = std::nullopt);

std::vector<InboxEntry> inbox_list(const Inbox& inbox,
                                   std::optional<EntryState> state = std::nullopt);

/// One JSON object per line; blank lines are skipped.
std::vector<CandidateTriple> parse_triples(std::string_view text);
CandidateTriple parse_triple_line(std::string_view line);
std::string format_triple_line(const CandidateTriple& candidate);

SubmitReport import_triples(Graph& graph, Inbox& inbox, const Thresholds& thresholds,
                            const std::filesystem::path& path,
                            const schema::Registry& registry = schema::builtin_registry(),
                            const MutationGuard* guard = nullptr);

// BibTeX ----------------------------------------------------------------

struct BibEntry {
  std::string type;  // lower-cased
  std::string key;
  std::vector<std::pair<std::string, std::string>> fields;  // lower-cased names
  std::size_t line = 0;

  const std::string* field(const std::string& name) const;
};

/// Throws a parse error with line:column on unbalanced braces or malformed
/// entries.
std::vector<BibEntry> parse_bibtex(std::string_view text);

/// Splits an author field on `and` separators.
std::vector<std::string> split_authors(const std::string& field);

struct BibtexReport {
  std::size_t papers = 0;
  std::size_t writes_edges = 0;
  std::vector<std::string> warnings;
};

BibtexReport import_bibtex_text(Graph& graph, std::string_view text, const std::string& owner_name,
                                const MutationGuard* guard = nullptr);
BibtexReport import_bibtex(Graph& graph, const std::filesystem::path& path,
                           const std::string& owner_name, const MutationGuard* guard = nullptr);

}  // namespace prkg::ingest
