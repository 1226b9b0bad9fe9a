#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "prkg/graph.hpp"

namespace prkg::schema {

struct RelationSpec {
  std::string name;
  std::set<std::string> expected_src_labels;
  std::set<std::string> expected_dst_labels;
  bool temporal_expected = false;

  friend bool operator==(const RelationSpec&, const RelationSpec&) = default;
};

/// Research-domain vocabulary. Advisory only: checks produce warnings, never
/// rejections, and unknown relation names pass silently.
class Registry {
 public:
  /// The built-in vocabulary.
  Registry();

  const std::set<std::string>& labels() const { return labels_; }
  const std::map<std::string, RelationSpec>& relations() const { return relations_; }
  const RelationSpec* find(const std::string& name) const;
  bool is_builtin(const std::string& name) const;

  /// Throws conflict if the name is built-in or already registered.
  Registry& register_relation(RelationSpec spec);

  std::vector<std::string> check_triple(const std::set<std::string>& src_labels,
                                        const std::string& rel_type,
                                        const std::set<std::string>& dst_labels) const;

 private:
  std::set<std::string> labels_;
  std::map<std::string, RelationSpec> relations_;
  std::set<std::string> builtin_relations_;
};

const Registry& builtin_registry();

const Node& set_external_link(Graph& graph, NodeId node, LinkSource source, const std::string& uri,
                              const MutationGuard* guard = nullptr);

struct ValidationReport {
  std::set<NodeId> orphans;
  std::vector<std::string> schema_warnings;
};

/// Orphans plus per-relationship schema warnings. Does not mutate.
ValidationReport validate(const Graph& graph, const Registry& registry = builtin_registry());

}  // namespace prkg::schema
