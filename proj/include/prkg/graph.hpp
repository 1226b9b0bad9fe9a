#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "prkg/date.hpp"
#include "prkg/value.hpp"

namespace prkg {

struct NodeId {
  std::uint64_t value = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct RelId {
  std::uint64_t value = 0;
  friend auto operator<=>(const RelId&, const RelId&) = default;
};

/// Rendered as `n<k>` and `r<k>`. Both kinds draw from one counter per graph.
std::string to_string(NodeId id);
std::string to_string(RelId id);
std::optional<NodeId> parse_node_id(std::string_view text);
std::optional<RelId> parse_rel_id(std::string_view text);

enum class LinkSource { wikidata, orkg, twitter, other };

std::string_view to_string(LinkSource source);
std::optional<LinkSource> parse_link_source(std::string_view text);

struct ExternalLink {
  LinkSource source = LinkSource::other;
  std::string uri;
  friend bool operator==(const ExternalLink&, const ExternalLink&) = default;
};

/// Syntactic check for an absolute URI: a scheme, a colon, and a non-empty
/// remainder free of whitespace and characters that cannot appear in an IRI
/// reference.
bool is_absolute_uri(std::string_view uri);

/// Relationship type names are non-empty and contain no whitespace.
bool is_valid_rel_type(std::string_view name);

struct Node {
  NodeId id;
  std::set<std::string> labels;
  PropertyMap properties;
  std::vector<ExternalLink> external_links;

  bool has_label(const std::string& label) const { return labels.count(label) != 0; }
  const PropertyValue* property(const std::string& key) const;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Relationship {
  RelId id;
  NodeId src;
  NodeId dst;
  std::string rel_type;
  TemporalInterval validity;
  PropertyMap properties;

  const PropertyValue* property(const std::string& key) const;
  friend bool operator==(const Relationship&, const Relationship&) = default;
};

enum class Direction { out, in, both };

enum class MutationKind { create, modify, remove };

/// What a mutation touches, as seen by an access check.
struct NodeTarget {
  std::optional<NodeId> id;  // absent for a node being created
  std::set<std::string> labels;
  PropertyMap properties;
  std::set<std::string> keys;  // keys written by a modification
};

struct RelTarget {
  std::optional<RelId> id;
  std::string rel_type;
};

using WriteTarget = std::variant<NodeTarget, RelTarget>;

/// Hook consulted by Graph mutations that are performed on behalf of a role.
class MutationGuard {
 public:
  virtual ~MutationGuard() = default;
  virtual bool permits(MutationKind kind, const WriteTarget& target) const = 0;
};

struct Neighbor {
  const Relationship* relationship;
  const Node* node;
};

/// The owner-centric labeled property graph. All iteration is in id order.
class Graph {
 public:
  static Graph create(std::string_view owner_name);

  /// Rebuilds a graph from persisted parts; throws integrity on structural
  /// violations (missing owner, dangling endpoint, bad interval, id at or
  /// above the counter).
  static Graph restore(NodeId owner, std::vector<Node> nodes,
                       std::vector<Relationship> relationships, std::uint64_t next_id);

  NodeId owner() const { return owner_; }
  std::uint64_t next_id() const { return next_id_; }

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::map<RelId, Relationship>& relationships() const { return relationships_; }

  const Node* find_node(NodeId id) const;
  const Relationship* find_relationship(RelId id) const;
  const Node& node(NodeId id) const;
  const Relationship& relationship(RelId id) const;

  NodeId add_node(std::set<std::string> labels, PropertyMap properties,
                  const MutationGuard* guard = nullptr);

  RelId add_relationship(NodeId src, NodeId dst, std::string rel_type, TemporalInterval validity,
                         PropertyMap properties = {}, const MutationGuard* guard = nullptr);

  const Relationship& end_relationship(RelId id, PartialDate end,
                                       const MutationGuard* guard = nullptr);

  const Node& set_properties(NodeId id, const PropertyUpdates& updates,
                             const MutationGuard* guard = nullptr);
  const Relationship& set_properties(RelId id, const PropertyUpdates& updates,
                                     const MutationGuard* guard = nullptr);

  const Node& add_external_link(NodeId id, ExternalLink link, const MutationGuard* guard = nullptr);

  /// Returns the number of removed elements (the node plus cascaded edges).
  std::size_t delete_node(NodeId id, bool cascade, const MutationGuard* guard = nullptr);

  std::size_t delete_relationship(RelId id, const MutationGuard* guard = nullptr);

  std::vector<Neighbor> neighbors(NodeId id, Direction direction,
                                  const std::optional<std::string>& rel_type = std::nullopt,
                                  const std::optional<PartialDate>& at = std::nullopt) const;

  std::vector<RelId> incident(NodeId id) const;

  /// An existing relationship with identical endpoints, type and validity.
  std::optional<RelId> find_duplicate(NodeId src, NodeId dst, const std::string& rel_type,
                                      const TemporalInterval& validity) const;

  /// Nodes reachable from the owner when edges are read as undirected and
  /// validity is ignored.
  std::set<NodeId> reachable_from_owner() const;
  std::set<NodeId> orphans() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  Graph() = default;
  std::uint64_t fresh_id() { return next_id_++; }
  Node& mutable_node(NodeId id);
  Relationship& mutable_relationship(RelId id);

  NodeId owner_;
  std::map<NodeId, Node> nodes_;
  std::map<RelId, Relationship> relationships_;
  std::uint64_t next_id_ = 1;
};

NodeTarget node_target(const Node& node);
RelTarget rel_target(const Relationship& rel);

}  // namespace prkg
