#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prkg/graph.hpp"

namespace prkg::access {

enum class Privilege { read, traverse, write, append, control };

std::string_view to_string(Privilege privilege);
std::optional<Privilege> parse_privilege(std::string_view text);

inline constexpr Privilege kAllPrivileges[] = {Privilege::read, Privilege::traverse,
                                               Privilege::write, Privilege::append,
                                               Privilege::control};

namespace scope {
struct WholeGraph {
  friend bool operator==(const WholeGraph&, const WholeGraph&) = default;
};
struct NodeLabel {
  std::string label;
  friend bool operator==(const NodeLabel&, const NodeLabel&) = default;
};
struct RelType {
  std::string name;
  friend bool operator==(const RelType&, const RelType&) = default;
};
struct NodeInstance {
  NodeId id;
  friend bool operator==(const NodeInstance&, const NodeInstance&) = default;
};
/// One property key on nodes carrying a label. Matches property elements only.
struct NodeProperty {
  std::string label;
  std::string key;
  friend bool operator==(const NodeProperty&, const NodeProperty&) = default;
};
/// Nodes carrying `label` whose `key` value renders to one of `values`.
struct PropertyPredicate {
  std::string label;
  std::string key;
  std::set<std::string> values;
  friend bool operator==(const PropertyPredicate&, const PropertyPredicate&) = default;
};
}  // namespace scope

using Scope = std::variant<scope::WholeGraph, scope::NodeLabel, scope::RelType,
                           scope::NodeInstance, scope::NodeProperty, scope::PropertyPredicate>;

std::string to_string(const Scope& scope);

enum class Effect { grant, deny };

struct AccessRule {
  Effect effect = Effect::grant;
  Privilege privilege = Privilege::read;
  Scope scope = scope::WholeGraph{};

  /// Throws invalid_argument on an empty predicate value set or empty names.
  void check() const;
  friend bool operator==(const AccessRule&, const AccessRule&) = default;
};

std::string to_string(const AccessRule& rule);

struct Role {
  std::string name;
  std::vector<AccessRule> rules;
  friend bool operator==(const Role&, const Role&) = default;
};

inline constexpr std::string_view kAdminRole = "admin";

/// Role names to roles. The built-in `admin` role holds a whole-graph grant
/// for every privilege and cannot be edited.
class RoleTable {
 public:
  RoleTable();

  const Role* find(const std::string& name) const;
  const Role& role(const std::string& name) const;
  const std::map<std::string, Role>& roles() const { return roles_; }

  /// Mutations take an optional acting role; when given it must hold
  /// `control` over the whole graph.
  const Role& create_role(const std::string& name, const Role* actor = nullptr);
  const Role& copy_role(const std::string& new_name, const std::string& from_name,
                        const Role* actor = nullptr);
  const Role& add_rule(const std::string& name, AccessRule rule, const Role* actor = nullptr);

  /// Used when restoring persisted roles.
  void insert(Role role);

  friend bool operator==(const RoleTable&, const RoleTable&) = default;

 private:
  void require_control(const Role* actor) const;
  std::map<std::string, Role> roles_;
};

Role admin_role();

struct PropertyRef {
  NodeId node;
  std::string key;
};

using Element = std::variant<NodeId, RelId, PropertyRef>;

enum class Decision { allowed, denied };

/// Deny beats grant at any scope; no matching rule means denied.
Decision resolve(const Role& role, Privilege privilege, const Element& element,
                 const Graph& graph);

bool scope_matches(const Scope& scope, const Element& element, const Graph& graph);

struct View {
  std::set<NodeId> nodes;
  std::map<NodeId, std::set<std::string>> masked_properties;
  std::set<RelId> relationships;

  bool node_visible(NodeId id) const { return nodes.count(id) != 0; }
  bool relationship_visible(RelId id) const { return relationships.count(id) != 0; }
  bool property_visible(NodeId id, const std::string& key) const;

  friend bool operator==(const View&, const View&) = default;
};

View view_as(const Graph& graph, const Role& role);

/// Full visibility, without consulting any rule.
View full_view(const Graph& graph);

Decision check_write(const Graph& graph, const Role& role, MutationKind kind,
                     const WriteTarget& target);

/// Whole-graph control grant, no deny control, and no whole-graph deny write.
bool has_control(const Role& role);

/// Adapts a role to the graph's mutation hook.
class RoleGuard : public MutationGuard {
 public:
  RoleGuard(const Graph& graph, const Role& role) : graph_(graph), role_(role) {}
  bool permits(MutationKind kind, const WriteTarget& target) const override;

 private:
  const Graph& graph_;
  const Role& role_;
};

/// Parses the CLI scope syntax: `graph` | `node-label L` | `rel-type T` |
/// `node ID` | `prop L KEY` | `prop-pred L KEY V1,V2`.
Scope parse_scope(const std::vector<std::string>& words);

}  // namespace prkg::access
