#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prkg/access.hpp"
#include "prkg/error.hpp"
#include "prkg/graph.hpp"

namespace prkg::query {

using Literal = std::variant<std::string, std::int64_t, bool>;

struct PropertyFilter {
  std::string key;
  Literal value;
  friend bool operator==(const PropertyFilter&, const PropertyFilter&) = default;
};

struct NodePattern {
  std::optional<std::string> variable;
  std::optional<std::string> label;
  std::vector<PropertyFilter> properties;
  friend bool operator==(const NodePattern&, const NodePattern&) = default;
};

enum class EdgeDirection { forward, backward };

struct EdgePattern {
  std::optional<std::string> variable;
  std::optional<std::string> rel_type;
  EdgeDirection direction = EdgeDirection::forward;
  std::vector<PropertyFilter> properties;
  friend bool operator==(const EdgePattern&, const EdgePattern&) = default;
};

struct ReturnItem {
  std::string variable;
  std::optional<std::string> key;
  friend bool operator==(const ReturnItem&, const ReturnItem&) = default;
};

/// A path pattern: nodes[i] -edges[i]- nodes[i+1].
struct QueryAst {
  std::vector<NodePattern> nodes;
  std::vector<EdgePattern> edges;
  std::optional<PartialDate> at;
  std::optional<std::string> as_role;
  std::vector<ReturnItem> items;
  friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

/// Syntax or semantic failure with a 1-based position.
class QueryError : public Error {
 public:
  QueryError(std::size_t line, std::size_t column, std::string message,
             std::set<std::string> expected = {});

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& detail() const { return detail_; }
  const std::set<std::string>& expected() const { return expected_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
  std::set<std::string> expected_;
};

QueryAst parse_query(std::string_view text);

/// Canonical text form; parse_query(to_string(ast)) == ast.
std::string to_string(const QueryAst& ast);

using Cell = std::variant<std::monostate, NodeId, RelId, PropertyValue>;

struct Row {
  std::vector<Cell> cells;
  friend bool operator==(const Row&, const Row&) = default;
};

std::string render(const Cell& cell);

/// Matches the pattern inside `view`. Rows are ordered by the ids of the
/// matched elements along the path; rows with equal projections collapse to
/// the first.
std::vector<Row> evaluate_in_view(const Graph& graph, const access::View& view,
                                  const QueryAst& ast);

/// Evaluates under the query's AS role, else `default_role`.
std::vector<Row> evaluate(const Graph& graph, const access::RoleTable& roles, const QueryAst& ast,
                          const std::string& default_role = std::string(access::kAdminRole));

/// Filter equality: text, integer and boolean only.
bool literal_matches(const Literal& literal, const PropertyValue& value);

}  // namespace prkg::query
