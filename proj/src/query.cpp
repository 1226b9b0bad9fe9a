#include "prkg/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

namespace prkg::query {

QueryError::QueryError(std::size_t line, std::size_t column, std::string message,
                       std::set<std::string> expected)
    : Error(Errc::parse, [&] {
        std::string text =
            std::to_string(line) + ":" + std::to_string(column) + ": " + message;
        if (!expected.empty()) {
          text += " (expected";
          for (const auto& e : expected) text += " " + e;
          text += ")";
        }
        return text;
      }()),
      line_(line),
      column_(column),
      detail_(std::move(message)),
      expected_(std::move(expected)) {}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  QueryAst parse() {
    QueryAst ast;
    expect_keyword("MATCH");
    parse_path(ast);
    if (peek_keyword("AT")) {
      expect_keyword("AT");
      ast.at = parse_date();
    }
    if (peek_keyword("AS")) {
      expect_keyword("AS");
      ast.as_role = expect_ident("role name");
    }
    expect_keyword("RETURN");
    do {
      ReturnItem item;
      item.variable = expect_ident("variable");
      skip_ws();
      if (at('.')) {
        ++pos_;
        item.key = expect_ident("property key");
      }
      ast.items.push_back(std::move(item));
    } while (accept(","));
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input", {"','", "end of query"});
    return ast;
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::set<std::string> expected = {}) {
    fail_at(pos_, message, std::move(expected));
  }

  [[noreturn]] void fail_at(std::size_t offset, const std::string& message,
                            std::set<std::string> expected = {}) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw QueryError(line, column, message, std::move(expected));
  }

  std::string found() const {
    if (pos_ >= text_.size()) return "end of query";
    return "'" + std::string(1, text_[pos_]) + "'";
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

  bool starts(std::string_view token) {
    skip_ws();
    return text_.substr(pos_, token.size()) == token;
  }

  bool accept(std::string_view token) {
    if (!starts(token)) return false;
    pos_ += token.size();
    return true;
  }

  void expect(std::string_view token, std::set<std::string> also = {}) {
    if (accept(token)) return;
    also.insert("'" + std::string(token) + "'");
    fail("unexpected " + found(), std::move(also));
  }

  bool peek_keyword(std::string_view word) {
    if (!starts(word)) return false;
    std::size_t end = pos_ + word.size();
    return end >= text_.size() || !ident_char(text_[end]);
  }

  void expect_keyword(std::string_view word) {
    if (peek_keyword(word)) {
      pos_ += word.size();
      return;
    }
    fail("unexpected " + found(), {std::string(word)});
  }

  std::optional<std::string> try_ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return std::nullopt;
    std::size_t begin = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(begin, pos_ - begin));
  }

  std::string expect_ident(const std::string& what) {
    if (auto id = try_ident()) return *id;
    fail("unexpected " + found(), {what});
  }

  PartialDate parse_date() {
    skip_ws();
    std::size_t begin = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '-'))
      ++pos_;
    auto date = PartialDate::try_parse(text_.substr(begin, pos_ - begin));
    if (!date) fail_at(begin, "malformed date", {"YYYY", "YYYY-MM", "YYYY-MM-DD"});
    return *date;
  }

  Literal parse_literal() {
    skip_ws();
    if (at('"')) {
      std::size_t open = pos_++;
      std::string value;
      while (true) {
        if (pos_ >= text_.size()) fail_at(open, "unterminated string literal");
        char c = text_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (pos_ >= text_.size()) fail_at(open, "unterminated string literal");
          char e = text_[pos_++];
          switch (e) {
            case 'n':
              value += '\n';
              break;
            case 't':
              value += '\t';
              break;
            case '"':
            case '\\':
              value += e;
              break;
            default:
              fail_at(pos_ - 2, "unknown escape sequence");
          }
        } else {
          value += c;
        }
      }
      return value;
    }
    if (at('-') || (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))) {
      std::size_t begin = pos_;
      if (at('-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + begin, text_.data() + pos_, value);
      if (ec != std::errc() || ptr != text_.data() + pos_) fail_at(begin, "malformed integer");
      return value;
    }
    if (peek_keyword("true")) {
      pos_ += 4;
      return true;
    }
    if (peek_keyword("false")) {
      pos_ += 5;
      return false;
    }
    fail("unexpected " + found(), {"string", "integer", "true", "false"});
  }

  std::vector<PropertyFilter> parse_props() {
    std::vector<PropertyFilter> props;
    if (!accept("{")) return props;
    do {
      PropertyFilter filter;
      filter.key = expect_ident("property key");
      expect(":");
      filter.value = parse_literal();
      props.push_back(std::move(filter));
    } while (accept(","));
    expect("}", {"','"});
    return props;
  }

  NodePattern parse_node() {
    skip_ws();
    std::size_t open = pos_;
    expect("(");
    NodePattern node;
    node.variable = try_ident();
    if (accept(":")) node.label = expect_ident("label");
    node.properties = parse_props();
    skip_ws();
    if (!accept(")")) {
      std::set<std::string> expected{"')'"};
      if (node.properties.empty()) expected.insert("'{'");
      if (!node.label) expected.insert("':'");
      fail("unclosed '(' opened at column " + std::to_string(open + 1) + ", found " + found(),
           expected);
    }
    return node;
  }

  EdgePattern parse_edge(bool backward) {
    EdgePattern edge;
    edge.direction = backward ? EdgeDirection::backward : EdgeDirection::forward;
    edge.variable = try_ident();
    if (accept(":")) edge.rel_type = expect_ident("relationship type");
    edge.properties = parse_props();
    expect(backward ? "]-" : "]->");
    return edge;
  }

  void parse_path(QueryAst& ast) {
    ast.nodes.push_back(parse_node());
    while (true) {
      if (accept("<-[")) {
        ast.edges.push_back(parse_edge(true));
      } else if (accept("-[")) {
        ast.edges.push_back(parse_edge(false));
      } else {
        break;
      }
      ast.nodes.push_back(parse_node());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void check_semantics(const QueryAst& ast, std::string_view text) {
  std::map<std::string, bool> is_node;
  auto bind = [&](const std::optional<std::string>& var, bool node) {
    if (!var) return;
    auto [it, inserted] = is_node.emplace(*var, node);
    if (!inserted && it->second != node) {
      throw QueryError(1, 1, "variable '" + *var + "' names both a node and a relationship");
    }
  };
  for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
    bind(ast.nodes[i].variable, true);
    if (i < ast.edges.size()) bind(ast.edges[i].variable, false);
  }
  for (const auto& item : ast.items) {
    if (!is_node.count(item.variable)) {
      // Report the position of the offending return item.
      auto ret = text.rfind("RETURN");
      std::size_t offset = text.find(item.variable, ret == std::string_view::npos ? 0 : ret);
      std::size_t line = 1, column = 1;
      for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
          ++line;
          column = 1;
        } else {
          ++column;
        }
      }
      throw QueryError(line, column, "return variable '" + item.variable + "' is not bound");
    }
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

std::string literal_text(const Literal& literal) {
  if (const auto* s = std::get_if<std::string>(&literal)) return quote(*s);
  if (const auto* i = std::get_if<std::int64_t>(&literal)) return std::to_string(*i);
  return std::get<bool>(literal) ? "true" : "false";
}

std::string props_text(const std::vector<PropertyFilter>& props) {
  if (props.empty()) return "";
  std::string out = " {";
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (i) out += ", ";
    out += props[i].key + ": " + literal_text(props[i].value);
  }
  return out + "}";
}

std::string element_text(const std::optional<std::string>& var,
                         const std::optional<std::string>& type,
                         const std::vector<PropertyFilter>& props) {
  std::string out = var.value_or("");
  if (type) out += ":" + *type;
  return out + props_text(props);
}

// Matching --------------------------------------------------------------

struct Matcher {
  const Graph& graph;
  const access::View& view;
  const QueryAst& ast;
  std::vector<std::vector<std::uint64_t>> matches;
  std::vector<std::uint64_t> current;

  bool node_ok(const NodePattern& pattern, const Node& node) const {
    if (!view.node_visible(node.id)) return false;
    if (pattern.label && !node.has_label(*pattern.label)) return false;
    for (const auto& filter : pattern.properties) {
      const PropertyValue* value = node.property(filter.key);
      if (!value || !view.property_visible(node.id, filter.key)) return false;
      if (!literal_matches(filter.value, *value)) return false;
    }
    return true;
  }

  bool edge_ok(const EdgePattern& pattern, const Relationship& rel) const {
    if (!view.relationship_visible(rel.id)) return false;
    if (pattern.rel_type && rel.rel_type != *pattern.rel_type) return false;
    if (ast.at && !is_valid_at(rel.validity, *ast.at)) return false;
    for (const auto& filter : pattern.properties) {
      const PropertyValue* value = rel.property(filter.key);
      if (!value || !literal_matches(filter.value, *value)) return false;
    }
    return true;
  }

  void extend(std::size_t hop, NodeId at_node) {
    if (hop == ast.edges.size()) {
      matches.push_back(current);
      return;
    }
    const EdgePattern& edge = ast.edges[hop];
    const NodePattern& next_pattern = ast.nodes[hop + 1];
    for (const auto& [rid, rel] : graph.relationships()) {
      NodeId next;
      if (edge.direction == EdgeDirection::forward) {
        if (rel.src != at_node) continue;
        next = rel.dst;
      } else {
        if (rel.dst != at_node) continue;
        next = rel.src;
      }
      if (!edge_ok(edge, rel) || !node_ok(next_pattern, graph.node(next))) continue;
      current.push_back(rid.value);
      current.push_back(next.value);
      extend(hop + 1, next);
      current.pop_back();
      current.pop_back();
    }
  }

  void run() {
    for (const auto& [id, node] : graph.nodes()) {
      if (!node_ok(ast.nodes[0], node)) continue;
      current = {id.value};
      extend(0, id);
    }
  }
};

// Positions of each pattern element in a match tuple: node i at 2i, edge i at 2i+1.
bool bindings_consistent(const QueryAst& ast, const std::vector<std::uint64_t>& tuple) {
  std::map<std::string, std::uint64_t> seen;
  auto check = [&](const std::optional<std::string>& var, std::uint64_t id) {
    if (!var) return true;
    auto [it, inserted] = seen.emplace(*var, id);
    return inserted || it->second == id;
  };
  for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
    if (!check(ast.nodes[i].variable, tuple[2 * i])) return false;
    if (i < ast.edges.size() && !check(ast.edges[i].variable, tuple[2 * i + 1])) return false;
  }
  return true;
}

Cell project(const Graph& graph, const access::View& view, const QueryAst& ast,
             const std::vector<std::uint64_t>& tuple, const ReturnItem& item) {
  for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
    if (ast.nodes[i].variable == item.variable) {
      NodeId id{tuple[2 * i]};
      if (!item.key) return id;
      const PropertyValue* value = graph.node(id).property(*item.key);
      if (!value || !view.property_visible(id, *item.key)) return std::monostate{};
      return *value;
    }
    if (i < ast.edges.size() && ast.edges[i].variable == item.variable) {
      RelId id{tuple[2 * i + 1]};
      if (!item.key) return id;
      const PropertyValue* value = graph.relationship(id).property(*item.key);
      if (!value) return std::monostate{};
      return *value;
    }
  }
  return std::monostate{};
}

}  // namespace

QueryAst parse_query(std::string_view text) {
  QueryAst ast = Parser(text).parse();
  check_semantics(ast, text);
  return ast;
}

std::string to_string(const QueryAst& ast) {
  std::string out = "MATCH ";
  for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
    const NodePattern& node = ast.nodes[i];
    out += "(" + element_text(node.variable, node.label, node.properties) + ")";
    if (i < ast.edges.size()) {
      const EdgePattern& edge = ast.edges[i];
      std::string inner = element_text(edge.variable, edge.rel_type, edge.properties);
      out += edge.direction == EdgeDirection::forward ? "-[" + inner + "]->"
                                                       : "<-[" + inner + "]-";
    }
  }
  if (ast.at) out += " AT " + ast.at->to_string();
  if (ast.as_role) out += " AS " + *ast.as_role;
  out += " RETURN ";
  for (std::size_t i = 0; i < ast.items.size(); ++i) {
    if (i) out += ", ";
    out += ast.items[i].variable;
    if (ast.items[i].key) out += "." + *ast.items[i].key;
  }
  return out;
}

bool literal_matches(const Literal& literal, const PropertyValue& value) {
  if (const auto* s = std::get_if<std::string>(&literal)) {
    const auto* v = std::get_if<std::string>(&value);
    return v && *v == *s;
  }
  if (const auto* i = std::get_if<std::int64_t>(&literal)) {
    const auto* v = std::get_if<std::int64_t>(&value);
    return v && *v == *i;
  }
  const auto* v = std::get_if<bool>(&value);
  return v && *v == std::get<bool>(literal);
}

std::string render(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "null";
  if (const auto* n = std::get_if<NodeId>(&cell)) return to_string(*n);
  if (const auto* r = std::get_if<RelId>(&cell)) return to_string(*r);
  return render_text(std::get<PropertyValue>(cell));
}

std::vector<Row> evaluate_in_view(const Graph& graph, const access::View& view,
                                  const QueryAst& ast) {
  Matcher matcher{graph, view, ast, {}, {}};
  matcher.run();
  auto& tuples = matcher.matches;
  std::sort(tuples.begin(), tuples.end());
  std::vector<Row> rows;
  for (const auto& tuple : tuples) {
    if (!bindings_consistent(ast, tuple)) continue;
    Row row;
    for (const auto& item : ast.items) row.cells.push_back(project(graph, view, ast, tuple, item));
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Row> evaluate(const Graph& graph, const access::RoleTable& roles, const QueryAst& ast,
                          const std::string& default_role) {
  const access::Role& role = roles.role(ast.as_role.value_or(default_role));
  return evaluate_in_view(graph, access::view_as(graph, role), ast);
}

}  // namespace prkg::query
