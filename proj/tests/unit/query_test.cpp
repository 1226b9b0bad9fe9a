#include <doctest.h>

#include "fixture.hpp"
#include "oracles.hpp"
#include "prkg/query.hpp"
#include "random.hpp"
#include "test_util.hpp"

using namespace prkg;
using namespace prkg::query;
using prkg::testing::code_of;

namespace {

std::set<std::string> column(const std::vector<Row>& rows) {
  std::set<std::string> out;
  for (const auto& row : rows) out.insert(render(row.cells.at(0)));
  return out;
}

std::vector<Row> run(const store::State& s, const std::string& text) {
  return evaluate(s.graph, s.roles, parse_query(text));
}

}  // namespace

TEST_CASE("parsing the documented shapes") {
  auto ast = parse_query(
      R"(MATCH (s:Researcher {name:"Sunita"})-[:interest]->(t:Topic) RETURN t.name)");
  REQUIRE(ast.nodes.size() == 2);
  REQUIRE(ast.edges.size() == 1);
  CHECK(ast.nodes[0].label == "Researcher");
  CHECK(ast.nodes[0].properties == std::vector<PropertyFilter>{{"name", std::string("Sunita")}});
  CHECK(ast.edges[0].rel_type == "interest");
  CHECK(ast.edges[0].direction == EdgeDirection::forward);
  CHECK(ast.items == std::vector<ReturnItem>{{"t", std::string("name")}});

  auto at = parse_query("MATCH (a)-[:worksFor]->(i) AT 2017 RETURN i.name");
  CHECK(at.at == PartialDate::year(2017));

  auto back = parse_query("MATCH (p:Paper)<-[w:writes {year: 2020, draft: true}]-(a) AS guest "
                          "RETURN a, w");
  CHECK(back.edges[0].direction == EdgeDirection::backward);
  CHECK(back.edges[0].variable == "w");
  CHECK(back.edges[0].properties.size() == 2);
  CHECK(back.as_role == "guest");

  auto spaced = parse_query("MATCH\n  ( a : Topic )\nRETURN\ta . name");
  CHECK(spaced.nodes[0].label == "Topic");
  CHECK(spaced.items[0].key == "name");
}

TEST_CASE("syntax errors carry a position and expectations") {
  try {
    parse_query("MATCH (a RETURN a");
    FAIL("accepted");
  } catch (const QueryError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 10);
    CHECK(e.expected().count("')'"));
    CHECK(e.code() == Errc::parse);
  }
  try {
    parse_query("MATCH (a)\n-[:x]->(b)\nRETURN c");
    FAIL("accepted");
  } catch (const QueryError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("c") != std::string::npos);
  }
  for (const char* bad : {"", "match (a) RETURN a", "MATCH RETURN a", "MATCH (a) RETURN",
                          "MATCH (a)-[:x]-(b) RETURN a", "MATCH (a) RETURN a,", "MATCH (a) AT 20 RETURN a",
                          "MATCH (a) AT 2018-13 RETURN a", "MATCH (a {k: 1.5}) RETURN a",
                          "MATCH (a)-[a]->(b) RETURN a", "MATCH (a) RETURN a extra",
                          "MATCH (a {k: \"x}) RETURN a", "MATCH (1a) RETURN a"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_query(bad); }) == Errc::parse);
  }
}

TEST_CASE("fixture queries") {
  auto f = testing::sunita_fixture();
  testing::add_collaborator(f.state);
  auto rows = run(f.state, R"(MATCH (s:Researcher {name:"Sunita"})-[:task]->(t:Task)-[:method]->(m:Method) RETURN m.name)");
  CHECK(column(rows) == std::set<std::string>{"CTM", "LDA"});
  CHECK(rows.size() == 2);
  rows = run(f.state, "MATCH (s)-[:worksFor]->(i:Institution) AT 2017 RETURN i.name");
  CHECK(column(rows) == std::set<std::string>{"IISER Kolkata"});
  rows = run(f.state, "MATCH (s)-[:reviewerOf]->(p:Paper) AS collaborator RETURN p.name");
  CHECK(rows.empty());
  rows = run(f.state, "MATCH (s)-[:reviewerOf]->(p:Paper) RETURN p.name");
  CHECK(column(rows) == std::set<std::string>{"ScienceKG"});
  rows = run(f.state, "MATCH (s)-[:interest]->(t) RETURN t.name");
  CHECK(column(rows) == std::set<std::string>{"NLP"});
  rows = run(f.state, "MATCH (w:Method)<-[:method]-(t)<-[:task]-(p:Paper) RETURN w.name, t.name");
  REQUIRE(rows.size() == 1);
  CHECK(render(rows[0].cells[1]) == "translation");
  rows = run(f.state, "MATCH (n:Paper) RETURN n.nothing");
  CHECK(rows.size() == 1);
  CHECK(render(rows[0].cells[0]) == "null");
  CHECK(code_of([&] { run(f.state, "MATCH (a) AS ghost RETURN a"); }) == Errc::not_found);
}

TEST_CASE("rows follow the matched ids and collapse duplicates") {
  auto f = testing::sunita_fixture();
  auto rows = run(f.state, "MATCH (s)-[r]->(t) RETURN s.name");
  REQUIRE(rows.size() == 4);  // Sunita, Topic Modeling, CCLINC, translation
  CHECK(render(rows[0].cells[0]) == "Sunita");
  CHECK(render(rows[1].cells[0]) == "Topic Modeling");
  rows = run(f.state, "MATCH (s)-[r]->(t) RETURN r");
  CHECK(rows.size() == 13);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = f.state.graph.relationship(std::get<RelId>(rows[i - 1].cells[0]));
    const auto& b = f.state.graph.relationship(std::get<RelId>(rows[i].cells[0]));
    CHECK(std::pair(a.src, a.id) < std::pair(b.src, b.id));
  }
}

TEST_CASE("homomorphic matching allows revisiting a node") {
  auto f = testing::sunita_fixture();
  auto rows = run(f.state, "MATCH (a)-[:worksFor]->(i)<-[:worksFor]-(b) RETURN a, b");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].cells[0] == rows[0].cells[1]);
  rows = run(f.state, "MATCH (a)-[:method]->(m)<-[:method]-(a) RETURN m.name");
  CHECK(rows.size() == 3);
}

TEST_CASE("masked properties behave as absent") {
  auto f = testing::sunita_fixture();
  f.state.roles.copy_role("guest", "admin");
  f.state.roles.add_rule("guest", {access::Effect::deny, access::Privilege::read,
                                   access::scope::NodeProperty{"Paper", "status"}});
  CHECK(run(f.state, R"(MATCH (p:Paper {status:"underReview"}) AS guest RETURN p)").empty());
  auto rows = run(f.state, R"(MATCH (p {name:"SpERT.PL"}) AS guest RETURN p.status)");
  REQUIRE(rows.size() == 1);
  CHECK(render(rows[0].cells[0]) == "null");
}

TEST_CASE("random queries: round trip, oracle, AT and view containment") {
  testing::Rng rng(31);
  for (int i = 0; i < 400; ++i) {
    Graph g = testing::random_graph(rng, {20, 25, testing::coin(rng)});
    QueryAst ast = testing::random_query(rng, 3);
    std::string text = to_string(ast);
    CAPTURE(text);
    REQUIRE(parse_query(text) == ast);

    access::Role role = testing::random_role(rng, g, 6, "r");
    auto view = testing::coin(rng) ? access::full_view(g) : access::view_as(g, role);
    auto rows = evaluate_in_view(g, view, ast);
    REQUIRE(rows == oracle::evaluate(g, view, ast));

    auto full = evaluate_in_view(g, access::full_view(g), ast);
    QueryAst plain = ast;
    plain.at.reset();
    auto without_at = evaluate_in_view(g, view, plain);
    for (const auto& row : rows) {
      CHECK(std::find(without_at.begin(), without_at.end(), row) != without_at.end());
    }
    // Masking can turn a value into null, so containment is checked on
    // queries that project no property.
    bool ids_only = std::all_of(ast.items.begin(), ast.items.end(),
                                [](const ReturnItem& it) { return !it.key; });
    if (ids_only) {
      for (const auto& row : rows)
        CHECK(std::find(full.begin(), full.end(), row) != full.end());
    }
  }
}
