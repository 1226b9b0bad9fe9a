#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixture.hpp"
#include "oracles.hpp"
#include "prkg/store.hpp"
#include "random.hpp"
#include "test_util.hpp"

using namespace prkg;
using namespace prkg::store;
using prkg::testing::code_of;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "prkg-store-test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("a fresh snapshot holds one node") {
  auto text = serialize_snapshot(State::fresh("Sunita"));
  CHECK(text.back() == '\n');
  CHECK(count_of(text, "\"labels\"") == 1);
  CHECK(text.rfind("{\n  \"format\": \"prkg-snapshot\",\n  \"version\": 1,", 0) == 0);
}

TEST_CASE("fixture round trip") {
  auto f = testing::sunita_fixture();
  testing::add_collaborator(f.state);
  auto path = scratch("fixture.json");
  save_snapshot(f.state, path);
  auto first = slurp(path);
  CHECK(count_of(first, "\"labels\"") == 14);
  CHECK(count_of(first, "\"src\"") == 13);
  State loaded = load_snapshot(path);
  CHECK(loaded == f.state);
  save_snapshot(loaded, path);
  CHECK(slurp(path) == first);
}

TEST_CASE("load rejects bad snapshots") {
  auto text = serialize_snapshot(testing::sunita_fixture().state);
  auto replace = [&](const std::string& from, const std::string& to) {
    auto copy = text;
    copy.replace(copy.find(from), from.size(), to);
    return copy;
  };
  CHECK(code_of([&] { parse_snapshot(replace("\"version\": 1", "\"version\": 99")); }) ==
        Errc::unsupported);
  CHECK(code_of([&] { parse_snapshot(replace("prkg-snapshot", "other")); }) == Errc::unsupported);
  CHECK(code_of([&] { parse_snapshot(replace("\"dst\": \"n3\"", "\"dst\": \"n99\"")); }) ==
        Errc::integrity);
  CHECK(code_of([&] { parse_snapshot(replace("\"end\": \"2018\"", "\"end\": \"2010\"")); }) ==
        Errc::integrity);
  CHECK(code_of([&] { parse_snapshot(text.substr(0, text.size() / 2)); }) == Errc::parse);
  CHECK(code_of([&] { load_snapshot(scratch("missing.json")); }) == Errc::io);
}

TEST_CASE("interrupted writes keep the old file") {
  auto path = scratch("atomic.txt");
  atomic_write(path, "old\n");
  CHECK_THROWS(atomic_write(path, "new\n", [] { throw Error(Errc::io, "injected"); }));
  CHECK(slurp(path) == "old\n");
  for (const auto& entry : std::filesystem::directory_iterator(path.parent_path()))
    CHECK(entry.path().filename().string().find(".tmp-") == std::string::npos);
  atomic_write(path, "new\n");
  CHECK(slurp(path) == "new\n");
}

TEST_CASE("random states round trip") {
  testing::Rng rng(41);
  for (int i = 0; i < 60; ++i) {
    State s = testing::random_state(rng);
    auto text = serialize_snapshot(s);
    State back = parse_snapshot(text);
    REQUIRE(back == s);
    REQUIRE(serialize_snapshot(back) == text);
  }
}

TEST_CASE("rdf encoding") {
  State s = State::fresh("Sunita");
  auto lines = rdf_lines(s.graph, access::full_view(s.graph));
  CHECK(lines == std::vector<std::string>{
                     "<urn:prkg:node/n1> <urn:prkg:meta/label> <urn:prkg:label/Researcher> .",
                     "<urn:prkg:node/n1> <urn:prkg:prop/name> \"Sunita\" ."});
  NodeId iacs = s.graph.add_node({"Institution"}, {{"name", std::string("IACS")}});
  RelId r = s.graph.add_relationship(s.graph.owner(), iacs, "worksFor",
                                     TemporalInterval::make(PartialDate::year(2018), std::nullopt));
  lines = rdf_lines(s.graph, access::full_view(s.graph));
  std::size_t rel_lines = 0;
  for (const auto& l : lines)
    if (l.rfind("<urn:prkg:rel/" + to_string(r) + ">", 0) == 0) ++rel_lines;
  CHECK(rel_lines == 4);
  CHECK(std::find(lines.begin(), lines.end(),
                  "<urn:prkg:rel/r3> <urn:prkg:meta/start> "
                  "\"2018\"^^<http://www.w3.org/2001/XMLSchema#gYear> .") != lines.end());
  CHECK(std::is_sorted(lines.begin(), lines.end()));

  s.graph.set_properties(iacs, {{"note", PropertyValue{std::string("say \"hi\"\n")}},
                                {"n", PropertyValue{std::int64_t{3}}}});
  lines = rdf_lines(s.graph, access::full_view(s.graph), "http://example.org/kg/");
  CHECK(std::find(lines.begin(), lines.end(),
                  "<http://example.org/kg/node/n2> <http://example.org/kg/prop/note> "
                  "\"say \\\"hi\\\"\\n\" .") != lines.end());
  CHECK(std::find(lines.begin(), lines.end(),
                  "<http://example.org/kg/node/n2> <http://example.org/kg/prop/n> "
                  "\"3\"^^<http://www.w3.org/2001/XMLSchema#integer> .") != lines.end());
}

TEST_CASE("collaborator export hides reviewing") {
  auto f = testing::sunita_fixture();
  testing::add_collaborator(f.state);
  auto path = scratch("collab.nt");
  auto n = export_rdf(f.state.graph, f.state.roles, std::string("collaborator"), path);
  auto text = slurp(path);
  CHECK(count_of(text, "\n") == n);
  CHECK(text.find("reltype/reviewerOf") == std::string::npos);
  CHECK(text.find("SpERT.PL") == std::string::npos);
  CHECK(text.find("PhDSel") == std::string::npos);
  CHECK(code_of([&] { export_rdf(f.state.graph, f.state.roles, std::string("ghost"), path); }) ==
        Errc::not_found);
}

TEST_CASE("rdf count law on random graphs") {
  testing::Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    Graph g = testing::random_graph(rng, {20, 30, false});
    auto role = testing::random_role(rng, g, 8, "r");
    auto view = testing::coin(rng) ? access::full_view(g) : access::view_as(g, role);
    REQUIRE(rdf_lines(g, view).size() == oracle::rdf_triple_count(g, view));
  }
}
