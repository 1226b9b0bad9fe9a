#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prkg/cli.hpp"
#include "prkg/store.hpp"

using namespace prkg;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Sandbox {
 public:
  Sandbox() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("prkg-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
    env_["PRKG_DATA"] = (dir_ / "kg.json").string();
  }
  ~Sandbox() { std::filesystem::remove_all(dir_); }

  Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, env_, out, err);
    return {code, out.str(), err.str()};
  }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  cli::Environment& env() { return env_; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream(path(name)) << content;
  }

 private:
  std::filesystem::path dir_;
  cli::Environment env_;
};

}  // namespace

TEST_CASE("init then validate") {
  Sandbox s;
  CHECK(s.run({"init", "--owner", "Sunita"}).code == 0);
  auto r = s.run({"validate"});
  CHECK(r.code == 0);
  CHECK(r.out.find("0 orphans") != std::string::npos);
  CHECK(s.run({"init", "--owner", "Sunita"}).code == cli::kDomain);
}

TEST_CASE("usage errors exit 1") {
  Sandbox s;
  CHECK(s.run({}).code == cli::kUsage);
  CHECK(s.run({"frobnicate"}).code == cli::kUsage);
  CHECK(s.run({"node", "add"}).code == cli::kUsage);
  CHECK(s.run({"--format", "xml", "validate"}).code == cli::kUsage);
  CHECK(s.run({"--help"}).code == cli::kOk);
}

TEST_CASE("commands before init are I/O errors") {
  Sandbox s;
  auto r = s.run({"validate"});
  CHECK(r.code == cli::kIoOrParse);
  CHECK(r.err.find("init") != std::string::npos);
}

TEST_CASE("building and querying") {
  Sandbox s;
  s.run({"init", "--owner", "Sunita"});
  auto nlp = s.run({"node", "add", "--label", "Topic", "--prop", "name=NLP"});
  REQUIRE(nlp.code == 0);
  CHECK(nlp.out == "n2\n");
  auto rel = s.run({"rel", "add", "n1", "n2", "interest"});
  CHECK(rel.out == "r3\n");
  auto q = s.run({"query", "MATCH (s)-[:interest]->(t) RETURN t.name"});
  CHECK(q.code == 0);
  CHECK(q.out == "NLP\n");
  q = s.run({"--format", "lines", "query", "MATCH (s)-[r:interest]->(t) RETURN s, r, t.name"});
  CHECK(q.out == "[\"n1\",\"r3\",\"NLP\"]\n");
  q = s.run({"query", "MATCH (a RETURN a"});
  CHECK(q.code == cli::kIoOrParse);
  CHECK(q.err.find("1:10") != std::string::npos);

  CHECK(s.run({"rel", "add", "n1", "n9", "interest"}).code == cli::kDomain);
  CHECK(s.run({"rel", "add", "n1", "n2", "interest"}).code == cli::kDomain);
  auto warn = s.run({"rel", "add", "n2", "n1", "worksFor", "--start", "2018"});
  CHECK(warn.code == 0);
  CHECK(warn.err.find("warning") != std::string::npos);
  CHECK(s.run({"rel", "end", "r4", "2020-05"}).code == 0);
  CHECK(s.run({"rel", "end", "r4", "2021"}).code == cli::kDomain);
  CHECK(s.run({"rel", "add", "n1", "n2", "reads", "--start", "2018-13"}).code == cli::kDomain);
  CHECK(s.run({"node", "set", "n2", "--prop", "year=2019", "--unset", "name"}).code == 0);
  q = s.run({"query", "MATCH (t:Topic {year: 2019}) RETURN t, t.name"});
  CHECK(q.out == "n2 | null\n");
  CHECK(s.run({"link", "add", "n2", "wikidata", "https://www.wikidata.org/wiki/Q30642"}).code == 0);
  CHECK(s.run({"link", "add", "n2", "myspace", "https://x.org/"}).code == cli::kDomain);
  CHECK(s.run({"node", "delete", "n1"}).code == cli::kDomain);
  CHECK(s.run({"node", "delete", "n2"}).code == cli::kDomain);
  auto del = s.run({"node", "delete", "n2", "--cascade"});
  CHECK(del.out == "removed 3 elements\n");
  CHECK(s.run({"save"}).code == 0);
}

TEST_CASE("inbox workflow") {
  Sandbox s;
  s.run({"init", "--owner", "Sunita"});
  s.write("t.jsonl",
          R"({"head":"Sunita","head_label":"Researcher","rel":"interest","tail":"NLP","tail_label":"Topic","confidence":0.95,"source":"manual"})"
          "\n"
          R"({"head":"Sunita","head_label":"Researcher","rel":"interest","tail":"IR","tail_label":"Topic","confidence":0.5,"source":"manual"})"
          "\n"
          R"({"head":"Sunita","head_label":"Researcher","rel":"interest","tail":"DB","tail_label":"Topic","confidence":0.1,"source":"manual"})"
          "\n");
  auto r = s.run({"import", "triples", s.path("t.jsonl").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "merged 1, queued 1, dropped 1\n");
  auto list = s.run({"inbox", "list", "--state", "pending"});
  CHECK(list.out.find("#1 pending") == 0);
  CHECK(s.run({"inbox", "accept", "1"}).code == 0);
  CHECK(s.run({"inbox", "accept", "1"}).code == cli::kDomain);
  CHECK(s.run({"inbox", "reject", "7"}).code == cli::kDomain);
  list = s.run({"--format", "lines", "inbox", "list", "--state", "accepted"});
  CHECK(list.out.find("\"state\":\"accepted\"") != std::string::npos);
  CHECK(s.run({"inbox", "list", "--state", "maybe"}).code == cli::kDomain);

  s.write("broken.jsonl", "{\"head\":\"x\"}\n");
  r = s.run({"import", "triples", s.path("broken.jsonl").string()});
  CHECK(r.code == cli::kIoOrParse);
  CHECK(r.err.find("line 1") != std::string::npos);
  CHECK(s.run({"import", "triples", s.path("absent.jsonl").string()}).code == cli::kIoOrParse);
}

TEST_CASE("configuration") {
  Sandbox s;
  s.write("cfg.json", R"({"thresholds": {"accept": 0.8}})");
  auto config = cli::load_config(s.path("cfg.json"), s.env());
  CHECK(config.thresholds.accept == doctest::Approx(0.8));
  CHECK(config.thresholds.reject == doctest::Approx(0.25));
  CHECK(config.default_role == "admin");
  CHECK(config.data_path == s.env()["PRKG_DATA"]);

  auto defaults = cli::load_config(std::nullopt, {});
  CHECK(defaults.data_path == "prkg-snapshot.json");
  CHECK(defaults.rdf_base == "urn:prkg:");
  CHECK_FALSE(defaults.thresholds_configured);

  s.run({"init", "--owner", "Sunita"});
  s.write("t.jsonl",
          R"({"head":"Sunita","head_label":"Researcher","rel":"interest","tail":"NLP","tail_label":"Topic","confidence":0.85,"source":"manual"})"
          "\n");
  auto r = s.run({"--config", s.path("cfg.json").string(), "import", "triples",
                  s.path("t.jsonl").string()});
  CHECK(r.out.rfind("merged 1", 0) == 0);

  s.write("bad.json", R"({"thresholds": {"accept": 0.2, "reject": 0.5}})");
  r = s.run({"--config", s.path("bad.json").string(), "validate"});
  CHECK(r.code == cli::kIoOrParse);
  CHECK(r.err.find("reject < accept") != std::string::npos);
  s.write("junk.json", "{");
  CHECK(s.run({"--config", s.path("junk.json").string(), "validate"}).code == cli::kIoOrParse);
  s.env()["PRKG_CONFIG"] = s.path("junk.json").string();
  CHECK(s.run({"validate"}).code == cli::kIoOrParse);
  s.env().erase("PRKG_CONFIG");

  s.write("rel.json", R"({"extra_relations": [{"name": "likes", "src": ["Researcher"], "dst": ["Topic"]}]})");
  r = s.run({"--config", s.path("rel.json").string(), "rel", "add", "n2", "n1", "likes"});
  CHECK(r.code == 0);
  CHECK(r.err.find("likes") != std::string::npos);

  s.env()["PRKG_ROLE"] = "ghost";
  CHECK(s.run({"validate"}).code == cli::kDomain);
  CHECK(s.run({"--as", "admin", "validate"}).code == 0);
}

TEST_CASE("roles through the command line") {
  Sandbox s;
  s.run({"init", "--owner", "Sunita"});
  s.run({"node", "add", "--label", "Committee", "--prop", "name=PhDSel"});
  s.run({"rel", "add", "n1", "n2", "memberOf"});
  CHECK(s.run({"role", "copy", "collaborator", "admin"}).code == 0);
  CHECK(s.run({"deny", "collaborator", "read", "node-label", "Committee"}).code == 0);
  CHECK(s.run({"deny", "collaborator", "write", "graph"}).code == 0);
  CHECK(s.run({"grant", "collaborator", "fly", "graph"}).code == cli::kDomain);
  CHECK(s.run({"grant", "collaborator", "read", "node-label"}).code == cli::kDomain);
  CHECK(s.run({"grant", "admin", "read", "graph"}).code == cli::kDomain);
  CHECK(s.run({"role", "create", "collaborator"}).code == cli::kDomain);

  auto q = s.run({"--as", "collaborator", "query", "MATCH (c) RETURN c.name"});
  CHECK(q.out == "Sunita\n");
  auto d = s.run({"--as", "collaborator", "node", "delete", "n2", "--cascade"});
  CHECK(d.code == cli::kDomain);
  CHECK(d.err.find("denied: write") != std::string::npos);
  CHECK(s.run({"--as", "collaborator", "role", "create", "spy"}).code == cli::kDomain);
  CHECK(s.run({"--as", "collaborator", "query", "MATCH (c) AS admin RETURN c"}).code ==
        cli::kDomain);

  auto e = s.run({"export", "rdf", s.path("all.nt").string(), "--as", "collaborator"});
  CHECK(e.code == 0);
  std::ifstream in(s.path("all.nt"));
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("n2") == std::string::npos);
  CHECK(text.find("memberOf") == std::string::npos);
  auto v = s.run({"--as", "collaborator", "validate"});
  CHECK(v.out.find("0 orphans") == 0);
}
