#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "factorfuse/cli.hpp"
#include "json.hpp"
#include "xml_check.hpp"

using namespace factorfuse;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("factorfuse_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "factorfuse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("CSV parsing follows RFC 4180") {
  const auto t = cli::parse_csv("\xEF\xBB\xBF" "a,b\r\n\"x, \"\"y\"\"\",2\r\n\"multi\nline\",3\n,\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][0] == "x, \"y\"");
  CHECK(t.rows[1][0] == "multi\nline");
  CHECK(t.rows[2] == std::vector<std::string>{"", ""});
  CHECK_THROWS_AS(cli::parse_csv("a,b\n1\n"), Error);
  CHECK_THROWS_AS(cli::parse_csv("a\n\"open\n"), Error);
  CHECK(cli::csv_field("p,q") == "\"p,q\"");
  CHECK(cli::csv_field("(a)(b)") == "(a)(b)");
}

TEST_CASE("level abbreviation") {
  const auto a = cli::abbreviate_levels({"Sweden", "Switzerland", "Poland", "Portugal", "Swaziland", "Swtz"});
  CHECK(a[0] == "Sweden");
  CHECK(a[1] == "Swtz2");  // "Swtz" itself is a level
  CHECK(a[2] == "Poland");
  CHECK(a[3] == "Prtg");
  CHECK(a[4] == "Swzl");
  CHECK(cli::abbreviate_levels({"Argentina", "Argentine"}) == std::vector<std::string>{"Argn", "Argn2"});
  CHECK(cli::abbreviate_levels({"Aeiouae"}) == std::vector<std::string>{"Aeio"});
}

TEST_CASE("merge writes every artefact and the JSON reproduces history.csv") {
  const auto dir = scratch("merge");
  spit(dir / "in.csv",
       "country,score\nAustralia,1.0\nAustralia,1.4\nAustralia,\nBelgium,2.2\nBelgium,2.9\nNA,4\nChile,5.1\nChile,4.2\n"
       "Belgium,2.5\nChile,4.8\nAustralia,0.8\n");
  REQUIRE(run({"merge", "--input", (dir / "in.csv").string(), "--response", "score", "--factor", "country", "--out",
               (dir / "out").string(), "--response-panel", "boxplot", "--panel-grid", "--show-split"}) == 0);
  for (const char* f : {"result.json", "history.csv", "partition.csv", "merging_path.svg", "gic.svg"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  const auto doc = nlohmann::json::parse(slurp(dir / "out" / "result.json"));
  CHECK(doc["schemaVersion"] == 1);
  CHECK(doc["input"]["rowsRead"] == 11);
  CHECK(doc["input"]["rowsAccepted"] == 9);
  CHECK(doc["input"]["droppedRows"] == nlohmann::json::array({3, 6}));

  std::vector<HistoryRow> rows;
  for (const auto& h : doc["history"]) {
    rows.push_back({h["step"].get<int>(), h["groupA"].get<std::string>(), h["groupB"].get<std::string>(),
                    h["model"].get<double>(), h["pvalVsFull"].get<double>(), h["pvalVsPrevious"].get<double>()});
  }
  CHECK(cli::history_csv(rows) == slurp(dir / "out" / "history.csv"));
  CHECK(slurp(dir / "out" / "partition.csv").rfind("orig,pred,level\n(Astr),", 0) == 0);

  const auto svg = xmlcheck::check(slurp(dir / "out" / "merging_path.svg"));
  REQUIRE(svg.ok);
  CHECK(svg.by_id("node-(Astr)"));
}

TEST_CASE("two levels give a two-row history") {
  const auto dir = scratch("two");
  spit(dir / "in.csv", "g,y\na,1\na,2\nb,3\nb,5\n");
  REQUIRE(run({"merge", "--input", (dir / "in.csv").string(), "--response", "y", "--factor", "g", "--out",
               (dir / "out").string()}) == 0);
  std::istringstream h(slurp(dir / "out" / "history.csv"));
  std::string line;
  int lines = 0;
  std::getline(h, line);
  CHECK(line == "step,groupA,groupB,model,pvalVsFull,pvalVsPrevious");
  while (std::getline(h, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("exit codes by error class") {
  const auto dir = scratch("exit");
  spit(dir / "in.csv", "g,y,t,e\na,1,1,1\na,2,2,1\nb,3,3,0\nb,x,4,0\n");
  const auto in = (dir / "in.csv").string();
  const auto out = (dir / "out").string();
  std::string err;
  CHECK(run({"merge", "--input", in, "--response", "y", "--factor", "g", "--method", "greedy", "--out", out}, &err) == 2);
  CHECK(err.find("InvalidStrategy") != std::string::npos);
  CHECK(run({"merge", "--input", in, "--response", "nope", "--factor", "g", "--out", out}) == 3);
  CHECK(run({"merge", "--input", in, "--response", "y", "--factor", "g", "--out", out}, &err) == 3);
  CHECK(err.find("row 4") != std::string::npos);
  CHECK(run({"merge", "--input", in, "--family", "binomial", "--response", "y", "--factor", "g",
             "--response-panel", "boxplot", "--out", out}) == 2);
  CHECK(run({"merge", "--input", in, "--family", "survival", "--time", "t", "--event", "e", "--factor", "g", "--out",
             out}) == 4);
  CHECK(run({"merge", "--bogus"}) == 2);
  CHECK(run({"fixture", "--k", "1", "--out", out}) == 2);
}

TEST_CASE("fixtures are deterministic and record their plan") {
  const auto a = scratch("fx_a");
  const auto b = scratch("fx_b");
  for (const auto& d : {a, b}) {
    REQUIRE(run({"fixture", "--kind", "binomial", "--k", "6", "--n", "20", "--clusters", "3", "--separation", "1.5",
                 "--seed", "1", "--out", d.string()}) == 0);
  }
  CHECK(slurp(a / "fixture.csv") == slurp(b / "fixture.csv"));
  CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
  const auto truth = nlohmann::json::parse(slurp(a / "truth.json"));
  CHECK(truth["plantedClusters"] == 3);
  CHECK(truth["partition"]["G01"] == 0);
  CHECK(truth["partition"]["G06"] == 2);

  FixtureSpec flat;
  flat.separation = 0.0;
  flat.k = 5;
  CHECK(make_fixture(flat).planted_clusters == 1);
  for (auto kind : {FixtureKind::Gaussian, FixtureKind::Binomial, FixtureKind::Survival, FixtureKind::GaussianNd}) {
    FixtureSpec spec;
    spec.kind = kind;
    spec.k = 3;
    spec.n_per_group = 4;
    const auto fx = make_fixture(spec);
    CHECK(fx.data.size() == 12);
    CHECK(cli::parse_csv(fx.csv()).rows.size() == 12);
  }
}

TEST_CASE("planted four-group fixture is recovered end to end") {
  const auto dir = scratch("planted");
  REQUIRE(run({"fixture", "--k", "4", "--n", "200", "--separation", "5", "--seed", "3", "--out", dir.string()}) == 0);
  REQUIRE(run({"merge", "--input", (dir / "fixture.csv").string(), "--response", "y", "--factor", "group", "--out",
               (dir / "out").string()}) == 0);
  const auto truth = nlohmann::json::parse(slurp(dir / "truth.json"))["partition"];
  const auto table = cli::parse_csv(slurp(dir / "out" / "partition.csv"));
  std::map<int, std::string> cluster_label;
  std::set<std::string> labels;
  for (const auto& row : table.rows) {
    const int planted = truth[row[2]].get<int>();
    if (!cluster_label.count(planted)) cluster_label[planted] = row[1];
    CHECK(cluster_label[planted] == row[1]);
    labels.insert(row[1]);
  }
  CHECK(labels.size() == 4);
}

TEST_CASE("bench reports every strategy for each k") {
  cli::BenchConfig config;
  config.kmax = 8;
  config.n_per_group = 5;
  const auto csv = cli::parse_csv(cli::cmd_bench(config));
  CHECK(csv.header == std::vector<std::string>{"strategy", "k", "evaluations", "wallMillis"});
  REQUIRE(csv.rows.size() == 8);
  CHECK(csv.rows[0][0] == "adaptive");
  CHECK(csv.rows[0][2] == std::to_string(4 + 1 + 3 + 6));
}

TEST_CASE("shortest round-trip number formatting") {
  for (double v : {0.1, -256.59369979524536, 1e-300, 3.0}) CHECK(std::stod(cli::format_double(v)) == v);
  CHECK(cli::format_double(1.0) == "1");
}
