#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gkflab/cli.hpp"

using namespace gkflab;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gkflab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) out.push_back(f);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gkflab-cli-test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("config documents") {
  std::istringstream good("# comment\nspace = rect:3,4\n\ndomain.u = 1  # trailing\n");
  const auto m = parse_config(good);
  CHECK(m.at("space") == "rect:3,4");
  CHECK(m.at("domain.u") == "1");

  std::istringstream unknown("space = rect:3,4\nfield.colour = red\n");
  try {
    parse_config(unknown);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("field.colour") != std::string::npos);
  }
  std::istringstream twice("mc.seed = 1\nmc.seed = 2\n");
  CHECK_THROWS_AS(parse_config(twice), ConfigError);
  std::istringstream no_eq("mc.seed 1\n");
  CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
  std::istringstream empty("mc.seed =\n");
  CHECK_THROWS_AS(parse_config(empty), ConfigError);
}

TEST_CASE("space strings") {
  CHECK(parse_space("rect:3,4").dim() == 2);
  CHECK(parse_space("point").dim() == 0);
  CHECK(parse_space("sphere:1").dim() == 2);
  CHECK(parse_space("ball:3,2").dim() == 3);
  CHECK(parse_space("cap:30").dim() == 2);
  CHECK(parse_space("rect:3,4", 4.0).metric_scale == 4.0);
  CHECK_THROWS_AS(parse_space("torus:1"), ConfigError);
  CHECK_THROWS_AS(parse_space("rect:3,-4"), ConfigError);
  CHECK_THROWS_AS(parse_space("rect:3,x"), ConfigError);
  CHECK_THROWS_AS(parse_space("cap:120"), ConfigError);
}

TEST_CASE("expect") {
  auto r = cli({"expect", "--space", "rect:10,10", "--lambda2", "1", "--domain", "halfline", "--u", "-8"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  CHECK(rows[0] == "u,i,predicted,term_0,term_1,term_2");
  CHECK(fields(rows[1])[2] == "1.000000");

  r = cli({"expect", "--space", "point", "--domain", "halfline", "--u", "0"});
  REQUIRE(r.code == 0);
  CHECK(fields(lines(r.out)[1])[2] == "0.500000");

  r = cli({"expect", "--space", "rect:3,4", "--domain", "fullspace", "--i", "1"});
  REQUIRE(r.code == 0);
  CHECK(fields(lines(r.out)[1])[2] == "7.000000");

  // several thresholds and orders make a table
  r = cli({"expect", "--space", "sphere:1", "--u", "0,1", "--i", "0,2"});
  REQUIRE(r.code == 0);
  rows = lines(r.out);
  CHECK(rows.size() == 5);
  CHECK(fields(rows[3])[0] == "1.000000");
  CHECK(fields(rows[3])[1] == "0");
  CHECK(fields(rows[3])[2] == "0.801252");

  r = cli({"expect", "--space", "rect:3,4", "--i", "3"});
  CHECK(r.code == 2);
  CHECK(r.err.find("expect.i") != std::string::npos);
  r = cli({"expect", "--space", "rect:3,4", "--domain", "blob"});
  CHECK(r.code == 2);
  CHECK(r.err.find("domain.kind") != std::string::npos);
  r = cli({"expect", "--u", "one"});
  CHECK(r.code == 2);
  CHECK(r.err.find("domain.u") != std::string::npos);
}

TEST_CASE("gmf") {
  auto r = cli({"gmf", "--domain", "halfline", "--u", "0", "--jmax", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "j,M_j\n0,0.500000\n1,0.398942\n2,0.000000\n");

  r = cli({"gmf", "--domain", "ballcomp", "--k", "2", "--u", "1", "--jmax", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "j,M_j\n0,0.606531\n1,0.606531\n");

  r = cli({"gmf", "--domain", "halfline", "--u", "1", "--jmax", "2", "--force-numeric",
           "--samples", "400000", "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows[0] == "j,M_j,stderr");
  const double closed[] = {0.158655, 0.241971, 0.241971};
  for (int j = 0; j <= 2; ++j) {
    const auto f = fields(rows[j + 1]);
    CHECK(std::abs(std::stod(f[1]) - closed[j]) <= 3 * std::stod(f[2]) + 1e-6);
  }
}

TEST_CASE("simulate") {
  const std::vector<std::string> base{"simulate", "--space", "rect:2,2", "--spacing", "0.2", "--ell", "1"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  const auto a = with({"--seed", "9"});
  const auto b = with({"--seed", "9"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out)[0] == "GKFLAB-FIELD v1 dims=11,11 spacing=0.200000 k=1 seed=9");
  CHECK(a.out != with({"--seed", "10"}).out);

  const auto two = with({"--seed", "9", "--k", "2"});
  REQUIRE(two.code == 0);
  const auto rows = lines(two.out);
  // header, 11 rows, blank separator, 11 rows
  CHECK(rows.size() == 1 + 11 + 1 + 11);
  CHECK(rows[12].empty());
  CHECK(rows[0].find("k=2") != std::string::npos);

  const auto bin = with({"--seed", "9", "--format", "binary"});
  REQUIRE(bin.code == 0);
  const auto header_end = bin.out.find('\n');
  CHECK(bin.out.size() - header_end - 1 == 121 * 8);

  CHECK(with({"--seed", "9", "--ell", "0.5"}).code == 2);
  CHECK(with({"--seed", "9", "--spacing", "0.3"}).code == 2);
  CHECK(with({}).code == 2);

  ::setenv("GKFLAB_SEED", "9", 1);
  CHECK(with({}).out == a.out);
  ::setenv("GKFLAB_SEED", "banana", 1);
  CHECK(with({}).code == 2);
  ::unsetenv("GKFLAB_SEED");

  const auto path = scratch("field.txt");
  const auto to_file = with({"--seed", "9", "--out", path.string()});
  REQUIRE(to_file.code == 0);
  CHECK(to_file.out.empty());
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  CHECK(ss.str() == a.out);
}

TEST_CASE("config files and precedence") {
  const auto path = scratch("expect.cfg");
  {
    std::ofstream os(path);
    os << "space = rect:3,4\ndomain.kind = fullspace\nexpect.i = 1\n";
  }
  auto r = cli({"expect", "--config", path.string()});
  REQUIRE(r.code == 0);
  CHECK(fields(lines(r.out)[1])[2] == "7.000000");
  // the flag wins over the file
  r = cli({"expect", "--config", path.string(), "--i", "2"});
  REQUIRE(r.code == 0);
  CHECK(fields(lines(r.out)[1])[2] == "12.000000");

  {
    std::ofstream os(path);
    os << "space = rect:3,4\n\nspace.colour = blue\n";
  }
  r = cli({"expect", "--config", path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(cli({"expect", "--config", scratch("missing.cfg").string()}).code == 2);

  // seed precedence: flag > file > environment
  const auto sim = scratch("sim.cfg");
  {
    std::ofstream os(sim);
    os << "space = rect:2,2\nmc.seed = 5\n";
  }
  ::setenv("GKFLAB_SEED", "6", 1);
  CHECK(lines(cli({"simulate", "--config", sim.string()}).out)[0].find("seed=5") != std::string::npos);
  CHECK(lines(cli({"simulate", "--config", sim.string(), "--seed", "7"}).out)[0].find("seed=7") !=
        std::string::npos);
  CHECK(lines(cli({"simulate", "--space", "rect:2,2"}).out)[0].find("seed=6") != std::string::npos);
  ::unsetenv("GKFLAB_SEED");
}

TEST_CASE("validate") {
  auto r = cli({"validate", "tube", "--domain", "halfline", "--u", "1", "--replicates", "200000"});
  CHECK(r.code == 0);
  CHECK(lines(r.out).back() == "PASS");
  CHECK(lines(r.out)[0] == "label,predicted,empirical_mean,stderr,z,replicates,wall_time,passed");

  CHECK(cli({"validate", "ec", "--replicates", "1"}).code == 2);
  CHECK(cli({"validate", "bogus"}).code == 2);
  CHECK(cli({"validate", "ec", "--spacing", "0.5", "--replicates", "3"}).code == 2);

  r = cli({"validate", "kff", "--alpha", "90", "--beta", "90", "--replicates", "500"});
  CHECK(r.code == 0);
  bool found = false;
  for (const auto& row : lines(r.out)) {
    const auto f = fields(row);
    if (!f.empty() && f[0] == "chi") {
      CHECK(f[2] == "12.566371");
      found = true;
    }
  }
  CHECK(found);

  // an honest FAIL: exact KS distances listed in increasing n order reversed
  r = cli({"validate", "poincare", "--n", "100,10", "--replicates", "20", "--mesh-level", "1"});
  CHECK(r.code == 1);
  CHECK(lines(r.out).back() == "FAIL");

  const auto prefix = scratch("report");
  r = cli({"validate", "volume", "--u", "-8", "--replicates", "3", "--format", "json", "--out",
           prefix.string()});
  REQUIRE(r.code == 0);
  std::ifstream js(prefix.string() + ".json"), csv(prefix.string() + ".csv");
  REQUIRE(js);
  REQUIRE(csv);
  const auto doc = nlohmann::json::parse(js);
  CHECK(doc["verdict"] == "PASS");
  CHECK(doc["cases"][0]["empirical_mean"] == 100.0);
  std::string head;
  std::getline(csv, head);
  CHECK(head == "label,predicted,empirical_mean,stderr,z,replicates,wall_time,passed");
  // stdout carries the JSON followed by the verdict
  CHECK(r.out.front() == '{');
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"expect", "--no-such-flag"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}
