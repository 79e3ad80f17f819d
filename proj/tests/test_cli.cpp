#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "oneperc/grid.hpp"
#include "oneperc/lp.hpp"
#include "oneperc/relaxation.hpp"

using namespace oneperc;
using namespace oneperc::cli;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("oneperc_cli_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST(Cli, LowerBounds) {
  const CommandResult r = cmd_lower_bounds({});
  EXPECT_EQ(r.exit_code, kEstablished);
  EXPECT_NEAR(r.data.at("combined").get<double>(), 0.555197, 1e-6);
  EXPECT_NEAR(r.data.at("udlra_at").get<double>(), 0.555440, 1e-6);
  EXPECT_NE(r.text.find("0.555440"), std::string::npos);
  LowerBoundOptions zero;
  zero.udlra_site = 0.0;
  EXPECT_EQ(cmd_lower_bounds(zero).data.at("udlra_at").get<double>(), 1.0);
  zero.dfh_site = 2.0;
  EXPECT_THROW(cmd_lower_bounds(zero), std::invalid_argument);
}

TEST(Cli, VerifyModelsCodes) {
  const CommandResult ok = cmd_verify_models({});
  EXPECT_EQ(ok.exit_code, kEstablished);
  EXPECT_TRUE(ok.data.at("all_pass").get<bool>());
  EXPECT_EQ(ok.data.at("models").size(), 3U);

  VerifyModelsOptions fixture;
  fixture.models = {{ModelKind::planted, 0.5}};
  EXPECT_EQ(cmd_verify_models(fixture).exit_code, kNotEstablished);

  VerifyModelsOptions degenerate;
  degenerate.models = {{ModelKind::signs, 1.0}};
  EXPECT_EQ(cmd_verify_models(degenerate).exit_code, kEstablished);

  VerifyModelsOptions big;
  big.width = 5;
  EXPECT_THROW(cmd_verify_models(big), std::invalid_argument);
}

TEST(Cli, VerifyModelsCsvSchema) {
  const CommandResult r = cmd_verify_models({});
  std::istringstream in(r.render(Format::csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "model,windows,independent,max_marginal_error,max_total_error,pass");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Cli, Table1CertainStart) {
  Table1Options o;
  o.start = 1.0;
  const CommandResult r = cmd_table1(o);
  EXPECT_EQ(r.exit_code, kEstablished);
  EXPECT_EQ(r.data.at("rows").size(), 1U);
  EXPECT_EQ(*r.csv, "i,p_i,p_i_prime\n0,1.000000,1.000000\n");
  const json& row = r.data.at("rows")[0];
  for (const char* k : {"i", "p", "p_prime", "certificate_hash"}) EXPECT_TRUE(row.contains(k)) << k;
}

TEST(Cli, FixturesJson) {
  const CommandResult r = cmd_fixtures();
  EXPECT_EQ(r.exit_code, kEstablished);
  EXPECT_TRUE(r.data.at("ten_pattern_cover").get<bool>());
  const json& g = r.data.at("graphs");
  ASSERT_EQ(g.size(), 3U);
  EXPECT_EQ(g[0].at("subsets"), 16);
  EXPECT_EQ(g[1].at("subsets"), 4096);
  EXPECT_EQ(g[2].at("subsets"), 1024);
  EXPECT_TRUE(g[2].contains("good_pair"));
  EXPECT_FALSE(g[0].contains("good_pair"));
}

TEST(Cli, CertificateRoundTrip) {
  CertificateOptions o;
  o.graph = "q2";
  o.p = 0.8;
  const CommandResult r = cmd_certificate(o);
  EXPECT_EQ(r.exit_code, kEstablished);
  const json j = json::parse(r.render(Format::json));
  for (const char* k : {"problem_hash", "bound", "dual_vector", "residuals"}) EXPECT_TRUE(j.contains(k)) << k;
  // Re-verify from the exported record alone.
  const LinearProgramSpec lp = build_connectivity_lp(build_hypercube(2), 0.8);
  EXPECT_EQ(j.at("problem_hash").get<std::string>(), hex64(problem_hash(lp)));
  BoundCertificate cert = make_certificate(lp, j.at("dual_vector").get<std::vector<double>>());
  EXPECT_TRUE(verify_lower_bound(lp, cert, 1e-9));
  EXPECT_GE(cert.certified_bound, j.at("bound").get<double>() - 1e-12);
  o.graph = "q9";
  EXPECT_THROW(cmd_certificate(o), std::invalid_argument);
}

TEST(Cli, SimulateIsDeterministic) {
  ExperimentConfig c;
  c.N = 32;
  c.T = 6;
  c.seed = 5;
  const CommandResult a = cmd_simulate(c);
  const CommandResult b = cmd_simulate(c);
  EXPECT_EQ(a.data.at("outcomes"), b.data.at("outcomes"));
  EXPECT_EQ(a.data.at("p_value"), b.data.at("p_value"));
  EXPECT_EQ(a.exit_code, a.data.at("passes").get<bool>() ? kEstablished : kNotEstablished);
  c.model = {ModelKind::planted, 0.5};
  EXPECT_THROW(cmd_simulate(c), std::invalid_argument);
}

TEST(Cli, ManifestReferencesEveryOutput) {
  const auto dir = fresh_dir("manifest");
  const CommandResult r = cmd_lower_bounds({});
  const WrittenFiles w = write_outputs(r, Format::csv, dir, 0.5);
  ASSERT_EQ(w.outputs.size(), 2U);
  const json m = json::parse(slurp(w.manifest));
  EXPECT_EQ(m.at("subcommand"), "lower-bounds");
  EXPECT_EQ(m.at("config"), r.config);
  EXPECT_EQ(m.at("tool_version"), tool_version());
  EXPECT_EQ(m.at("exit_code"), 0);
  EXPECT_TRUE(m.contains("wall_seconds"));
  EXPECT_TRUE(m.contains("input_hash"));
  ASSERT_EQ(m.at("outputs").size(), 2U);
  std::set<std::string> listed;
  for (const auto& o : m.at("outputs")) {
    const std::string body = slurp(dir / o.at("path").get<std::string>());
    EXPECT_EQ(o.at("fnv1a").get<std::string>(), hex64(fnv1a(body)));
    EXPECT_EQ(o.at("bytes").get<std::size_t>(), body.size());
    listed.insert(o.at("path").get<std::string>());
  }
  EXPECT_TRUE(listed.count("lower-bounds.csv"));
  EXPECT_TRUE(listed.count("lower-bounds.json"));

  // Reruns differ only in the timestamp and timing fields.
  const auto dir2 = fresh_dir("manifest2");
  const json m2 = json::parse(slurp(write_outputs(r, Format::csv, dir2, 0.7).manifest));
  json a = m, b = m2;
  for (auto* j : {&a, &b}) {
    j->erase("finished_at");
    j->erase("wall_seconds");
  }
  EXPECT_EQ(a, b);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST(Cli, Fnv1aVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(parse_format("csv"), Format::csv);
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
}
