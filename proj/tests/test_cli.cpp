#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "condense/sources.hpp"
#include "oracles.hpp"

using namespace condense;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  nlohmann::json report;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "condense");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::main_with_args(static_cast<int>(argv.size()), argv.data(), out, err);
  nlohmann::json rep;
  if (!out.str().empty() && out.str()[0] == '{') rep = nlohmann::json::parse(out.str());
  return {code, rep, err.str()};
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "condense_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

nlohmann::json without_timing(const nlohmann::json& r) { return cli::strip_timing(r); }

}  // namespace

TEST(CliExtract23, RandomBatchMeetsTheFloor) {
  auto r = run_cli({"audit-extract23", "--random", "100", "--n", "4", "--rng-seed", "7", "--detail"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.report["pass"]);
  ASSERT_EQ(r.report["items"].size(), 100u);
  // regenerate the same functions and recount each bias from the emitted source
  std::mt19937_64 rng(7);
  for (auto& item : r.report["items"]) {
    auto f = BlockFunctionTable::random(4, 3, 1, rng);
    auto src = fishela_from_json(item["certificate"]["source"]);
    auto out = oracle::fishela_output_bruteforce(f, src);
    Rational bias = out.prob(0) - make_rational(1, 2);
    if (bias < 0) bias = -bias;
    EXPECT_EQ(parse_rational(item["bias"].get<std::string>()), bias);
    EXPECT_GE(bias, make_rational(2, 25));
  }
}

TEST(CliExtract23, ConstantFixtureHasBiasOneHalf) {
  auto path = temp_file("zero_n3.bin");
  write_bytes(path, std::vector<std::uint8_t>(512, 0));
  auto r = run_cli({"audit-extract23", "--n", "3", "--fn-file", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["items"][0]["bias"], "1/2");
  EXPECT_EQ(r.report["summary"]["min_bias"], "1/2");
}

TEST(CliExtract23, ReportsAreReproducible) {
  std::vector<std::string> args = {"audit-extract23", "--random", "20", "--n", "4", "--rng-seed", "11"};
  auto a = run_cli(args), b = run_cli(args);
  EXPECT_EQ(without_timing(a.report).dump(), without_timing(b.report).dump());
  args.insert(args.end(), {"--workers", "3"});
  auto c = run_cli(args);
  auto ja = without_timing(a.report), jc = without_timing(c.report);
  ja["config"].erase("workers");
  jc["config"].erase("workers");
  EXPECT_EQ(ja.dump(), jc.dump());
}

TEST(CliCondense, ConstantFunctionFixesOneOutput) {
  auto path = temp_file("const_n3_l2_t6.bin");
  write_bytes(path, std::vector<std::uint8_t>(64, 9));
  auto r = run_cli({"audit-condense", "--n", "3", "--ell", "2", "--t", "6", "--fn-file", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["items"][0]["hit_prob"], "1/1");
  EXPECT_EQ(r.report["items"][0]["heavy_set_size"], 1);
}

TEST(CliCondense, RandomBatchesHoldTheRate) {
  for (std::string kind : {"one-ell", "nosf23"}) {
    std::vector<std::string> args = {"audit-condense", "--construction", kind, "--random", "10",
                                     "--n", kind == "nosf23" ? "4" : "3", "--ell", "2", "--t", "6",
                                     "--rng-seed", "5"};
    auto a = run_cli(args), b = run_cli(args);
    ASSERT_EQ(a.code, 0) << kind << ": " << a.err;
    EXPECT_EQ(without_timing(a.report).dump(), without_timing(b.report).dump());
    unsigned total = 0;
    for (auto& [name, count] : a.report["summary"]["cases"].items()) total += count.get<unsigned>();
    EXPECT_EQ(total, 10u);
    for (auto& item : a.report["items"])
      EXPECT_LE(item["smooth_bits"].get<double>(), item["claimed_bits"].get<double>() + 1e-9);
  }
}

TEST(CliCondense, OversizedFunctionsAreRefused) {
  auto r = run_cli({"audit-condense", "--n", "9", "--ell", "3", "--random", "1", "--rng-seed", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("2^27"), std::string::npos);
}

TEST(CliSampled, FullInclusionIsDegenerate) {
  auto r = run_cli({"condense", "--n", "6", "--k", "3", "--m-bits", "4", "--p", "1", "--gamma", "0.1", "--R", "100",
                    "--trials", "5", "--rng-seed", "1"});
  auto& audit = r.report["results"]["audit"];
  EXPECT_EQ(audit["set_size"]["min"], 16);
  EXPECT_EQ(audit["set_size"]["max"], 16);
  // every input reaches every output, so one output already catches the position-3 adversary
  EXPECT_EQ(r.code, 2);
  for (auto& c : r.report["checks"])
    EXPECT_EQ(c["pass"].get<bool>(), c["name"] != "adversary.position3") << c["name"];
}

TEST(CliSampled, ScaledAuditIsReproducible) {
  std::vector<std::string> args = {"condense", "--n", "10", "--k", "5", "--m-bits", "8", "--p", "0.125",
                                   "--trials", "10", "--rng-seed", "4"};
  auto a = run_cli(args), b = run_cli(args);
  EXPECT_NE(a.code, 1) << a.err;
  EXPECT_EQ(without_timing(a.report).dump(), without_timing(b.report).dump());
  EXPECT_EQ(a.report["results"]["audit"]["subset_tv"].size(), 10u);
}

TEST(CliSampled, PaperProfileChecksConstraints) {
  auto r = run_cli({"condense", "--profile", "paper", "--n", "40", "--k", "27", "--eps", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["checks"].size(), 8u);
  EXPECT_TRUE(r.report["results"]["sampling"]["refused"]);
  auto bad = run_cli({"condense", "--profile", "paper", "--n", "40", "--k", "10", "--eps", "0.1"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("smallest feasible k"), std::string::npos);
}

TEST(CliCover, CompleteGraphAndMatching) {
  auto complete = temp_file("complete.json");
  write_text(complete, R"({"graph":{"n_left":4,"n_right":2,"adjacency":[[0,1],[0,1],[0,1],[0,1]]}})");
  auto r = run_cli({"cover", "--in", complete.string(), "--c0", "1", "--delta", "1", "--c1", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["results"]["steps"], 1);
  auto matching = temp_file("matching.json");
  write_text(matching, R"({"graph":{"n_left":4,"n_right":4,"adjacency":[[0],[1],[2],[3]]}})");
  r = run_cli({"cover", "--in", matching.string(), "--c0", "1", "--delta", "0", "--c1", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["results"]["steps"], 2);
}

TEST(CliCover, BrokenCertificateIsAnOperationalError) {
  auto path = temp_file("sparse.json");
  write_text(path, R"({"graph":{"n_left":2,"n_right":4,"adjacency":[[0],[]]}})");
  auto r = run_cli({"cover", "--in", path.string(), "--c0", "1", "--delta", "0", "--c1", "0.5"});
  EXPECT_EQ(r.code, 1);
}

TEST(CliEntropy, UniformAndPointMass) {
  auto uni = temp_file("uniform3.json");
  write_text(uni, to_json(Dist::uniform(3)).dump());
  auto r = run_cli({"entropy", "--in", uni.string(), "--eps", "0.25", "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(r.report["results"]["smooth_bits"].get<double>(), 3.0);
  EXPECT_TRUE(r.report["results"]["heavy_set"].is_null());

  auto point = temp_file("point.json");
  write_text(point, R"({"t":2,"mass":{"2":"1/1"}})");
  r = run_cli({"entropy", "--in", point.string(), "--eps", "0.5", "--k", "1.000000001"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["results"]["cap"], "1/2");
  EXPECT_EQ(r.report["results"]["heavy_set"], nlohmann::json::array({2}));
}

TEST(CliExitCodes, OperationalErrors) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"audit-extract23", "--random", "3"}).code, 1);  // no seed
  auto path = temp_file("short.bin");
  write_bytes(path, std::vector<std::uint8_t>(100, 0));
  EXPECT_EQ(run_cli({"audit-extract23", "--n", "3", "--fn-file", path.string()}).code, 1);
  EXPECT_EQ(run_cli({"entropy", "--in", "/nonexistent/d.json"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(CliOutput, CsvAndOutFiles) {
  auto out = temp_file("report.json"), csv = temp_file("summary.csv");
  auto r = run_cli({"audit-extract23", "--random", "3", "--n", "3", "--rng-seed", "2", "--out", out.string(), "--csv",
                    csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream j(out);
  auto rep = nlohmann::json::parse(j);
  EXPECT_EQ(rep["schema_version"], cli::kSchemaVersion);
  EXPECT_EQ(rep["items"].size(), 3u);
  std::ifstream c(csv);
  std::string header;
  std::getline(c, header);
  EXPECT_EQ(header, "index,case,bias,bias_value,verified");
  int rows = 0;
  for (std::string line; std::getline(c, line);) ++rows;
  EXPECT_EQ(rows, 3);
}
