#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ggqm/io.hpp"

using namespace ggqm;
namespace fs = std::filesystem;

namespace {

const std::string cli = GGQM_CLI;
const std::string src = GGQM_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("ggqm_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const fs::path& dir) {
    std::string cmd = "cd '" + src + "' && '" + cli + "' " + args + " > '" + (dir / "stdout").string() + "' 2> '" + (dir / "stderr").string() + "'";
    int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file((dir / "stdout").string())};
}

std::vector<json> records(const fs::path& dir) {
    std::ifstream in(dir / "results.jsonl");
    std::vector<json> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

}  // namespace

TEST(Io, ShippedIsotopiesLoad) {
    for (const auto& entry : fs::directory_iterator(fs::path(src) / "examples_src" / "isotopies")) {
        Isotopy iso = load_isotopy(entry.path().string());
        EXPECT_FALSE(iso.id.empty()) << entry.path();
    }
    auto id = load_isotopy(src + "/examples_src/isotopies/identity_disc.json");
    EXPECT_TRUE(id.pieces.empty());
    auto tw = load_isotopy(src + "/examples_src/isotopies/disc_full_twist.json");
    EXPECT_EQ(extract_braid(build_loops(tw, {{-0.2, 0.05}, {0.25, -0.05}}, tw.model)).letters, (Word{1, 1}));
    EXPECT_THROW(load_isotopy(src + "/no/such/file.json"), std::runtime_error);
    EXPECT_THROW(parse_isotopy(json::parse(R"({"id":"x","surface":"sphere","pieces":[]})")), std::invalid_argument);
}

TEST(Io, KeyValueConfig) {
    auto kv = parse_key_values("# comment\nn = 3\nqm = lk:1,2; expsum\n\nbasepoints = 0.1,0; -0.1,0\n");
    RunConfig c;
    apply_key_values(c, kv);
    EXPECT_EQ(c.n, 3);
    EXPECT_EQ(c.qms, (std::vector<std::string>{"lk:1,2", "expsum"}));
    ASSERT_EQ(c.basepoints.size(), 2u);
    EXPECT_DOUBLE_EQ(c.basepoints[1].x, -0.1);
    EXPECT_EQ(parse_int_list("1, 2,4"), (std::vector<int>{1, 2, 4}));
    EXPECT_THROW(apply_key_values(c, {{"colour", "red"}}), std::invalid_argument);
    // the hash depends on the config only
    auto a = result_record("estimate", "t", c.to_json(), json{{"v", 1}}, "2020"), b = result_record("estimate", "t", c.to_json(), json{{"v", 1}}, "2030");
    EXPECT_EQ(a["config_hash"], b["config_hash"]);
    c.seed = 99;
    EXPECT_NE(result_record("estimate", "t", c.to_json(), json{}, "")["config_hash"], a["config_hash"]);
}

TEST(Cli, IdentityEstimateIsZeroAndRecordsItsSeed) {
    auto d = scratch("identity");
    auto r = run("estimate --isotopy examples_src/isotopies/identity_disc.json --samples 50 --seed 5 --output '" + d.string() + "'", d);
    ASSERT_EQ(r.code, 0);
    auto recs = records(d);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0]["payload"]["value"], 0.0);
    EXPECT_TRUE(recs[0]["payload"].contains("std_error"));
    EXPECT_TRUE(recs[0]["payload"].contains("samples"));
    EXPECT_EQ(recs[0]["config"]["seed"], 5);
}

TEST(Cli, RepeatedRunsAreByteIdenticalAcrossWorkers) {
    auto d1 = scratch("det1"), d3 = scratch("det3");
    std::string args = "estimate --config examples_src/estimate.cfg --samples 300 --seed 11";
    auto a = run(args + " --workers 1 --output '" + d1.string() + "'", d1);
    auto b = run(args + " --workers 3 --output '" + d3.string() + "'", d3);
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(records(d1)[0]["config_hash"], records(d3)[0]["config_hash"]);
}

TEST(Cli, FlagsOverrideTheConfigFile) {
    auto d = scratch("override");
    auto r = run("estimate --config examples_src/estimate.cfg --samples 40 --seed 3 --output '" + d.string() + "'", d);
    ASSERT_EQ(r.code, 0);
    auto rec = records(d)[0];
    EXPECT_EQ(rec["config"]["samples"], 40);
    EXPECT_EQ(rec["config"]["seed"], 3);
    EXPECT_EQ(rec["config"]["qms"][0], "lk:1,2");  // from the file
}

TEST(Cli, ErrorsExitNonzero) {
    auto d = scratch("errors");
    EXPECT_EQ(run("estimate --isotopy examples_src/isotopies/missing.json --output '" + d.string() + "'", d).code, 2);
    EXPECT_NE(run("estimate --qm bogus:1 --isotopy examples_src/isotopies/identity_disc.json --output '" + d.string() + "'", d).code, 0);
    EXPECT_NE(run("frobnicate", d).code, 0);
}

TEST(Cli, TraceWords) {
    auto d = scratch("trace");
    auto r = run("trace --isotopy examples_src/isotopies/disc_full_twist.json --point -0.2,0.05 --point 0.25,-0.05 --output '" + d.string() +
                     "' --dump-trace '" + d.string() + "'",
                 d);
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(records(d)[0]["payload"]["braid"], "s1 s1");
    EXPECT_TRUE(fs::exists(d / "trace.json"));

    auto t = scratch("trace_torus");
    ASSERT_EQ(run("trace --isotopy examples_src/isotopies/torus_band.json --n 1 --point 0.6,0.5 --output '" + t.string() + "'", t).code, 0);
    EXPECT_EQ(records(t)[0]["payload"]["pi1"][0], "a1");

    auto i = scratch("trace_id");
    ASSERT_EQ(run("trace --isotopy examples_src/isotopies/identity_disc.json --point 0.1,0 --point -0.2,0.3 --output '" + i.string() + "'", i).code, 0);
    EXPECT_EQ(records(i)[0]["payload"]["braid"], "");
}

TEST(Cli, MetricsExperimentAndSelftest) {
    auto d = scratch("metrics");
    auto r = run("experiment metrics --nmax 3 --output '" + d.string() + "'", d);
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(d / "metrics.csv"));
    EXPECT_EQ(records(d)[0]["payload"].size(), 4u);
    auto s = scratch("selftest");
    auto st = run("selftest", s);
    EXPECT_EQ(st.code, 0);
    EXPECT_EQ(st.out.find("FAIL"), std::string::npos);
}
