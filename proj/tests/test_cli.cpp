#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int exit_code;
    std::string output; // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(QSHEDGE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, "popen failed"};
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data_file(const std::string& name) { return std::string(QSHEDGE_DATA_DIR) + "/" + name; }

TEST(CliCheck, Gap3Passes) {
    RunResult r = run_cli("check " + data_file("gap3.json"));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("martingale OK"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("polar set: (empty)"), std::string::npos) << r.output;
}

TEST(CliCheck, UniformWeightsFailWithResidual) {
    RunResult r = run_cli("check " + data_file("gap3_uniform.json"));
    EXPECT_EQ(r.exit_code, 1) << r.output;
    EXPECT_NE(r.output.find("NOT a martingale"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("node 0"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("0.16666"), std::string::npos) << r.output;
}

TEST(CliCheck, MalformedJson) {
    RunResult r = run_cli("check " + data_file("malformed.json"));
    EXPECT_EQ(r.exit_code, 1) << r.output;
    EXPECT_NE(r.output.find("ParseError"), std::string::npos) << r.output;
}

TEST(CliPrice, Gap3Json) {
    RunResult r = run_cli("price " + data_file("gap3.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto doc = nlohmann::json::parse(r.output);
    EXPECT_NEAR(doc["primal"].get<double>(), 1.0 / 3.0, 1e-8);
    EXPECT_NEAR(doc["dual"].get<double>(), 1.0 / 3.0, 1e-8);
    EXPECT_NEAR(doc["model_sup"].get<double>(), 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(doc["gap"].get<double>(), 1.0 / 6.0, 1e-8);
    EXPECT_NEAR(doc["strategy"]["0"].get<double>(), 2.0 / 3.0, 1e-8);
    EXPECT_NEAR(doc["dual_measure"]["1"].get<double>(), 2.0 / 3.0, 1e-8);
}

TEST(CliPrice, ExactFractions) {
    RunResult r = run_cli("price --exact " + data_file("gap3.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto doc = nlohmann::json::parse(r.output);
    EXPECT_EQ(doc["primal"].get<std::string>(), "1/3");
    EXPECT_EQ(doc["dual"].get<std::string>(), "1/3");
    EXPECT_EQ(doc["model_sup"].get<std::string>(), "1/6");
    EXPECT_EQ(doc["gap"].get<std::string>(), "1/6");
}

TEST(CliPrice, RejectsNonMartingaleFamily) {
    RunResult r = run_cli("price " + data_file("gap3_uniform.json"));
    EXPECT_EQ(r.exit_code, 1) << r.output;
}

TEST(CliGen, DeterministicBytes) {
    const std::string flags = "gen --interval 0.5 2 --T 2 --branching 2 --models 2 --seed 7";
    RunResult a = run_cli(flags);
    RunResult b = run_cli(flags);
    ASSERT_EQ(a.exit_code, 0) << a.output;
    EXPECT_EQ(a.output, b.output);
    RunResult c = run_cli("gen --interval 0.5 2 --T 2 --branching 2 --models 2 --seed 8");
    EXPECT_NE(a.output, c.output);
}

TEST(CliGen, UniqueBinomialInstance) {
    RunResult r = run_cli("gen --interval 0.5 2 --T 1 --branching 2 --models 1 --seed 0");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto doc = nlohmann::json::parse(r.output);
    EXPECT_NEAR(doc["models"][0]["weights"]["1"].get<double>(), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(doc["models"][0]["weights"]["2"].get<double>(), 1.0 / 3.0, 1e-12);
}

TEST(CliGen, InfeasibleIntervalExitsOne) {
    RunResult r = run_cli("gen --interval 0.9 1.0 --T 1 --branching 2");
    EXPECT_EQ(r.exit_code, 1) << r.output;
    EXPECT_NE(r.output.find("InfeasibleInterval"), std::string::npos) << r.output;
}

TEST(CliGen, OutputFeedsCheckAndPrice) {
    for (int seed : {0, 1, 2, 3, 4}) {
        RunResult gen = run_cli("gen --interval 0.6 1.7 --T 2 --branching 3 --models 2 --seed " +
                                std::to_string(seed));
        ASSERT_EQ(gen.exit_code, 0);
        const std::string path = "/tmp/qshedge_gen_" + std::to_string(seed) + ".json";
        std::ofstream(path) << gen.output;
        EXPECT_EQ(run_cli("check " + path).exit_code, 0) << "seed " << seed;
        RunResult price = run_cli("price " + path);
        EXPECT_EQ(price.exit_code, 0) << price.output;
        std::remove(path.c_str());
    }
}

TEST(CliGen, NullsetSpec) {
    const std::string spec = R"({
        "horizon": 1,
        "nodes": [
            {"id": 0, "time": 0, "parent": null, "price": 1},
            {"id": 1, "time": 1, "parent": 0, "price": 0.5},
            {"id": 2, "time": 1, "parent": 0, "price": 1},
            {"id": 3, "time": 1, "parent": 0, "price": 2}
        ],
        "forbidden": [2]
    })";
    const std::string path = "/tmp/qshedge_nullset_spec.json";
    std::ofstream(path) << spec;
    RunResult r = run_cli("gen --nullset " + path + " --models 1 --seed 0");
    std::remove(path.c_str());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto doc = nlohmann::json::parse(r.output);
    EXPECT_NEAR(doc["models"][0]["weights"]["1"].get<double>(), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(doc["models"][0]["weights"]["3"].get<double>(), 1.0 / 3.0, 1e-12);
    EXPECT_TRUE(doc["models"][0]["weights"].find("2") == doc["models"][0]["weights"].end());
}

TEST(CliVerify, GoodAndBadPlans) {
    RunResult good = run_cli("verify " + data_file("gap3.json") + " --plan " + data_file("gap3_plan_good.json"));
    EXPECT_EQ(good.exit_code, 0) << good.output;

    RunResult bad = run_cli("verify " + data_file("gap3.json") + " --plan " + data_file("gap3_plan_bad.json"));
    EXPECT_EQ(bad.exit_code, 1) << bad.output;
    EXPECT_NE(bad.output.find("leaf 3"), std::string::npos) << bad.output;
    EXPECT_NE(bad.output.find("0.16666"), std::string::npos) << bad.output;
}

TEST(CliVerify, UnknownStrategyNode) {
    RunResult r = run_cli("verify " + data_file("gap3.json") + " --plan " +
                          data_file("gap3_plan_unknown_node.json"));
    EXPECT_EQ(r.exit_code, 1) << r.output;
    EXPECT_NE(r.output.find("MissingStrategyNode"), std::string::npos) << r.output;
}

TEST(CliVerify, PriceOutputRoundTripsThroughVerify) {
    RunResult price = run_cli("price " + data_file("gap3.json"));
    ASSERT_EQ(price.exit_code, 0);
    auto doc = nlohmann::json::parse(price.output);
    nlohmann::json plan;
    plan["price"] = doc["primal"];
    plan["strategy"] = doc["strategy"];
    const std::string path = "/tmp/qshedge_roundtrip_plan.json";
    std::ofstream(path) << plan.dump();
    RunResult verify = run_cli("verify " + data_file("gap3.json") + " --plan " + path + " --tol 1e-7");
    std::remove(path.c_str());
    EXPECT_EQ(verify.exit_code, 0) << verify.output;
}

} // namespace
