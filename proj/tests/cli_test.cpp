#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fracon/cli.hpp"
#include "test_support.hpp"

using namespace fracon;
using fracon::testing::source_path;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

double value_after(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + " = ");
    if (pos == std::string::npos)
        return std::nan("");
    return std::stod(text.substr(pos + key.size() + 3));
}

const std::string example = source_path("scenarios/four_agent.json");

} // namespace

TEST(Cli, SimulateWritesTrajectoryCsv) {
    const auto path = std::filesystem::temp_directory_path() / "fracon_traj.csv";
    const auto r = run({"simulate", example, "--out", path.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "t,x1,x2,x3,x4");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);)
        ++rows;
    EXPECT_EQ(rows, 3001u);
    EXPECT_NE(r.err.find("verdict = Converged"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Cli, SimulateToStdoutWithDelayOverride) {
    const auto r = run({"simulate", example, "--delay", "0.8", "--stride", "1000"});
    EXPECT_EQ(r.code, 1);
    const auto out = lines(r.out);
    EXPECT_EQ(out.front(), "t,x1,x2,x3,x4");
    EXPECT_EQ(out.size(), 32u);
    EXPECT_NE(r.err.find("verdict = "), std::string::npos);
}

TEST(Cli, BoundReportsTheorem1AndInapplicableCorollaries) {
    const auto r = run({"bound", example});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(value_after(r.out, "theorem1"), 0.7272, 1e-4);
    EXPECT_NE(r.out.find("corollary1 = inapplicable"), std::string::npos);
    EXPECT_NE(r.out.find("corollary2 = inapplicable"), std::string::npos);
    EXPECT_NE(r.out.find("corollary3 = inapplicable"), std::string::npos);
}

TEST(Cli, CurveIsStrictlyDecreasing) {
    const auto r = run({"curve", example, "--gamma-min", "0.2", "--gamma-max", "2", "--samples", "50"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto out = lines(r.out);
    ASSERT_EQ(out.size(), 51u);
    EXPECT_EQ(out[0], "gamma,tau_bound");
    double previous = 1e300;
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double tau = std::stod(out[i].substr(out[i].find(',') + 1));
        EXPECT_LT(tau, previous);
        previous = tau;
    }
}

TEST(Cli, CertifyVerdictsAndExitCodes) {
    const auto pass = run({"certify", example});
    EXPECT_EQ(pass.code, 0) << pass.err;
    EXPECT_NE(pass.out.find("verdict = Pass"), std::string::npos);
    EXPECT_NEAR(value_after(pass.out, "criterion_max"), 0.764, 1e-3);

    const auto fail = run({"certify", example, "--delay", "0.8"});
    EXPECT_EQ(fail.code, 1);
    EXPECT_NEAR(value_after(fail.out, "criterion_max"), 1.019, 1e-3);
    EXPECT_EQ(fail.out.find("verdict = Pass"), std::string::npos);
}

TEST(Cli, CriticalReportsBisectedDelay) {
    const auto r = run({"critical", example, "--lo", "0.3", "--hi", "1.0", "--tol", "0.02"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_GE(value_after(r.out, "critical_delay"), 0.6);
    EXPECT_NEAR(value_after(r.out, "theorem1"), 0.7272, 1e-4);
}

TEST(Cli, UsageAndParseErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"bound"}).code, 2);
    EXPECT_EQ(run({"bound", "/nonexistent/scenario.json"}).code, 2);

    const auto path = std::filesystem::temp_directory_path() / "fracon_bad_gain.json";
    {
        std::ifstream in(example);
        auto doc = nlohmann::json::parse(in);
        doc["gain"] = -1;
        std::ofstream(path) << doc.dump();
    }
    const auto r = run({"bound", path.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("gain"), std::string::npos);
    std::filesystem::remove(path);

    EXPECT_EQ(run({"critical", example, "--lo", "0.9", "--hi", "1.0"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}
