#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "matprop/harness.hpp"
#include "matprop/matrix_io.hpp"

using namespace matprop;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "matprop");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp(const std::string& name) { return ::testing::TempDir() + "matprop_cli_" + name; }

}  // namespace

TEST(Cli, GenThenRankTest) {
    const std::string path = temp("ones.mtx");
    const Outcome g = run({"gen", "--family", "all-ones", "--n", "8", "--out", path});
    ASSERT_EQ(g.code, 0) << g.err;
    const MatrixFile f = load_matrix(path);
    EXPECT_TRUE(f.matrix == DenseMatrix::ones(8, 8));
    EXPECT_EQ(*f.meta.family, "all-ones");

    const Outcome r = run({"rank-test", "--in", path, "--d", "1", "--eps", "0.1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("H0 ", 0), 0u) << r.out;
}

TEST(Cli, RankTestFlagsFullRank) {
    const std::string path = temp("eye.mtx");
    save_matrix(path, DenseMatrix::identity(6, Field::prime(65537)));
    const Outcome r = run({"rank-test", "--in", path, "--d", "3", "--sensing", "--seed", "4"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("H1 queries=16 ", 0), 0u) << r.out;
}

TEST(Cli, CyclesOnAllOnesIsExact) {
    const std::string path = temp("ones8.mtx");
    save_matrix(path, DenseMatrix::ones(8, 8));
    const Outcome r = run({"opnorm", "--in", path, "--method", "cycles", "--q", "3", "--N", "1000", "--seed", "7"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("estimate=8 queries=", 0), 0u) << r.out;
    for (const char* m : {"frobenius", "screen", "sampling", "sensing"}) {
        const Outcome e = run({"opnorm", "--in", path, "--method", m, "--seed", "1"});
        EXPECT_EQ(e.code, 0) << m << ": " << e.err;
        EXPECT_EQ(e.out.rfind("estimate=", 0), 0u) << m;
    }
    EXPECT_EQ(run({"opnorm", "--in", path, "--method", "power"}).code, 2);
}

TEST(Cli, SpectralTesters) {
    const std::string path = temp("ones64.mtx");
    save_matrix(path, DenseMatrix::ones(64, 64));
    const Outcome s = run({"stable-rank-test", "--in", path, "--d", "2", "--seed", "3"});
    EXPECT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(s.out.rfind("H0 ", 0), 0u) << s.out;
    const Outcome p = run({"schatten-test", "--in", path, "--p", "4", "--c", "0.5", "--seed", "3"});
    EXPECT_EQ(p.code, 0) << p.err;
    EXPECT_EQ(p.out.rfind("H0 ", 0), 0u) << p.out;
    // Staged testers reject a field matrix as an input error.
    const std::string gf = temp("gf.mtx");
    save_matrix(gf, DenseMatrix::ones(8, 8, Field::prime(5)));
    EXPECT_EQ(run({"schatten-test", "--in", gf}).code, 2);
}

TEST(Cli, MissingDIsUsageError) {
    const Outcome r = run({"rank-test", "--in", "whatever.mtx"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--d"), std::string::npos);
    EXPECT_NE(r.err.find("Usage:"), std::string::npos);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, InputErrors) {
    EXPECT_EQ(run({"rank-test", "--in", temp("missing.mtx"), "--d", "1"}).code, 2);
    const std::string bad = temp("bad.mtx");
    std::ofstream(bad) << "matrix 2 2 real\n1 2\n";
    const Outcome r = run({"rank-test", "--in", bad, "--d", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line"), std::string::npos);
    EXPECT_EQ(run({"gen", "--family", "square"}).code, 2);
    EXPECT_EQ(run({"rank-test", "--in", bad, "--d", "1", "--set", "c_pattern"}).code, 2);
}

TEST(Cli, ExperimentConfigFileAndSets) {
    const std::string cfg = temp("exp.cfg");
    const std::string csv = temp("exp.csv");
    std::ofstream(cfg) << "tester=rank\nfamily=low-rank-field\nfield=gf:7\nn=32\ninstance.d=1\nd=1\ntrials=9\nseed=2\n";
    const Outcome r = run({"experiment", "--config", cfg, "--set", "trials=5", "--out", csv, "--workers", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("trials=5 detections=0"), std::string::npos) << r.out;
    std::ifstream in(csv);
    const auto records = read_csv(in);
    EXPECT_EQ(records.size(), 5u);

    // CSV on stdout, summary on stderr; identical across worker counts.
    const Outcome a = run({"experiment", "--config", cfg, "--workers", "1"});
    const Outcome b = run({"experiment", "--config", cfg, "--workers", "8"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.rfind(std::string(kCsvHeader) + "\n", 0), 0u);
    EXPECT_NE(a.err.find("trials=9"), std::string::npos);
}

TEST(Cli, ExperimentErrorsExitTwo) {
    const std::string cfg = temp("broken.cfg");
    std::ofstream(cfg) << "tester=rank\ntrials=lots\n";
    const Outcome r = run({"experiment", "--config", cfg});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(":2: trials:"), std::string::npos) << r.err;
    EXPECT_EQ(run({"experiment", "--set", "eps=2"}).code, 2);
    EXPECT_EQ(run({"experiment", "--set", "noequals"}).code, 2);
}
