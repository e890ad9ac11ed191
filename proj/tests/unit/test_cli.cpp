#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

#include "lsqmamot/cli.hpp"
#include "lsqmamot/error.hpp"
#include "oracles.hpp"

using namespace lsqmamot;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "lsqmamot");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

MetricsReport report(const std::string& method, const std::string& seq, double v) {
    MetricsReport r;
    r.method = method;
    r.sequence = seq;
    r.samota = r.amota = r.amotp = r.mt = v;
    r.num_gt = 10;
    return r;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.scenario.num_frames = 20;
    c.scenario.num_objects = 4;
    c.seeds = {0, 1};
    return c;
}

}  // namespace

TEST(Simulate, ThreeFilesPerSeed) {
    const fs::path dir = oracle::scratch_dir("cli_simulate");
    const auto dirs = cli::cmd_simulate(small_config(), dir);
    ASSERT_EQ(dirs.size(), 2u);
    for (const fs::path& d : dirs) {
        EXPECT_TRUE(fs::exists(d / "gt.jsonl"));
        EXPECT_TRUE(fs::exists(d / "poses.jsonl"));
        EXPECT_TRUE(fs::exists(d / "detections.jsonl"));
    }
    const auto first = oracle::snapshot(dir);
    cli::cmd_simulate(small_config(), dir);
    EXPECT_EQ(oracle::snapshot(dir), first);
}

TEST(Attack, UntargetedAgentAndIdentity) {
    const fs::path dir = oracle::scratch_dir("cli_attack");
    ExperimentConfig c = small_config();
    c.seeds = {0};
    const fs::path clean = cli::cmd_simulate(c, dir / "sim").front();

    c.attack = AttackConfig::preset(0.25);
    c.attack.targets = {0};
    cli::cmd_attack(clean, c, dir / "ego_only");
    const Scenario before = load_sequence(clean);
    const Scenario after = load_sequence(dir / "ego_only");
    EXPECT_EQ(ground_truth(after), ground_truth(before));
    for (std::size_t f = 0; f < before.frames.size(); ++f) {
        EXPECT_EQ(after.frames[f].local_detections.at(1), before.frames[f].local_detections.at(1));
    }

    c.attack.epsilon = 0;
    c.attack.drop_rate = 0;
    c.attack.fp_rate = 0;
    c.attack.yaw_jitter = 0;
    cli::cmd_attack(clean, c, dir / "identity");
    EXPECT_EQ(oracle::read_file(dir / "identity" / "detections.jsonl"), oracle::read_file(clean / "detections.jsonl"));
}

TEST(TrackAndEval, BenignArlotIsPerfectOnEasyScene) {
    const fs::path dir = oracle::scratch_dir("cli_track");
    ExperimentConfig c = small_config();
    c.seeds = {0};
    for (auto& a : c.scenario.agents) {
        a.noise_std = 0;
        a.range = 1000;
    }
    const fs::path seq = cli::cmd_simulate(c, dir).front();
    cli::cmd_track(seq, c, dir / "tracks.jsonl");
    const std::string once = oracle::read_file(dir / "tracks.jsonl");
    cli::cmd_track(seq, c, dir / "tracks.jsonl");
    EXPECT_EQ(oracle::read_file(dir / "tracks.jsonl"), once);
    const MetricsReport r = cli::cmd_eval(seq / "gt.jsonl", dir / "tracks.jsonl", c, dir / "report.json", "arlot");
    EXPECT_DOUBLE_EQ(r.samota, 1.0);
    EXPECT_EQ(r.sequence, "seed_0");
    EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(Compare, SingleReportHasNoDeltas) {
    const auto t = cli::compare_reports({report("arlot", "s0", 1.0)});
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_FALSE(t.has_deltas);
    EXPECT_FALSE(t.rows[0].delta[0].has_value());
    EXPECT_NE(t.text().find("100.00"), std::string::npos);
}

TEST(Compare, DeltasAgainstBestOther) {
    const auto t = cli::compare_reports(
        {report("arlot", "s0", 0.6), report("single", "s0", 0.3), report("merged", "s0", 0.5)});
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_TRUE(t.has_deltas);
    EXPECT_NEAR(*t.rows[0].delta[2], 0.2, 1e-12);
    EXPECT_NE(t.text().find("(+20.00%)"), std::string::npos);
    EXPECT_NE(t.csv().find("arlot"), std::string::npos);
}

TEST(Compare, MeanAndSampleStdAcrossSequences) {
    const auto t = cli::compare_reports({report("arlot", "s0", 0.4), report("arlot", "s1", 0.6),
                                         report("single", "s0", 0.1), report("single", "s1", 0.3)});
    EXPECT_NEAR(t.rows[0].mean[0], 0.5, 1e-12);
    EXPECT_NEAR(t.rows[0].stddev[0], std::sqrt(0.02), 1e-12);
}

TEST(Compare, MismatchedSequencesRejected) {
    EXPECT_THROW(cli::compare_reports({report("arlot", "s0", 1), report("single", "s1", 1)}), DataError);
}

TEST(Run, ExitCodes) {
    const fs::path dir = oracle::scratch_dir("cli_exit");
    std::string out, err;
    EXPECT_EQ(run({"simulate", "--out", (dir / "a").string(), "--set", "scenario.num_frames=5"}), 0);
    EXPECT_EQ(run({"simulate", "--out", (dir / "b").string(), "--set", "scenario.bogus=1"}, &out, &err), 2);
    EXPECT_NE(err.find("scenario.bogus"), std::string::npos);
    EXPECT_EQ(run({"track", "--in", (dir / "a" / "seed_0").string(), "--out", (dir / "t.jsonl").string(),
                   "--method", "nope"}),
              2);
    EXPECT_EQ(run({"track", "--in", (dir / "missing").string(), "--out", (dir / "t.jsonl").string()}), 3);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"track", "--in", (dir / "a" / "seed_0").string(), "--out", (dir / "t.jsonl").string(),
                   "--method", "single"}),
              0);
    EXPECT_EQ(run({"eval", "--gt", (dir / "a" / "seed_0" / "gt.jsonl").string(), "--tracks",
                   (dir / "t.jsonl").string(), "--out", (dir / "r.json").string()},
                  &out),
              0);
    EXPECT_NE(out.find("sAMOTA"), std::string::npos);
    EXPECT_EQ(run({"compare", (dir / "r.json").string()}, &out), 0);
}

TEST(Run, ExecutableExitStatus) {
    const fs::path dir = oracle::scratch_dir("cli_binary");
    const std::string tool = LSQMAMOT_TOOL_PATH;
    const std::string base = "\"" + tool + "\" simulate --out \"" + dir.string() + "\" ";
    int status = std::system((base + "--set scenario.num_frames=3 > /dev/null").c_str());
    EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
    status = std::system((base + "--set nonsense.key=1 2> /dev/null").c_str());
    EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 2);
}

TEST(Experiment, ByteIdenticalReruns) {
    const fs::path a = oracle::scratch_dir("cli_exp_a");
    const fs::path b = oracle::scratch_dir("cli_exp_b");
    ExperimentConfig c = small_config();
    c.seeds = {0, 1, 2};
    const auto ta = cli::cmd_experiment(c, a);
    const auto tb = cli::cmd_experiment(c, b);
    EXPECT_EQ(ta.text(), tb.text());
    EXPECT_EQ(oracle::snapshot(a), oracle::snapshot(b));
    EXPECT_TRUE(fs::exists(a / "summary.csv"));
    EXPECT_TRUE(fs::exists(a / "seed_2" / "report_arlot.json"));
}
