#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsqmamot/config.hpp"

namespace lsqmamot::cli {

namespace fs = std::filesystem;

/// Writes <out>/seed_<N>/{gt,poses,detections}.jsonl for every configured seed.
std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir);

/// Rewrites the sequence in `in_dir` with attacked detections into `out_dir`.
void cmd_attack(const fs::path& in_dir, const ExperimentConfig& cfg, const fs::path& out_dir);

void cmd_track(const fs::path& in_dir, const ExperimentConfig& cfg, const fs::path& out_path);

/// Evaluates a tracks file against a GT file and writes report.json.
MetricsReport cmd_eval(const fs::path& gt_path, const fs::path& tracks_path, const ExperimentConfig& cfg,
                       const fs::path& out_path, const std::string& method_label = "",
                       const std::string& sequence = "");

struct CompareRow {
    std::string method;
    int sequences = 0;
    double mean[4] = {0, 0, 0, 0};  // samota, amota, amotp, mt
    double stddev[4] = {0, 0, 0, 0};
    std::optional<double> delta[4];  // relative to the best other method
};

struct CompareTable {
    std::vector<CompareRow> rows;
    bool has_deltas = false;
    std::string csv() const;
    std::string text() const;
};

/// One row per method; reports of the same method are averaged over
/// sequences (mean and sample std). The "arlot" row, or the first method when
/// absent, carries deltas (ours - best_other) / best_other.
CompareTable compare_reports(const std::vector<MetricsReport>& reports);
CompareTable cmd_compare(const std::vector<fs::path>& report_paths, const std::optional<fs::path>& out_csv);

/// simulate -> attack -> track (every configured method) -> eval -> compare,
/// one worker per seed (capped by LSQMAMOT_THREADS).
CompareTable cmd_experiment(const ExperimentConfig& cfg, const fs::path& out_dir);

/// Worker count from LSQMAMOT_THREADS, defaulting to hardware concurrency.
unsigned worker_count();

/// Entry point shared by the executable; returns the process exit code
/// (0 ok, 1 internal error, 2 config error, 3 data error).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lsqmamot::cli
