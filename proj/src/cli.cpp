#include "lsqmamot/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "lsqmamot/error.hpp"

namespace lsqmamot::cli {

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw DataError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

Scenario attack_scenario(const Scenario& clean, const AttackConfig& attack) {
    Scenario out = clean;
    if (attack.targets.empty()) return out;
    for (ScenarioFrame& f : out.frames) {
        FrameInput local{f.frame_index, f.local_detections, f.poses};
        f.local_detections = perturb_frame(local, attack).detections;
    }
    project_detections(out);
    return out;
}

const char* const kMetricNames[4] = {"sAMOTA", "AMOTA", "AMOTP", "MT"};

std::string fixed(double v, int digits = 2) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

std::string signed_percent(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << std::showpos << 100.0 * v << "%";
    return ss.str();
}

// Runs fn(k) for k in [0, n) on up to worker_count() threads.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, worker_count()), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LSQMAMOT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
    std::vector<fs::path> dirs;
    for (std::uint64_t seed : cfg.seeds) dirs.push_back(out_dir / seed_dir_name(seed));
    parallel_for(cfg.seeds.size(), [&](std::size_t k) {
        ScenarioConfig sc = cfg.scenario;
        sc.seed = cfg.seeds[k];
        save_sequence(generate(sc), dirs[k]);
    });
    return dirs;
}

void cmd_attack(const fs::path& in_dir, const ExperimentConfig& cfg, const fs::path& out_dir) {
    const Scenario clean = load_sequence(in_dir);
    save_sequence(attack_scenario(clean, cfg.attack), out_dir);
}

void cmd_track(const fs::path& in_dir, const ExperimentConfig& cfg, const fs::path& out_path) {
    const Scenario scenario = load_sequence(in_dir);
    save_tracks(run_pipeline(scenario.frame_inputs(), cfg.tracker), out_path);
}

MetricsReport cmd_eval(const fs::path& gt_path, const fs::path& tracks_path, const ExperimentConfig& cfg,
                       const fs::path& out_path, const std::string& method_label, const std::string& sequence) {
    const auto gt = load_ground_truth(gt_path);
    const TrackerOutput tracks = load_tracks(tracks_path);
    MetricsReport report = evaluate(gt, tracks, cfg.eval.iou_min, cfg.eval.recall_points);
    report.method = method_label.empty() ? tracks_path.stem().string() : method_label;
    report.sequence = sequence.empty() ? fs::absolute(gt_path).parent_path().filename().string() : sequence;
    write_text(out_path, to_json(report).dump(2) + "\n");
    return report;
}

CompareTable compare_reports(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw DataError("compare needs at least one report");

    std::vector<std::string> order;
    std::map<std::string, std::vector<const MetricsReport*>> by_method;
    for (const MetricsReport& r : reports) {
        const std::string name = r.method.empty() ? "unnamed" : r.method;
        if (!by_method.contains(name)) order.push_back(name);
        by_method[name].push_back(&r);
    }

    std::vector<std::string> reference;
    for (const MetricsReport* r : by_method[order.front()]) reference.push_back(r->sequence);
    std::sort(reference.begin(), reference.end());
    for (const std::string& name : order) {
        std::vector<std::string> seqs;
        for (const MetricsReport* r : by_method[name]) seqs.push_back(r->sequence);
        std::sort(seqs.begin(), seqs.end());
        if (std::adjacent_find(seqs.begin(), seqs.end()) != seqs.end()) {
            throw DataError("method '" + name + "' has duplicate sequence ids");
        }
        if (seqs != reference) {
            throw DataError("mismatched sequence ids between '" + order.front() + "' and '" + name + "'");
        }
    }

    CompareTable table;
    for (const std::string& name : order) {
        CompareRow row;
        row.method = name;
        const auto& list = by_method[name];
        row.sequences = static_cast<int>(list.size());
        for (int m = 0; m < 4; ++m) {
            std::vector<double> values;
            for (const MetricsReport* r : list) {
                const double v[4] = {r->samota, r->amota, r->amotp, r->mt};
                values.push_back(v[m]);
            }
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= values.size();
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            row.mean[m] = mean;
            row.stddev[m] = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
        }
        table.rows.push_back(row);
    }

    if (table.rows.size() > 1) {
        table.has_deltas = true;
        auto ours = std::find_if(table.rows.begin(), table.rows.end(),
                                 [](const CompareRow& r) { return r.method == "arlot"; });
        if (ours == table.rows.end()) ours = table.rows.begin();
        for (int m = 0; m < 4; ++m) {
            double best = -1.0;
            for (const CompareRow& r : table.rows) {
                if (&r != &*ours) best = std::max(best, r.mean[m]);
            }
            if (best > 0.0) ours->delta[m] = (ours->mean[m] - best) / best;
        }
    }
    return table;
}

std::string CompareTable::csv() const {
    std::ostringstream ss;
    ss << "method,sequences";
    for (const char* name : kMetricNames) ss << "," << name << "_pct";
    for (const char* name : kMetricNames) ss << "," << name << "_std_pct";
    if (has_deltas) {
        for (const char* name : kMetricNames) ss << "," << name << "_delta_pct";
    }
    ss << "\n";
    for (const CompareRow& r : rows) {
        ss << r.method << "," << r.sequences;
        for (int m = 0; m < 4; ++m) ss << "," << fixed(100.0 * r.mean[m], 4);
        for (int m = 0; m < 4; ++m) ss << "," << fixed(100.0 * r.stddev[m], 4);
        if (has_deltas) {
            for (int m = 0; m < 4; ++m) {
                ss << ",";
                if (r.delta[m]) ss << fixed(100.0 * *r.delta[m], 4);
            }
        }
        ss << "\n";
    }
    return ss.str();
}

std::string CompareTable::text() const {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Tracking", "sAMOTA (%)", "AMOTA (%)", "AMOTP (%)", "MT (%)"});
    for (const CompareRow& r : rows) {
        std::vector<std::string> line{r.method};
        for (int m = 0; m < 4; ++m) {
            std::string cell = fixed(100.0 * r.mean[m]);
            if (r.sequences > 1) cell += " +/- " + fixed(100.0 * r.stddev[m]);
            if (r.delta[m]) cell += " (" + signed_percent(*r.delta[m]) + ")";
            line.push_back(cell);
        }
        cells.push_back(line);
    }
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    std::ostringstream ss;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c > 0) ss << "  ";
            ss << std::left << std::setw(static_cast<int>(width[c])) << line[c];
        }
        ss << "\n";
    }
    std::string text = ss.str();
    // drop trailing padding
    std::string trimmed;
    std::istringstream lines(text);
    for (std::string l; std::getline(lines, l);) {
        l.erase(l.find_last_not_of(' ') + 1);
        trimmed += l + "\n";
    }
    return trimmed;
}

CompareTable cmd_compare(const std::vector<fs::path>& report_paths, const std::optional<fs::path>& out_csv) {
    std::vector<MetricsReport> reports;
    for (const fs::path& p : report_paths) {
        std::ifstream in(p);
        if (!in) throw DataError("cannot open report '" + p.string() + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("report '" + p.string() + "' is not valid JSON: " + e.what());
        }
        MetricsReport r = report_from_json(j);
        if (r.method.empty()) r.method = p.stem().string();
        reports.push_back(std::move(r));
    }
    CompareTable table = compare_reports(reports);
    if (out_csv) write_text(*out_csv, table.csv());
    return table;
}

CompareTable cmd_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
    std::vector<std::vector<MetricsReport>> per_seed(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), [&](std::size_t k) {
        const std::uint64_t seed = cfg.seeds[k];
        const fs::path dir = out_dir / seed_dir_name(seed);

        ScenarioConfig sc = cfg.scenario;
        sc.seed = seed;
        const Scenario clean = generate(sc);
        save_sequence(clean, dir / "clean");

        AttackConfig ac = cfg.attack;
        ac.seed = seed;
        const Scenario attacked = attack_scenario(clean, ac);
        save_sequence(attacked, dir / "attacked");

        const auto gt = ground_truth(attacked);
        const auto frames = attacked.frame_inputs();
        for (Method m : cfg.methods) {
            TrackerConfig tc = cfg.tracker;
            tc.method = m;
            const std::string name(method_name(m));
            const TrackerOutput out = run_pipeline(frames, tc);
            save_tracks(out, dir / ("tracks_" + name + ".jsonl"));
            MetricsReport report = evaluate(gt, out, cfg.eval.iou_min, cfg.eval.recall_points);
            report.method = name;
            report.sequence = seed_dir_name(seed);
            write_text(dir / ("report_" + name + ".json"), to_json(report).dump(2) + "\n");
            per_seed[k].push_back(std::move(report));
        }
    });

    std::vector<MetricsReport> all;
    for (Method m : cfg.methods) {
        for (const auto& seed_reports : per_seed) {
            for (const MetricsReport& r : seed_reports) {
                if (r.method == method_name(m)) all.push_back(r);
            }
        }
    }
    CompareTable table = compare_reports(all);
    write_text(out_dir / "config.json", to_json(cfg).dump(2) + "\n");
    write_text(out_dir / "summary.csv", table.csv());
    write_text(out_dir / "summary.txt", table.text());
    return table;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Least-squares graph fusion and tracking of multi-agent 3D detections"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string in_path;
    std::string method;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string gt_path, tracks_path, label, sequence;
    std::vector<std::string> reports;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config");
        sub->add_option("--set", sets, "Override a config key, KEY=VALUE (dotted path)")->take_all();
    };

    CLI::App* simulate = app.add_subcommand("simulate", "Generate synthetic sequences, one per seed");
    add_common(simulate);
    simulate->add_option("--out", out_path, "Output directory")->required();
    simulate->add_option("--seed", seed, "Run a single seed");

    CLI::App* attack = app.add_subcommand("attack", "Apply the surrogate attack to a sequence");
    add_common(attack);
    attack->add_option("--in", in_path, "Input sequence directory")->required();
    attack->add_option("--out", out_path, "Output sequence directory")->required();
    attack->add_option("--seed", seed, "Attack seed");

    CLI::App* track = app.add_subcommand("track", "Run a tracking pipeline over a sequence");
    add_common(track);
    track->add_option("--in", in_path, "Input sequence directory")->required();
    track->add_option("--out", out_path, "Output tracks.jsonl")->required();
    track->add_option("--method", method, "arlot | single | merged | sequential");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate tracks against ground truth");
    add_common(eval);
    eval->add_option("--gt", gt_path, "gt.jsonl")->required();
    eval->add_option("--tracks", tracks_path, "tracks.jsonl")->required();
    eval->add_option("--out", out_path, "Output report.json")->required();
    eval->add_option("--method", label, "Method label stored in the report");
    eval->add_option("--sequence", sequence, "Sequence id stored in the report");

    CLI::App* compare = app.add_subcommand("compare", "Tabulate reports per method");
    compare->add_option("reports", reports, "report.json files")->required();
    compare->add_option("--out", out_path, "Write the table as CSV");

    CLI::App* experiment = app.add_subcommand("experiment", "simulate, attack, track, eval and compare");
    add_common(experiment);
    experiment->add_option("--out", out_path, "Output directory")->required();
    experiment->add_option("--seed", seed, "Run a single seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto load = [&] {
            ExperimentConfig cfg = load_config(config_path, sets);
            if (seed) {
                cfg.seeds = {*seed};
                cfg.attack.seed = *seed;
            }
            return cfg;
        };
        if (simulate->parsed()) {
            for (const fs::path& p : cmd_simulate(load(), out_path)) out << p.string() << "\n";
        } else if (attack->parsed()) {
            cmd_attack(in_path, load(), out_path);
        } else if (track->parsed()) {
            ExperimentConfig cfg = load();
            if (!method.empty()) cfg.tracker.method = parse_method(method);
            cmd_track(in_path, cfg, out_path);
        } else if (eval->parsed()) {
            const MetricsReport r = cmd_eval(gt_path, tracks_path, load(), out_path, label, sequence);
            out << "sAMOTA " << fixed(100.0 * r.samota) << "  AMOTA " << fixed(100.0 * r.amota) << "  AMOTP "
                << fixed(100.0 * r.amotp) << "  MT " << fixed(100.0 * r.mt) << "\n";
        } else if (compare->parsed()) {
            std::vector<fs::path> paths(reports.begin(), reports.end());
            std::optional<fs::path> csv;
            if (!out_path.empty()) csv = out_path;
            out << cmd_compare(paths, csv).text();
        } else if (experiment->parsed()) {
            out << cmd_experiment(load(), out_path).text();
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 3;
    } catch (const InvalidInput& e) {
        err << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace lsqmamot::cli
