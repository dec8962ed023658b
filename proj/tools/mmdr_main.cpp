// Command-line front end: train policies, evaluate checkpoints under the
// delay-injection protocols, sweep k, profile the pipeline modes against a
// measured latency budget, and rank trained runs against each other.
//
// Exit codes: 0 success, 1 bad usage/arguments, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmdr/common/math.hpp"
#include "mmdr/harness/ablation.hpp"
#include "mmdr/harness/bench_delays.hpp"
#include "mmdr/harness/compare.hpp"
#include "mmdr/harness/config.hpp"
#include "mmdr/harness/eval.hpp"
#include "mmdr/harness/train.hpp"

namespace fs = std::filesystem;
using namespace mmdr;
using namespace mmdr::harness;

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        seeds.push_back(std::stoull(item, &pos));
        if (pos != item.size()) {
            throw std::invalid_argument("bad seed '" + item + "'");
        }
    }
    if (seeds.empty()) throw std::invalid_argument("empty seed list");
    return seeds;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (std::uint64_t v : parse_seed_list(text)) {
        out.push_back(static_cast<int>(v));
    }
    return out;
}

void print_report(const EvalReport& rep, std::ostream& os) {
    os << rep.method << " under " << rep.protocol << " ("
       << rep.seeds.size() << " seeds x "
       << (rep.seeds.empty() ? 0
                             : rep.rows.size() / rep.seeds.size())
       << " episodes):\n";
    char line[192];
    for (const SeedSummary& s : rep.seeds) {
        std::snprintf(line, sizeof(line),
                      "  seed %llu: distance %7.3f m, collision steps %6.2f\n",
                      static_cast<unsigned long long>(s.seed),
                      s.mean_distance, s.mean_collision_steps);
        os << line;
    }
    std::snprintf(line, sizeof(line),
                  "  moving distance  %7.3f +/- %.3f m\n", rep.distance_mean,
                  rep.distance_std);
    os << line;
    std::snprintf(line, sizeof(line),
                  "  collision steps  %7.2f +/- %.2f per episode\n",
                  rep.collision_mean, rep.collision_std);
    os << line;
}

int cmd_train(const std::string& config, const std::string& mode, int k,
              std::uint64_t seed, std::int64_t samples, std::string out) {
    RunConfig cfg = load_run_config(config);
    if (!mode.empty()) cfg.env.pipeline.mode = parse_pipeline_mode(mode);
    if (k > 0) cfg.env.pipeline.k = k;
    if (samples > 0) cfg.ppo.total_samples = samples;
    if (out.empty()) {
        out = std::string("runs/") +
              pipeline_mode_name(cfg.env.pipeline.mode) + "-s" +
              std::to_string(seed);
    }
    std::string ckpt = run_training(cfg, seed, out, &std::cout);
    std::cout << "final checkpoint: " << ckpt << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, std::string config,
             const std::string& protocol, const std::string& seeds,
             int episodes, const std::string& out) {
    if (config.empty()) {
        config = (fs::path(checkpoint).parent_path() / "config.ini").string();
        if (!fs::is_regular_file(config)) {
            throw std::invalid_argument(
                "no config.ini next to the checkpoint; pass --config");
        }
    }
    RunConfig cfg = load_run_config(config);
    EvalProtocol proto =
        make_protocol(protocol, cfg.eval,
                      seeds.empty() ? std::vector<std::uint64_t>{}
                                    : parse_seed_list(seeds));
    if (episodes > 0) proto.episodes_per_seed = episodes;
    proto.validate();

    EvalReport rep = evaluate(checkpoint, cfg, proto);
    print_report(rep, std::cout);
    if (!out.empty()) {
        write_report_csv(out, rep.rows);
        std::cout << "episode rows: " << out << "\n";
    }
    return 0;
}

int cmd_bench(const std::string& config, std::uint64_t seed, int ticks) {
    RunConfig cfg = load_run_config(config);
    LatencyProfile profile;  // stock deployment measurements
    BenchDelaysReport rep =
        run_bench_delays(profile, cfg.env.pipeline, seed, ticks);
    print_bench_delays(rep, std::cout);
    return 0;
}

int cmd_compare(const std::string& runs, const std::string& protocols,
                const std::string& seeds, const std::string& out,
                const std::string& rows_out) {
    std::vector<std::string> names;
    std::stringstream ss(protocols);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) names.push_back(item);
    }
    CompareResult res = compare_runs(
        runs, names,
        seeds.empty() ? std::vector<std::uint64_t>{} : parse_seed_list(seeds),
        &std::cerr);
    std::cout << format_compare_table(res);
    if (!out.empty()) {
        write_compare_csv(out, res);
        std::cout << "table csv: " << out << "\n";
    }
    if (!rows_out.empty()) {
        write_report_csv(rows_out, res.rows);
        std::cout << "episode rows: " << rows_out << "\n";
    }
    return 0;
}

int cmd_ablate(const std::string& config, const std::string& ks,
               bool both_dr, std::uint64_t seed, std::int64_t samples,
               const std::string& out) {
    RunConfig cfg = load_run_config(config);
    if (samples > 0) cfg.ppo.total_samples = samples;
    AblationResult res = run_ablation_k(cfg, parse_int_list(ks), both_dr,
                                        seed, out, &std::cout);
    std::cout << "k  dr     span_s  final_return  final_distance\n";
    for (const AblationPoint& pt : res.points) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-2d %-5s %7.3f %13.2f %15.3f\n",
                      pt.k, pt.randomization ? "on" : "off", pt.span_seconds,
                      pt.final_stats.mean_return,
                      pt.final_stats.mean_moving_distance);
        std::cout << line;
    }
    std::cout << "curves: " << res.curves_csv << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    blas_set_single_thread();

    CLI::App app{
        "Multi-modal delay randomization: train, evaluate and profile "
        "delay-aware policies in the planar obstacle world"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train one policy run");
    std::string t_config = "default", t_mode, t_out;
    int t_k = 0;
    std::uint64_t t_seed = 1;
    std::int64_t t_samples = 0;
    train->add_option("--config", t_config,
                      "INI config path or the literal 'default'");
    train->add_option("--mode", t_mode,
                      "pipeline mode override (MMDR, NoDelay, FrameExtract, "
                      "FixedDelay, Interpolation, StateOnly)");
    train->add_option("--k", t_k, "frames per visual sub-buffer override");
    train->add_option("--seed", t_seed, "run seed");
    train->add_option("--samples", t_samples, "total samples override");
    train->add_option("--out", t_out,
                      "run directory (default runs/<mode>-s<seed>)");

    // eval
    auto* eval = app.add_subcommand(
        "eval", "Evaluate a checkpoint under a delay protocol");
    std::string e_ckpt, e_config, e_protocol = "train_env_random_delay";
    std::string e_seeds, e_out;
    int e_episodes = 0;
    eval->add_option("--checkpoint", e_ckpt, "checkpoint file")->required();
    eval->add_option("--config", e_config,
                     "run config (default: config.ini beside the checkpoint)");
    eval->add_option("--protocol", e_protocol,
                     "train_env_random_delay, moving_obstacles, zero_delay "
                     "or ablation_k");
    eval->add_option("--seeds", e_seeds, "comma-separated eval seeds (>= 3)");
    eval->add_option("--episodes", e_episodes, "episodes per seed override");
    eval->add_option("--out", e_out, "write per-episode rows CSV here");

    // bench-delays
    auto* bench = app.add_subcommand(
        "bench-delays",
        "Report per-mode observation staleness under the measured "
        "deployment latency profile");
    std::string b_config = "default";
    std::uint64_t b_seed = 1;
    int b_ticks = 5000;
    bench->add_option("--config", b_config, "INI config or 'default'");
    bench->add_option("--seed", b_seed, "stream jitter seed");
    bench->add_option("--ticks", b_ticks, "control ticks to simulate");

    // compare
    auto* compare = app.add_subcommand(
        "compare", "Evaluate every run directory and rank the methods");
    std::string c_runs, c_protocols = "train_env_random_delay";
    std::string c_seeds, c_out, c_rows;
    compare->add_option("--runs", c_runs, "directory of run directories")
        ->required();
    compare->add_option("--protocols", c_protocols,
                        "comma-separated protocol names");
    compare->add_option("--seeds", c_seeds, "comma-separated eval seeds");
    compare->add_option("--out", c_out, "write the ranking CSV here");
    compare->add_option("--rows", c_rows, "write all episode rows CSV here");

    // ablate-k
    auto* ablate = app.add_subcommand(
        "ablate-k", "Train a sweep over the sub-buffer size k");
    std::string a_config = "default", a_ks = "4,8,16", a_out = "runs/ablation";
    bool a_both = false;
    std::uint64_t a_seed = 1;
    std::int64_t a_samples = 0;
    ablate->add_option("--config", a_config, "INI config or 'default'");
    ablate->add_option("--ks", a_ks, "comma-separated k values");
    ablate->add_flag("--both-dr", a_both,
                     "train each k with and without domain randomization");
    ablate->add_option("--seed", a_seed, "run seed");
    ablate->add_option("--samples", a_samples, "total samples override");
    ablate->add_option("--out", a_out, "sweep output directory");

    // dump-config
    auto* dump = app.add_subcommand(
        "dump-config", "Print the resolved INI for a config");
    std::string d_config = "default";
    dump->add_option("--config", d_config, "INI config or 'default'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the parse error itself
        return 1;
    }

    try {
        if (*train) {
            return cmd_train(t_config, t_mode, t_k, t_seed, t_samples, t_out);
        }
        if (*eval) {
            return cmd_eval(e_ckpt, e_config, e_protocol, e_seeds, e_episodes,
                            e_out);
        }
        if (*bench) return cmd_bench(b_config, b_seed, b_ticks);
        if (*compare) {
            return cmd_compare(c_runs, c_protocols, c_seeds, c_out, c_rows);
        }
        if (*ablate) {
            return cmd_ablate(a_config, a_ks, a_both, a_seed, a_samples,
                              a_out);
        }
        if (*dump) {
            std::cout << run_config_to_string(load_run_config(d_config));
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
