#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mmdr/harness/ablation.hpp"
#include "mmdr/harness/bench_delays.hpp"
#include "mmdr/harness/compare.hpp"
#include "mmdr/harness/config.hpp"
#include "mmdr/harness/eval.hpp"
#include "mmdr/harness/train.hpp"

using namespace mmdr;
using namespace mmdr::harness;

namespace fs = std::filesystem;

namespace {

// Cheap world for evaluation tests: short episodes, a handful of obstacles.
RunConfig eval_test_config(PipelineMode mode) {
    RunConfig cfg;
    cfg.env.pipeline.mode = mode;
    cfg.env.world.obstacle_count = {2, 3};
    cfg.env.world.max_episode_steps = 30;
    cfg.eval.episodes_per_seed = 2;
    return cfg;
}

// Micro PPO budget: one 128-sample batch, two envs, short episodes.
RunConfig micro_train_config(PipelineMode mode) {
    RunConfig cfg = eval_test_config(mode);
    cfg.env.world.max_episode_steps = 16;
    cfg.ppo.total_samples = 128;
    cfg.ppo.batch_size = 128;
    cfg.ppo.minibatches = 4;
    cfg.ppo.epochs = 2;
    cfg.ppo.num_envs = 2;
    return cfg;
}

std::string make_checkpoint(const fs::path& path, const RunConfig& cfg,
                            std::uint64_t seed) {
    nn::Network net(arch_for(cfg), seed);
    nn::CheckpointMeta meta;
    meta.pipeline_mode = pipeline_mode_name(cfg.env.pipeline.mode);
    meta.k = cfg.env.pipeline.k;
    meta.seed = seed;
    nn::save_checkpoint(path.string(), net, meta);
    return path.string();
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<char>(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
}

bool rows_equal(const EpisodeRow& a, const EpisodeRow& b) {
    return a.method == b.method && a.protocol == b.protocol &&
           a.seed == b.seed && a.episode == b.episode &&
           a.moving_distance == b.moving_distance &&
           a.collision_steps == b.collision_steps &&
           a.collision_count == b.collision_count &&
           a.episode_length == b.episode_length &&
           a.proprio_delay == b.proprio_delay &&
           a.visual_delay == b.visual_delay;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("default config literal matches the in-code defaults") {
    RunConfig def = load_run_config("default");
    RunConfig plain;
    CHECK(run_config_to_string(def) == run_config_to_string(plain));
    CHECK(def.env.pipeline.mode == PipelineMode::MMDR);
    CHECK(def.env.pipeline.k == 4);
    CHECK(def.ppo.total_samples == 2'000'000);
    CHECK(def.ppo.batch_size == 16384);
    CHECK(def.eval.injected_delay.lower == 0.04);
    CHECK(def.eval.injected_delay.upper == 0.12);
}

TEST_CASE("config round-trips through the INI text exactly") {
    RunConfig cfg;
    cfg.env.pipeline.mode = PipelineMode::FrameExtract;
    cfg.env.pipeline.k = 8;
    cfg.env.pipeline.per_episode_indices = true;
    cfg.env.world.control_hz = 20;
    cfg.env.world.sim_hz = 400;
    cfg.env.world.arena_length = 7.25;
    cfg.env.world.obstacle_count = {3, 5};
    cfg.env.randomization.enabled = false;
    cfg.env.randomization.proprio_latency = {0.01, 0.03};
    cfg.ppo.lr = 3e-4;
    cfg.ppo.total_samples = 500'000;
    cfg.eval.episodes_per_seed = 7;
    cfg.eval.obstacle_speed = {0.1, 0.3};
    // Normalize the derived fields the loader recomputes.
    cfg.env.pipeline.control_dt = 1.0 / 20.0;
    cfg.env.pipeline.proprio_delay_dist = {0.01, 0.03};
    cfg.env.world.gamma = cfg.ppo.gamma;

    std::string text = run_config_to_string(cfg);
    RunConfig back = run_config_from_string(text);
    CHECK(run_config_to_string(back) == text);
    CHECK(back.env.pipeline.mode == PipelineMode::FrameExtract);
    CHECK(back.env.pipeline.k == 8);
    CHECK(back.env.world.arena_length == 7.25);
    CHECK(back.ppo.lr == 3e-4);
    CHECK(back.eval.obstacle_speed.upper == 0.3);
}

TEST_CASE("loader derives the cross-section wiring") {
    std::string text =
        "[world]\ncontrol_hz = 50\n"
        "[randomization]\nproprio_latency_lower = 0.005\n"
        "proprio_latency_upper = 0.02\n"
        "[ppo]\ngamma = 0.95\n";
    RunConfig cfg = run_config_from_string(text);
    CHECK(cfg.env.pipeline.control_dt == 1.0 / 50.0);
    CHECK(cfg.env.pipeline.proprio_delay_dist.lower == 0.005);
    CHECK(cfg.env.pipeline.proprio_delay_dist.upper == 0.02);
    CHECK(cfg.env.world.gamma == 0.95);
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS_AS((void)run_config_from_string("[world]\nnot_a_key = 3\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_string("[nope]\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_string("[world]\nsim_hz = fast\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_string("sim_hz = 400\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_string("[world\nsim_hz = 400\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_string("[world]\nsim_hz\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_string("[pipeline]\nmode = Hmm\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)load_run_config("/does/not/exist.ini"),
                    std::invalid_argument);
}

TEST_CASE("architecture is derived from the environment shape") {
    RunConfig cfg;
    cfg.env.pipeline.stack_count = 4;
    cfg.env.pipeline.proprio_history = 3;
    nn::ArchConfig a = arch_for(cfg);
    CHECK(a.in_channels == 4);
    CHECK(a.in_rows == 32);
    CHECK(a.in_cols == 32);
    CHECK(a.proprio_dim == 24);
    CHECK_FALSE(a.state_only);
    CHECK(a.proprio_scale.size() == 24);

    cfg.env.pipeline.mode = PipelineMode::StateOnly;
    CHECK(arch_for(cfg).state_only);
}

TEST_CASE("stock protocols") {
    EvalConfig eval;
    EvalProtocol p = make_protocol("train_env_random_delay", eval);
    CHECK(p.injected_delay.lower == 0.04);
    CHECK(p.injected_delay.upper == 0.12);
    CHECK_FALSE(p.moving_obstacles);
    CHECK(p.seeds.size() == 5);

    EvalProtocol m = make_protocol("moving_obstacles", eval, {7, 8, 9});
    CHECK(m.moving_obstacles);
    CHECK(m.obstacle_speed.lower == 0.05);
    CHECK(m.obstacle_speed.upper == 0.2);
    CHECK(m.seeds == std::vector<std::uint64_t>{7, 8, 9});

    EvalProtocol z = make_protocol("zero_delay", eval);
    CHECK(z.injected_delay.upper == 0.0);
    CHECK(make_protocol("ablation_k", eval).injected_delay.upper == 0.0);

    CHECK_THROWS_AS((void)make_protocol("nope", eval), std::invalid_argument);
    CHECK_THROWS_AS((void)make_protocol("zero_delay", eval, {1, 2}),
                    std::invalid_argument);
}

TEST_CASE("evaluate is deterministic and leaves the checkpoint alone") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_eval";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg = eval_test_config(PipelineMode::MMDR);
    std::string ckpt = make_checkpoint(dir / "net.ckpt", cfg, 11);
    std::vector<char> before = slurp(ckpt);

    EvalProtocol proto = make_protocol("train_env_random_delay", cfg.eval,
                                       {1, 2, 3});
    EvalReport a = evaluate(ckpt, cfg, proto);
    EvalReport b = evaluate(ckpt, cfg, proto);

    REQUIRE(a.rows.size() == 3 * 2);
    REQUIRE(b.rows.size() == a.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(rows_equal(a.rows[i], b.rows[i]));
    }
    CHECK(report_rows_to_csv(a.rows) == report_rows_to_csv(b.rows));
    CHECK(a.distance_mean == b.distance_mean);
    CHECK(a.distance_std == b.distance_std);

    CHECK(slurp(ckpt) == before);  // evaluation never writes the checkpoint

    CHECK(a.method == "MMDR");
    CHECK(a.protocol == "train_env_random_delay");
    for (const EpisodeRow& r : a.rows) {
        CHECK(r.proprio_delay >= 0.04);
        CHECK(r.proprio_delay <= 0.12);
        CHECK(r.visual_delay >= 0.04);
        CHECK(r.visual_delay <= 0.12);
        CHECK(r.episode_length >= 1);
        CHECK(r.episode_length <= cfg.env.world.max_episode_steps);
        CHECK(r.collision_steps >= 0);
        CHECK(r.collision_count <= r.collision_steps);
    }
}

TEST_CASE("evaluate draws the documented injection stream") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_inj";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg = eval_test_config(PipelineMode::MMDR);
    cfg.env.world.max_episode_steps = 10;
    std::string ckpt = make_checkpoint(dir / "net.ckpt", cfg, 3);

    EvalProtocol proto = make_protocol("train_env_random_delay", cfg.eval,
                                       {5, 6, 7});
    proto.episodes_per_seed = 3;
    EvalReport rep = evaluate(ckpt, cfg, proto);

    // Per episode: proprio first, then visual, from the per-episode stream.
    for (const EpisodeRow& r : rep.rows) {
        Rng er = make_rng(r.seed, stream::kEval,
                          static_cast<std::uint64_t>(r.episode));
        double p = uniform(er, 0.04, 0.12);
        double v = uniform(er, 0.04, 0.12);
        CHECK(r.proprio_delay == p);
        CHECK(r.visual_delay == v);
    }
}

TEST_CASE("injected modality delays are independent") {
    // The draw recipe evaluate() uses, sampled wide: the two modalities
    // must decorrelate (they come from the same stream but independent
    // draws), with |rho| comfortably inside 0.05.
    std::vector<double> ps, vs;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        for (int ep = 0; ep < 5000; ++ep) {
            Rng er = make_rng(seed, stream::kEval,
                              static_cast<std::uint64_t>(ep));
            ps.push_back(uniform(er, 0.04, 0.12));
            vs.push_back(uniform(er, 0.04, 0.12));
        }
    }
    double rho = pearson(ps, vs);
    CHECK(std::abs(rho) <= 0.05);

    // And both marginals actually span the range.
    CHECK(*std::min_element(ps.begin(), ps.end()) < 0.045);
    CHECK(*std::max_element(ps.begin(), ps.end()) > 0.115);
    CHECK(*std::min_element(vs.begin(), vs.end()) < 0.045);
    CHECK(*std::max_element(vs.begin(), vs.end()) > 0.115);
}

TEST_CASE("aggregates recompute from the raw rows") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_agg";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg = eval_test_config(PipelineMode::NoDelay);
    cfg.env.world.max_episode_steps = 12;
    std::string ckpt = make_checkpoint(dir / "net.ckpt", cfg, 4);
    EvalProtocol proto = make_protocol("zero_delay", cfg.eval, {1, 2, 3, 4});
    proto.episodes_per_seed = 3;
    EvalReport rep = evaluate(ckpt, cfg, proto);

    REQUIRE(rep.seeds.size() == 4);
    // Recompute by hand with the documented formulas.
    std::vector<double> seed_means;
    for (const SeedSummary& s : rep.seeds) {
        double sum = 0.0;
        int n = 0;
        for (const EpisodeRow& r : rep.rows) {
            if (r.seed == s.seed) {
                sum += r.moving_distance;
                ++n;
            }
        }
        REQUIRE(n == 3);
        CHECK(s.mean_distance == doctest::Approx(sum / n).epsilon(1e-12));
        seed_means.push_back(sum / n);
    }
    double mean = 0.0;
    for (double m : seed_means) mean += m;
    mean /= static_cast<double>(seed_means.size());
    double ss = 0.0;
    for (double m : seed_means) ss += (m - mean) * (m - mean);
    double stddev = std::sqrt(ss / static_cast<double>(seed_means.size() - 1));
    CHECK(rep.distance_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(rep.distance_std == doctest::Approx(stddev).epsilon(1e-12));
}

TEST_CASE("evaluate rejects mismatched checkpoints") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_mismatch";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg = eval_test_config(PipelineMode::MMDR);
    std::string ckpt = make_checkpoint(dir / "net.ckpt", cfg, 5);
    EvalProtocol proto = make_protocol("zero_delay", cfg.eval, {1, 2, 3});

    RunConfig wrong_mode = cfg;
    wrong_mode.env.pipeline.mode = PipelineMode::NoDelay;
    CHECK_THROWS_AS((void)evaluate(ckpt, wrong_mode, proto),
                    std::runtime_error);

    RunConfig wrong_k = cfg;
    wrong_k.env.pipeline.k = 8;
    CHECK_THROWS_AS((void)evaluate(ckpt, wrong_k, proto), std::runtime_error);

    RunConfig wrong_shape = cfg;
    wrong_shape.env.world.depth_rows = 64;
    wrong_shape.env.world.depth_cols = 64;
    CHECK_THROWS_AS((void)evaluate(ckpt, wrong_shape, proto),
                    std::runtime_error);
}

TEST_CASE("report CSV has the pinned columns and rewrites identically") {
    EpisodeRow r;
    r.method = "MMDR";
    r.protocol = "zero_delay";
    r.seed = 9;
    r.episode = 1;
    r.moving_distance = 1.25;
    r.collision_steps = 3;
    r.collision_count = 2;
    r.episode_length = 40;
    r.proprio_delay = 0.05;
    r.visual_delay = 0.075;

    std::string csv = report_rows_to_csv({r});
    std::istringstream in(csv);
    std::string header, row;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    CHECK(header ==
          "method,protocol,seed,episode,moving_distance,collision_steps,"
          "collision_count,episode_length,proprio_delay,visual_delay");
    CHECK(row == "MMDR,zero_delay,9,1,1.25,3,2,40,0.050000000000000003,"
                 "0.074999999999999997");

    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_csv";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_report_csv((dir / "r.csv").string(), {r});
    std::vector<char> bytes = slurp((dir / "r.csv").string());
    CHECK(std::string(bytes.begin(), bytes.end()) == csv);
}

TEST_CASE("visual span arithmetic") {
    CHECK(visual_span_seconds(4, 4, 25) == 0.64);
    CHECK(visual_span_seconds(4, 8, 25) == 1.28);
    CHECK(visual_span_seconds(4, 16, 25) == 2.56);
    CHECK(visual_span_seconds(4, 1, 25) == 0.16);
    // The two ways of writing the same real number agree bitwise.
    for (int k : {1, 4, 8, 16}) {
        CHECK(visual_span_seconds(4, k, 25) == 4.0 * k / 25.0);
    }
    CHECK_THROWS_AS((void)visual_span_seconds(0, 4, 25),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)visual_span_seconds(4, -1, 25),
                    std::invalid_argument);
}

TEST_CASE("delay bench reproduces the configured stream rates") {
    LatencyProfile profile;  // stock deployment numbers
    ObservationPipelineConfig base;
    BenchDelaysReport rep = run_bench_delays(profile, base, 17, 2000);

    CHECK(rep.measured_depth_interval_mean ==
          doctest::Approx(0.033).epsilon(0.1));
    CHECK(rep.measured_proprio_interval_mean ==
          doctest::Approx(0.0025).epsilon(0.1));
    REQUIRE(rep.modes.size() == 5);

    auto find = [&](const char* name) -> const ModeDelayStats& {
        for (const ModeDelayStats& m : rep.modes) {
            if (m.mode == name) return m;
        }
        REQUIRE(false);
        return rep.modes[0];
    };

    const ModeDelayStats& mmdr_stats = find("MMDR");
    const ModeDelayStats& nodelay = find("NoDelay");
    const ModeDelayStats& fixed = find("FixedDelay");
    const ModeDelayStats& extract = find("FrameExtract");

    // Newest-frame staleness orders the way the modes are defined to:
    // NoDelay reads the freshest frame, FixedDelay trails by ~fixed_delay,
    // MMDR sits in between on average but spreads wider.
    CHECK(nodelay.visual_age_mean < 0.04);
    CHECK(nodelay.visual_age_mean < mmdr_stats.visual_age_mean);
    CHECK(fixed.visual_age_mean >= base.fixed_delay);
    CHECK(mmdr_stats.visual_age_std > nodelay.visual_age_std);
    // The randomized stack reaches deeper into the past than the newest
    // frames NoDelay stacks, and FrameExtract's deterministic comb spans
    // the full window.
    CHECK(mmdr_stats.stack_span_mean > nodelay.stack_span_mean);
    CHECK(extract.stack_span_mean > mmdr_stats.stack_span_mean * 0.9);
    // Proprio: FixedDelay queries ~fixed_delay into the past.
    CHECK(fixed.proprio_age_mean ==
          doctest::Approx(base.fixed_delay).epsilon(0.15));
    CHECK(nodelay.proprio_age_mean < 0.01);
    // Compute tail pushes reaction beyond the raw visual age.
    CHECK(mmdr_stats.reaction_mean >
          mmdr_stats.visual_age_mean + profile.inference_mean * 0.5);

    std::ostringstream os;
    print_bench_delays(rep, os);
    std::string text = os.str();
    CHECK(text.find("depth interval    0.033 +/- 0.004") != std::string::npos);
    CHECK(text.find("MMDR") != std::string::npos);
    CHECK(text.find("depth stream interval mean") != std::string::npos);
}

TEST_CASE("micro training run feeds compare end to end") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_compare";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig mmdr_cfg = micro_train_config(PipelineMode::MMDR);
    RunConfig nodelay_cfg = micro_train_config(PipelineMode::NoDelay);

    std::string ck1 =
        run_training(mmdr_cfg, 1, (dir / "MMDR-s1").string());
    std::string ck2 =
        run_training(nodelay_cfg, 1, (dir / "NoDelay-s1").string());
    CHECK(fs::is_regular_file(ck1));
    CHECK(fs::is_regular_file(ck2));
    CHECK(fs::is_regular_file(dir / "MMDR-s1" / "config.ini"));
    CHECK(fs::is_regular_file(dir / "MMDR-s1" / "metrics.csv"));

    // The stored config reconstructs the run's environment.
    RunConfig back = load_run_config((dir / "MMDR-s1" / "config.ini").string());
    CHECK(back.env.pipeline.mode == PipelineMode::MMDR);
    CHECK(back.ppo.total_samples == 128);

    // A directory without a checkpoint is noted, not fatal.
    fs::create_directories(dir / "broken-run");

    CompareResult res =
        compare_runs(dir.string(), {"zero_delay"}, {1, 2, 3}, nullptr);
    REQUIRE(res.entries.size() == 2);
    CHECK(res.entries[0].rank == 1);
    CHECK(res.entries[1].rank == 2);
    CHECK(res.entries[0].distance_mean >= res.entries[1].distance_mean);
    CHECK(res.rows.size() == 2 * 3 * 2);  // methods * seeds * episodes

    const PairwiseWins* pw = find_pair(res, "zero_delay", "MMDR", "NoDelay");
    REQUIRE(pw != nullptr);
    CHECK(pw->wins_a + pw->wins_b + pw->ties == 1);  // one shared train seed

    bool noted = false;
    for (const std::string& n : res.notes) {
        if (n.find("broken-run") != std::string::npos) noted = true;
    }
    CHECK(noted);

    std::string table = format_compare_table(res);
    CHECK(table.find("MMDR") != std::string::npos);
    CHECK(table.find("NoDelay") != std::string::npos);
    CHECK(table.find("rank") != std::string::npos);

    write_compare_csv((dir / "compare.csv").string(), res);
    std::ifstream in(dir / "compare.csv");
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "protocol,method,rank,seeds,distance_mean,distance_std,"
          "collision_steps_mean,collision_steps_std,wins,losses");

    // The same checkpoint mounted under two names scores identically.
    fs::create_directories(dir / "MMDR-copy");
    fs::copy_file(dir / "MMDR-s1" / "final.ckpt",
                  dir / "MMDR-copy" / "final.ckpt");
    fs::copy_file(dir / "MMDR-s1" / "config.ini",
                  dir / "MMDR-copy" / "config.ini");
    CompareResult res2 =
        compare_runs(dir.string(), {"zero_delay"}, {1, 2, 3}, nullptr);
    const CompareEntry* mm = nullptr;
    for (const CompareEntry& e : res2.entries) {
        if (e.method == "MMDR") mm = &e;
    }
    REQUIRE(mm != nullptr);
    REQUIRE(mm->scores.size() == 2);
    CHECK(mm->scores[0].distance == mm->scores[1].distance);
    CHECK(mm->scores[0].collisions == mm->scores[1].collisions);

    CHECK_THROWS_AS(
        (void)compare_runs((dir / "nowhere").string(), {"zero_delay"}),
        std::runtime_error);
}

TEST_CASE("k ablation trains each arm and reports exact spans") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_ablate";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig base = micro_train_config(PipelineMode::MMDR);
    AblationResult res =
        run_ablation_k(base, {4, 8}, /*with_and_without_rand=*/false, 1,
                       dir.string(), nullptr);

    REQUIRE(res.points.size() == 2);
    CHECK(res.points[0].k == 4);
    CHECK(res.points[0].span_seconds == 0.64);
    CHECK(res.points[1].k == 8);
    CHECK(res.points[1].span_seconds == 1.28);
    for (const AblationPoint& pt : res.points) {
        CHECK(fs::is_regular_file(fs::path(pt.run_dir) / "final.ckpt"));
        CHECK(fs::is_regular_file(fs::path(pt.run_dir) / "config.ini"));
        CHECK(pt.final_stats.samples == 128);
    }

    std::ifstream in(res.curves_csv);
    REQUIRE(in.good());
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == std::string("k,randomization,") + ppo::kMetricsHeader);
    int data_lines = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++data_lines;
    }
    CHECK(data_lines == 2);  // one batch per run
}

TEST_CASE("moving obstacle protocol runs against a static-trained net") {
    const fs::path dir = fs::temp_directory_path() / "mmdr_harness_moving";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg = eval_test_config(PipelineMode::MMDR);
    cfg.env.world.max_episode_steps = 10;
    std::string ckpt = make_checkpoint(dir / "net.ckpt", cfg, 2);
    EvalProtocol proto = make_protocol("moving_obstacles", cfg.eval, {1, 2, 3});
    proto.episodes_per_seed = 1;
    EvalReport rep = evaluate(ckpt, cfg, proto);
    CHECK(rep.rows.size() == 3);
    CHECK(rep.protocol == "moving_obstacles");
    for (const EpisodeRow& r : rep.rows) CHECK(r.episode_length >= 1);
}
