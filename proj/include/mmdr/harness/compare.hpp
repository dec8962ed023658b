#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mmdr/harness/eval.hpp"

namespace mmdr::harness {

// One trained run's score under one protocol (means over the protocol's
// eval seeds, see EvalReport).
struct MethodScore {
    std::uint64_t train_seed = 0;
    double distance = 0.0;
    double collisions = 0.0;  // collision steps per episode
    std::string run_dir;
};

struct CompareEntry {
    std::string protocol;
    std::string method;
    int rank = 0;  // 1 = largest mean moving distance within the protocol
    double distance_mean = 0.0;
    double distance_std = 0.0;  // sample std over train-seed scores
    double collision_mean = 0.0;
    double collision_std = 0.0;
    int wins = 0;    // paired train-seed wins on distance vs all rivals
    int losses = 0;
    std::vector<MethodScore> scores;
};

struct PairwiseWins {
    std::string protocol;
    std::string method_a;
    std::string method_b;
    int wins_a = 0;  // train seeds where a's score strictly beats b's
    int wins_b = 0;
    int ties = 0;
};

struct CompareResult {
    std::vector<CompareEntry> entries;  // grouped by protocol, rank order
    std::vector<PairwiseWins> pairs;
    std::vector<EpisodeRow> rows;       // every episode of every evaluation
    std::vector<std::string> notes;     // skipped directories and why
};

// Scans `runs_dir` for run directories (anything directly inside it holding
// final.ckpt + config.ini), evaluates each under every named protocol with
// the given eval seeds (empty = protocol default), and builds the
// consolidated table. Directories without a usable checkpoint are reported
// in `notes` and simply absent from the table; only a completely unreadable
// runs_dir throws. `log`, when given, receives one progress line per
// evaluation.
CompareResult compare_runs(const std::string& runs_dir,
                           const std::vector<std::string>& protocol_names,
                           std::vector<std::uint64_t> eval_seeds = {},
                           std::ostream* log = nullptr);

const PairwiseWins* find_pair(const CompareResult& result,
                              const std::string& protocol,
                              const std::string& method_a,
                              const std::string& method_b);

// Human-readable ranking plus the pairwise win matrix.
std::string format_compare_table(const CompareResult& result);

// protocol,method,rank,seeds,distance_mean,distance_std,
// collision_steps_mean,collision_steps_std,wins,losses
void write_compare_csv(const std::string& path, const CompareResult& result);

}  // namespace mmdr::harness
