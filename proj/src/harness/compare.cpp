#include "mmdr/harness/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace mmdr::harness {
namespace {

void mean_std(const std::vector<double>& xs, double* mean, double* stddev) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    *mean = m;
    *stddev = xs.size() > 1
                  ? std::sqrt(ss / static_cast<double>(xs.size() - 1))
                  : 0.0;
}

struct RunDir {
    std::string dir;
    std::string checkpoint;
    RunConfig cfg;
    nn::CheckpointMeta meta;
};

}  // namespace

CompareResult compare_runs(const std::string& runs_dir,
                           const std::vector<std::string>& protocol_names,
                           std::vector<std::uint64_t> eval_seeds,
                           std::ostream* log) {
    if (!fs::is_directory(runs_dir)) {
        throw std::runtime_error("compare: '" + runs_dir +
                                 "' is not a directory");
    }
    if (protocol_names.empty()) {
        throw std::invalid_argument("compare: no protocols given");
    }

    CompareResult result;

    std::vector<std::string> subdirs;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.is_directory()) subdirs.push_back(entry.path().string());
    }
    std::sort(subdirs.begin(), subdirs.end());

    std::vector<RunDir> runs;
    for (const std::string& dir : subdirs) {
        const std::string ckpt = dir + "/final.ckpt";
        const std::string cfgp = dir + "/config.ini";
        if (!fs::is_regular_file(ckpt)) {
            result.notes.push_back(dir + ": no final.ckpt, skipped");
            continue;
        }
        if (!fs::is_regular_file(cfgp)) {
            result.notes.push_back(dir + ": no config.ini, skipped");
            continue;
        }
        RunDir run;
        run.dir = dir;
        run.checkpoint = ckpt;
        try {
            run.cfg = load_run_config(cfgp);
            nn::Network net = nn::load_checkpoint(ckpt, &run.meta);
            (void)net;
        } catch (const std::exception& e) {
            result.notes.push_back(dir + ": " + e.what() + ", skipped");
            continue;
        }
        runs.push_back(std::move(run));
    }

    for (const std::string& proto_name : protocol_names) {
        // method -> train seed scores, keyed by first appearance.
        std::vector<std::string> method_order;
        std::map<std::string, std::vector<MethodScore>> scores;

        for (const RunDir& run : runs) {
            EvalProtocol proto =
                make_protocol(proto_name, run.cfg.eval, eval_seeds);
            if (log) {
                *log << "compare: " << run.meta.pipeline_mode << " seed "
                     << run.meta.seed << " under " << proto_name << " ("
                     << run.dir << ")\n"
                     << std::flush;
            }
            EvalReport rep;
            try {
                rep = evaluate(run.checkpoint, run.cfg, proto);
            } catch (const std::exception& e) {
                result.notes.push_back(run.dir + ": " + e.what() +
                                       ", skipped");
                continue;
            }
            auto [it, fresh] =
                scores.try_emplace(run.meta.pipeline_mode);
            if (fresh) method_order.push_back(run.meta.pipeline_mode);
            it->second.push_back({run.meta.seed, rep.distance_mean,
                                  rep.collision_mean, run.dir});
            result.rows.insert(result.rows.end(), rep.rows.begin(),
                               rep.rows.end());
        }

        std::vector<CompareEntry> entries;
        for (const std::string& method : method_order) {
            CompareEntry e;
            e.protocol = proto_name;
            e.method = method;
            e.scores = scores[method];
            std::vector<double> d, c;
            for (const MethodScore& s : e.scores) {
                d.push_back(s.distance);
                c.push_back(s.collisions);
            }
            mean_std(d, &e.distance_mean, &e.distance_std);
            mean_std(c, &e.collision_mean, &e.collision_std);
            entries.push_back(std::move(e));
        }

        // Pairwise wins over shared train seeds, on moving distance.
        for (std::size_t i = 0; i < entries.size(); ++i) {
            for (std::size_t j = i + 1; j < entries.size(); ++j) {
                PairwiseWins pw;
                pw.protocol = proto_name;
                pw.method_a = entries[i].method;
                pw.method_b = entries[j].method;
                for (const MethodScore& sa : entries[i].scores) {
                    for (const MethodScore& sb : entries[j].scores) {
                        if (sa.train_seed != sb.train_seed) continue;
                        if (sa.distance > sb.distance) {
                            ++pw.wins_a;
                        } else if (sb.distance > sa.distance) {
                            ++pw.wins_b;
                        } else {
                            ++pw.ties;
                        }
                    }
                }
                entries[i].wins += pw.wins_a;
                entries[i].losses += pw.wins_b;
                entries[j].wins += pw.wins_b;
                entries[j].losses += pw.wins_a;
                result.pairs.push_back(std::move(pw));
            }
        }

        std::stable_sort(entries.begin(), entries.end(),
                         [](const CompareEntry& a, const CompareEntry& b) {
                             return a.distance_mean > b.distance_mean;
                         });
        for (std::size_t i = 0; i < entries.size(); ++i) {
            entries[i].rank = static_cast<int>(i) + 1;
        }
        result.entries.insert(result.entries.end(), entries.begin(),
                              entries.end());
    }

    return result;
}

const PairwiseWins* find_pair(const CompareResult& result,
                              const std::string& protocol,
                              const std::string& method_a,
                              const std::string& method_b) {
    for (const PairwiseWins& pw : result.pairs) {
        if (pw.protocol != protocol) continue;
        if (pw.method_a == method_a && pw.method_b == method_b) return &pw;
    }
    return nullptr;
}

std::string format_compare_table(const CompareResult& result) {
    std::ostringstream os;
    std::string current;
    for (const CompareEntry& e : result.entries) {
        if (e.protocol != current) {
            current = e.protocol;
            os << "protocol: " << current << "\n";
            char head[160];
            std::snprintf(head, sizeof(head),
                          "  %-4s %-14s %5s %10s %9s %10s %9s %5s %6s\n",
                          "rank", "method", "seeds", "dist_mean", "dist_std",
                          "coll_mean", "coll_std", "wins", "losses");
            os << head;
        }
        char line[200];
        std::snprintf(line, sizeof(line),
                      "  %-4d %-14s %5zu %10.3f %9.3f %10.2f %9.2f %5d %6d\n",
                      e.rank, e.method.c_str(), e.scores.size(),
                      e.distance_mean, e.distance_std, e.collision_mean,
                      e.collision_std, e.wins, e.losses);
        os << line;
    }
    if (!result.pairs.empty()) {
        os << "paired train-seed wins on moving distance (a vs b):\n";
        for (const PairwiseWins& pw : result.pairs) {
            char line[200];
            std::snprintf(line, sizeof(line),
                          "  [%s] %s vs %s: %d-%d (%d ties)\n",
                          pw.protocol.c_str(), pw.method_a.c_str(),
                          pw.method_b.c_str(), pw.wins_a, pw.wins_b, pw.ties);
            os << line;
        }
    }
    for (const std::string& note : result.notes) {
        os << "note: " << note << "\n";
    }
    return os.str();
}

void write_compare_csv(const std::string& path, const CompareResult& result) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("compare: cannot write '" + path + "'");
    }
    out << "protocol,method,rank,seeds,distance_mean,distance_std,"
           "collision_steps_mean,collision_steps_std,wins,losses\n";
    for (const CompareEntry& e : result.entries) {
        char buf[64];
        out << e.protocol << ',' << e.method << ',' << e.rank << ','
            << e.scores.size() << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", e.distance_mean);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", e.distance_std);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", e.collision_mean);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", e.collision_std);
        out << buf << ',' << e.wins << ',' << e.losses << '\n';
    }
    if (!out) {
        throw std::runtime_error("compare: write to '" + path + "' failed");
    }
}

}  // namespace mmdr::harness
