#include "mmdr/harness/ablation.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmdr::harness {

double visual_span_seconds(int stack_count, int k, int control_hz) {
    if (stack_count <= 0 || k <= 0 || control_hz <= 0) {
        throw std::invalid_argument("span: all arguments must be > 0");
    }
    return static_cast<double>(stack_count * k) /
           static_cast<double>(control_hz);
}

AblationResult run_ablation_k(const RunConfig& base,
                              const std::vector<int>& ks,
                              bool with_and_without_rand, std::uint64_t seed,
                              const std::string& out_dir,
                              std::ostream* log) {
    if (ks.empty()) throw std::invalid_argument("ablation: no k values");
    if (out_dir.empty()) {
        throw std::invalid_argument("ablation: out_dir must not be empty");
    }
    std::filesystem::create_directories(out_dir);

    AblationResult result;
    std::ostringstream curves;
    curves << "k,randomization," << ppo::kMetricsHeader << "\n";

    for (int k : ks) {
        std::vector<bool> arms =
            with_and_without_rand ? std::vector<bool>{true, false}
                                  : std::vector<bool>{base.env.randomization
                                                          .enabled};
        for (bool dr : arms) {
            RunConfig cfg = base;
            cfg.env.pipeline.k = k;
            cfg.env.randomization.enabled = dr;
            cfg.validate();

            AblationPoint pt;
            pt.k = k;
            pt.randomization = dr;
            pt.span_seconds = visual_span_seconds(
                cfg.env.pipeline.stack_count, k, cfg.env.world.control_hz);
            pt.run_dir = out_dir + "/k" + std::to_string(k) +
                         (dr ? "-dr" : "-nodr") + "-s" + std::to_string(seed);

            if (log) {
                *log << "ablation: k=" << k << (dr ? " +dr" : " -dr")
                     << " span=" << pt.span_seconds << "s -> " << pt.run_dir
                     << "\n"
                     << std::flush;
            }

            std::filesystem::create_directories(pt.run_dir);
            save_run_config(pt.run_dir + "/config.ini", cfg);
            ppo::Trainer trainer(cfg.env, cfg.ppo, arch_for(cfg), seed,
                                 pt.run_dir);
            pt.final_stats = trainer.run();

            std::ifstream metrics(pt.run_dir + "/metrics.csv");
            std::string line;
            bool header = true;
            while (std::getline(metrics, line)) {
                if (header) {
                    header = false;
                    continue;
                }
                if (line.empty()) continue;
                curves << k << ',' << (dr ? "true" : "false") << ',' << line
                       << '\n';
            }

            result.points.push_back(std::move(pt));
        }
    }

    result.curves_csv = out_dir + "/ablation_curves.csv";
    std::ofstream out(result.curves_csv, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("ablation: cannot write '" +
                                 result.curves_csv + "'");
    }
    out << curves.str();
    return result;
}

}  // namespace mmdr::harness
