#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcsmld/harness.hpp"

namespace {

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument("m-vector: bad entry '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("m-vector: empty");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo link simulation of soft-output MIMO detectors"};

    std::string config_path, preset_name, out_path, json_path, m_vector;
    std::vector<double> snr;
    std::vector<std::string> detectors;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double alpha = -1.0;
    int niter = 0;
    unsigned workers = 0;
    bool no_timing = false;

    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--preset", preset_name, "Scenario preset: test1, test2, test3 or test4");
    app.add_option("--snr", snr, "SNR points in dB (Es/N0 per receive antenna)")->delimiter(',');
    app.add_option("--trials", trials, "Trials per SNR point");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed");
    app.add_option("--detector", detectors, "Detector roster: mmse, spic, mlm, map, rcsmld")->delimiter(',');
    app.add_option("--m-vector", m_vector, "Candidate set sizes, e.g. 5,5,3,3");
    app.add_option("--alpha", alpha, "LLR combining weight in [0, 1]");
    app.add_option("--niter", niter, "SPIC iterations");
    app.add_option("--out", out_path, "CSV output path (stdout when omitted)");
    app.add_option("--json", json_path, "Optional JSON mirror of the CSV rows");
    app.add_option("--workers", workers, "Worker threads");
    app.add_flag("--no-timing", no_timing, "Report wall_ms as 0 for reproducible output");

    CLI11_PARSE(app, argc, argv);

    try {
        rcsmld::SimConfig cfg;
        if (!config_path.empty())
            cfg = rcsmld::load_config_file(config_path);
        else if (!preset_name.empty())
            cfg = rcsmld::preset(preset_name);
        else
            cfg = rcsmld::preset("test1");
        if (!config_path.empty() && !preset_name.empty()) {
            const auto p = rcsmld::preset(preset_name);
            cfg.detectors = p.detectors;
            cfg.bits_per_symbol = p.bits_per_symbol;
            cfg.impairments = p.impairments;
        }

        if (!snr.empty()) cfg.snr_db = snr;
        if (trials) cfg.trials = trials;
        if (*seed_opt) cfg.seed = seed;
        if (workers) cfg.workers = workers;
        if (no_timing) cfg.timing = false;
        if (!out_path.empty()) cfg.out_path = out_path;
        if (!json_path.empty()) cfg.json_path = json_path;
        if (!detectors.empty()) {
            const auto keep = cfg.detectors;
            cfg.detectors.clear();
            for (const auto& name : detectors) {
                auto e = rcsmld::default_detector(rcsmld::parse_detector_kind(name));
                for (const auto& k : keep)
                    if (k.kind == e.kind) e.config = k.config;
                cfg.detectors.push_back(e);
            }
        }
        for (auto& d : cfg.detectors) {
            if (!m_vector.empty()) d.config.m_vector = parse_ints(m_vector);
            if (alpha >= 0.0) d.config.alpha = alpha;
            if (niter > 0 && d.kind != rcsmld::DetectorKind::Mmse) d.config.n_iter = niter;
        }

        const auto rows = rcsmld::run(cfg);
        if (cfg.out_path.empty())
            std::fputs(rcsmld::format_csv(rows).c_str(), stdout);
        else
            rcsmld::write_results(cfg.out_path, rows);
        if (!cfg.json_path.empty()) rcsmld::write_json(cfg.json_path, rows);
    } catch (const std::exception& e) {
        std::cerr << "rcsmld-sim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
