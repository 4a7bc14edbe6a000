#include "rcsmld/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "rcsmld/mmse_spic.hpp"
#include "rcsmld/oracle.hpp"

namespace rcsmld {

using nlohmann::json;

DetectorKind parse_detector_kind(const std::string& s) {
    if (s == "mmse") return DetectorKind::Mmse;
    if (s == "spic") return DetectorKind::Spic;
    if (s == "mlm") return DetectorKind::Mlm;
    if (s == "map") return DetectorKind::Map;
    if (s == "rcsmld") return DetectorKind::Rcsmld;
    throw std::invalid_argument("detector: unknown kind '" + s + "' (mmse, spic, mlm, map, rcsmld)");
}

std::string to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::Mmse: return "mmse";
        case DetectorKind::Spic: return "spic";
        case DetectorKind::Mlm: return "mlm";
        case DetectorKind::Map: return "map";
        case DetectorKind::Rcsmld: return "rcsmld";
    }
    return "?";
}

void SimConfig::validate() const {
    const int nt = antennas.n_tx, nr = antennas.n_rx, nl = antennas.n_layers;
    auto supported = [](int n) { return n == 1 || n == 2 || n == 4; };
    if (!supported(nt)) throw std::invalid_argument("antennas.n_tx: must be 1, 2 or 4");
    if (!supported(nr)) throw std::invalid_argument("antennas.n_rx: must be 1, 2 or 4");
    if (nl < 1 || nl > std::min(nt, nr)) throw std::invalid_argument("antennas.n_layers: must lie in [1, min(n_tx, n_rx)]");
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6)
        throw std::invalid_argument("bits_per_symbol: must be 2, 4 or 6");
    if (snr_db.empty()) throw std::invalid_argument("snr_db: must not be empty");
    for (double s : snr_db)
        if (!std::isfinite(s)) throw std::invalid_argument("snr_db: values must be finite");
    if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
    if (workers < 1) throw std::invalid_argument("workers: must be >= 1");
    if (detectors.empty()) throw std::invalid_argument("detectors: roster is empty");
    impairments.validate();
    const std::size_t alphabet = std::size_t{1} << bits_per_symbol;
    for (const auto& d : detectors) {
        if (d.name.empty()) throw std::invalid_argument("detectors.name: must not be empty");
        if (d.kind == DetectorKind::Rcsmld) {
            try {
                d.config.validate();
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("detectors." + d.name + "." + e.what());
            }
            if (d.config.m_vector.size() != static_cast<std::size_t>(nl))
                throw std::invalid_argument("detectors." + d.name + ".m_vector: length must equal n_layers");
            for (int m : d.config.m_vector)
                if (static_cast<std::size_t>(m) > alphabet)
                    throw std::invalid_argument("detectors." + d.name + ".m_vector: entry exceeds the alphabet size");
        }
        if (d.kind == DetectorKind::Spic && d.config.n_iter < 1)
            throw std::invalid_argument("detectors." + d.name + ".n_iter: must be >= 1");
        if ((d.kind == DetectorKind::Mlm || d.kind == DetectorKind::Map) &&
            std::pow(static_cast<double>(alphabet), nl) > kMaxHypotheses)
            throw std::invalid_argument("detectors." + d.name + ": exhaustive search space exceeds 1e6");
    }
}

double noise_density(double snr_db, int n_layers) { return n_layers * std::pow(10.0, -snr_db / 10.0); }

DetectorEntry default_detector(DetectorKind kind) {
    DetectorEntry e;
    e.kind = kind;
    e.name = to_string(kind);
    if (kind == DetectorKind::Mmse) e.config.n_iter = 1;
    return e;
}

namespace {

std::vector<int> default_m_vector(int q, int n_layers) {
    std::vector<int> m;
    switch (q) {
        case 2: m = {4, 4, 2, 2}; break;
        case 4: m = {5, 5, 3, 3}; break;
        default: m = {14, 9, 5, 4}; break;
    }
    m.resize(static_cast<std::size_t>(n_layers), m.back());
    return m;
}

}  // namespace

SimConfig preset(const std::string& name) {
    SimConfig cfg;
    cfg.impairments.evm_fraction = 0.06;
    std::vector<DetectorKind> roster{DetectorKind::Mmse, DetectorKind::Spic, DetectorKind::Rcsmld, DetectorKind::Mlm};
    bool mcmc = false;
    if (name == "test1") {
        cfg.bits_per_symbol = 4;
        cfg.snr_db = {12, 15, 18, 21};
    } else if (name == "test2") {
        cfg.bits_per_symbol = 6;
        cfg.snr_db = {20, 23, 26, 29};
        roster.pop_back();
    } else if (name == "test3") {
        cfg.bits_per_symbol = 2;
        cfg.impairments.alpha_tx = cfg.impairments.beta_rx = 0.9;
        cfg.snr_db = {6, 9, 12, 15};
    } else if (name == "test4") {
        cfg.bits_per_symbol = 4;
        cfg.impairments.alpha_tx = cfg.impairments.beta_rx = 0.1;
        cfg.snr_db = {12, 15, 18, 21};
        mcmc = true;
    } else {
        throw std::invalid_argument("preset: unknown name '" + name + "' (test1..test4)");
    }
    for (DetectorKind k : roster) {
        DetectorEntry e = default_detector(k);
        e.config.m_vector = default_m_vector(cfg.bits_per_symbol, cfg.antennas.n_layers);
        cfg.detectors.push_back(e);
        if (k == DetectorKind::Rcsmld && mcmc) {
            e.name = "rcsmld_mcmc";
            e.config.mcmc = true;
            cfg.detectors.push_back(e);
        }
    }
    return cfg;
}

namespace {

template <class T>
void read_if(const json& j, const char* key, T& out, const std::string& field) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(field + ": wrong type");
    }
}

DetectorEntry parse_detector(const json& j, int q, int n_layers) {
    if (!j.is_object()) throw std::invalid_argument("detectors: entries must be objects");
    std::string type;
    read_if(j, "type", type, "detectors.type");
    if (type.empty()) throw std::invalid_argument("detectors.type: missing");
    DetectorEntry e = default_detector(parse_detector_kind(type));
    e.config.m_vector = default_m_vector(q, n_layers);
    read_if(j, "name", e.name, "detectors.name");
    const std::string f = "detectors." + e.name;
    auto& c = e.config;
    read_if(j, "m_vector", c.m_vector, f + ".m_vector");
    read_if(j, "n_iter", c.n_iter, f + ".n_iter");
    read_if(j, "alpha", c.alpha, f + ".alpha");
    read_if(j, "reduction", c.reduction, f + ".reduction");
    read_if(j, "ce_aware", c.ce_aware, f + ".ce_aware");
    read_if(j, "llr_clip", c.llr_clip, f + ".llr_clip");
    read_if(j, "prior_clip", c.prior_clip, f + ".prior_clip");
    if (j.contains("pairing")) {
        std::string p;
        read_if(j, "pairing", p, f + ".pairing");
        if (p == "same")
            c.pairing = PairingMode::SameLayer;
        else if (p == "cross")
            c.pairing = PairingMode::CrossLayer;
        else if (p != "none")
            throw std::invalid_argument(f + ".pairing: expected none, same or cross");
    }
    if (j.contains("accounting")) {
        std::string a;
        read_if(j, "accounting", a, f + ".accounting");
        if (a == "per_re")
            c.accounting = AccountingMode::PerRe;
        else if (a == "channel_rate_delta")
            c.accounting = AccountingMode::ChannelRateDeltaExcluded;
        else
            throw std::invalid_argument(f + ".accounting: expected per_re or channel_rate_delta");
    }
    if (j.contains("mcmc")) {
        const json& m = j.at("mcmc");
        if (m.is_boolean()) {
            c.mcmc = m.get<bool>();
        } else if (m.is_object()) {
            c.mcmc = true;
            read_if(m, "enabled", c.mcmc, f + ".mcmc.enabled");
            read_if(m, "samplers", c.gibbs.n_samplers, f + ".mcmc.samplers");
            read_if(m, "sweeps", c.gibbs.n_sweeps, f + ".mcmc.sweeps");
            read_if(m, "temperature", c.gibbs.temperature, f + ".mcmc.temperature");
            if (m.contains("pool_cap")) {
                read_if(m, "pool_cap", c.gibbs.pool_cap, f + ".mcmc.pool_cap");
                c.gibbs_match_budget = false;
            }
        } else {
            throw std::invalid_argument(f + ".mcmc: expected a boolean or an object");
        }
    }
    if (e.kind == DetectorKind::Mmse) c.n_iter = 1;
    return e;
}

}  // namespace

SimConfig load_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& err) {
        throw std::invalid_argument(std::string("config: ") + err.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    SimConfig cfg;
    if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());
    if (j.contains("antennas")) {
        const json& a = j.at("antennas");
        read_if(a, "n_tx", cfg.antennas.n_tx, "antennas.n_tx");
        read_if(a, "n_rx", cfg.antennas.n_rx, "antennas.n_rx");
        read_if(a, "n_layers", cfg.antennas.n_layers, "antennas.n_layers");
    }
    read_if(j, "bits_per_symbol", cfg.bits_per_symbol, "bits_per_symbol");
    read_if(j, "snr_db", cfg.snr_db, "snr_db");
    read_if(j, "trials", cfg.trials, "trials");
    read_if(j, "seed", cfg.seed, "seed");
    read_if(j, "workers", cfg.workers, "workers");
    read_if(j, "timing", cfg.timing, "timing");
    read_if(j, "noiseless", cfg.noiseless, "noiseless");
    read_if(j, "output", cfg.out_path, "output");
    read_if(j, "json_output", cfg.json_path, "json_output");
    if (j.contains("impairments")) {
        const json& i = j.at("impairments");
        read_if(i, "evm", cfg.impairments.evm_fraction, "impairments.evm");
        read_if(i, "sigma_ce_sq", cfg.impairments.sigma_ce_sq, "impairments.sigma_ce_sq");
        read_if(i, "alpha_tx", cfg.impairments.alpha_tx, "impairments.alpha_tx");
        read_if(i, "beta_rx", cfg.impairments.beta_rx, "impairments.beta_rx");
    }
    if (j.contains("detectors")) {
        const json& d = j.at("detectors");
        if (!d.is_array()) throw std::invalid_argument("detectors: expected an array");
        cfg.detectors.clear();
        for (const auto& e : d) cfg.detectors.push_back(parse_detector(e, cfg.bits_per_symbol, cfg.antennas.n_layers));
    }
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

namespace {

struct TrialContext {
    const SimConfig& cfg;
    const Constellation& c;
};

void run_one(const TrialContext& ctx, std::size_t snr_idx, std::size_t trial_idx, TrialRecord* out) {
    const SimConfig& cfg = ctx.cfg;
    const Constellation& c = ctx.c;
    const std::uint64_t trial_seed = derive_seed(cfg.seed, snr_idx, trial_idx);
    Rng rng(trial_seed);
    const double snr = cfg.snr_db[snr_idx];
    const double n0 = noise_density(snr, cfg.antennas.n_layers);

    const ChannelRealization ch = generate_channel(rng, cfg.antennas, cfg.impairments, n0);
    const std::size_t n_bits = static_cast<std::size_t>(cfg.antennas.n_layers * c.bits_per_symbol());
    Bits bits(n_bits);
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
    const CVector x = map_bits(c, bits);
    const CVector y = transmit(rng, ch.h_true, x, cfg.noiseless ? 0.0 : n0, cfg.noiseless ? 0.0 : cfg.impairments.evm_fraction);

    for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
        const DetectorEntry& det = cfg.detectors[d];
        TrialRecord& rec = out[d];
        const auto start = std::chrono::steady_clock::now();
        std::vector<double> llrs;
        switch (det.kind) {
            case DetectorKind::Mmse:
            case DetectorKind::Spic:
                llrs = spic::run(y, ch.h_est, n0, c, det.kind == DetectorKind::Mmse ? 1 : det.config.n_iter,
                                 det.config.prior_clip)
                           .llrs;
                break;
            case DetectorKind::Mlm:
            case DetectorKind::Map:
                llrs = det.config.ce_aware
                           ? ce_aware_oracle(y, ch.h_est, n0, det.config.sigma_ce_sq, c,
                                             det.kind == DetectorKind::Mlm ? OracleMode::Mlm : OracleMode::Map)
                           : (det.kind == DetectorKind::Mlm ? mlm_llrs(y, ch.h_est, n0, c)
                                                            : map_llrs(y, ch.h_est, n0, c));
                rec.candidates = static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(c.size()),
                                                                                    cfg.antennas.n_layers)));
                break;
            case DetectorKind::Rcsmld: {
                DetectorConfig dc = det.config;
                dc.alpha = dc.alpha_at(snr);
                Rng drng(derive_seed(trial_seed, d, 1));
                const DetectionResult r = detect(y, ch.h_est, n0, c, dc, drng);
                llrs = r.llrs;
                rec.candidates = r.candidates_evaluated;
                rec.mults = r.ops.mults_symbol_rate;
                rec.adds = r.ops.adds;
                break;
            }
        }
        if (cfg.timing)
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        rec.bits = static_cast<std::uint32_t>(n_bits);
        for (std::size_t i = 0; i < n_bits; ++i)
            if (static_cast<std::uint8_t>(llrs[i] > 0.0) != bits[i]) ++rec.bit_errors;
        rec.vec_errors = rec.bit_errors > 0 ? 1 : 0;
    }
}

}  // namespace

TrialTable run_trials(const SimConfig& cfg) {
    cfg.validate();
    const Constellation c = Constellation::build(cfg.bits_per_symbol);
    TrialTable t;
    t.snrs = cfg.snr_db.size();
    t.trials = cfg.trials;
    t.detectors = cfg.detectors.size();
    t.records.resize(t.snrs * t.trials * t.detectors);
    const TrialContext ctx{cfg, c};
    const std::size_t total = t.snrs * t.trials;

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        try {
            for (std::size_t job = next++; job < total && !failed; job = next++)
                run_one(ctx, job / t.trials, job % t.trials, t.records.data() + job * t.detectors);
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(cfg.workers, total));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return t;
}

std::vector<ResultRow> aggregate(const SimConfig& cfg, const TrialTable& table) {
    std::vector<ResultRow> rows;
    for (std::size_t s = 0; s < table.snrs; ++s) {
        for (std::size_t d = 0; d < table.detectors; ++d) {
            ResultRow row;
            row.snr_db = cfg.snr_db[s];
            row.detector = cfg.detectors[d].name;
            row.trials = table.trials;
            for (std::size_t t = 0; t < table.trials; ++t) {
                const TrialRecord& r = table.at(s, t, d);
                row.bits += r.bits;
                row.bit_errors += r.bit_errors;
                row.vec_errors += r.vec_errors;
                row.candidates += r.candidates;
                row.mults += r.mults;
                row.adds += r.adds;
                row.wall_ms += r.wall_ms;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<ResultRow> run(const SimConfig& cfg) { return aggregate(cfg, run_trials(cfg)); }

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double per_trial(std::uint64_t total, std::uint64_t trials) {
    return static_cast<double>(total) / static_cast<double>(trials);
}

}  // namespace

std::string format_csv(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += fmt(r.snr_db) + ',' + r.detector + ',' + std::to_string(r.trials) + ',' + std::to_string(r.bits) + ',' +
               std::to_string(r.bit_errors) + ',' + fmt(r.ber()) + ',' + std::to_string(r.vec_errors) + ',' +
               fmt(r.ver()) + ',' + fmt(per_trial(r.candidates, r.trials)) + ',' + fmt(per_trial(r.mults, r.trials)) +
               ',' + fmt(per_trial(r.adds, r.trials)) + ',' + fmt(r.wall_ms) + '\n';
    }
    return out;
}

std::string format_json(const std::vector<ResultRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"snr_db", r.snr_db},
                       {"detector", r.detector},
                       {"trials", r.trials},
                       {"bits", r.bits},
                       {"bit_errors", r.bit_errors},
                       {"ber", r.ber()},
                       {"vec_errors", r.vec_errors},
                       {"ver", r.ver()},
                       {"candidates_total", r.candidates},
                       {"real_mults_total", r.mults},
                       {"real_adds_total", r.adds},
                       {"wall_ms", r.wall_ms}});
    }
    return arr.dump(2) + "\n";
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace

void write_results(const std::string& path, const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("write_results: no rows");
    write_text(path, format_csv(rows));
}

void write_json(const std::string& path, const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("write_json: no rows");
    write_text(path, format_json(rows));
}

}  // namespace rcsmld
