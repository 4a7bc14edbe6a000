#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcsmld/channel.hpp"
#include "rcsmld/detector.hpp"

namespace rcsmld {

enum class DetectorKind { Mmse, Spic, Mlm, Map, Rcsmld };

DetectorKind parse_detector_kind(const std::string& s);
std::string to_string(DetectorKind k);

struct DetectorEntry {
    std::string name;
    DetectorKind kind = DetectorKind::Rcsmld;
    DetectorConfig config;
};

struct SimConfig {
    AntennaSetup antennas;
    int bits_per_symbol = 4;
    std::vector<double> snr_db{18.0};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::vector<DetectorEntry> detectors;
    ImpairmentConfig impairments;
    std::string out_path;
    std::string json_path;
    unsigned workers = 1;
    bool timing = true;      ///< wall_ms is 0 when off, making the CSV fully reproducible
    bool noiseless = false;  ///< transmit without thermal noise; detectors still see the nominal N0

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// N0 = N_L 10^{-SNR/10}: Es/N0 per receive antenna with unit-energy symbols.
double noise_density(double snr_db, int n_layers);

/// Table-I-style scenarios: test1 (16QAM, low correlation), test2 (64QAM, low
/// correlation), test3 (QPSK, high correlation), test4 (16QAM, alpha = beta =
/// 0.1, Gibbs refinement).
SimConfig preset(const std::string& name);

/// Parses a JSON configuration; unspecified fields keep their defaults.
SimConfig load_config(const std::string& text);
SimConfig load_config_file(const std::string& path);

DetectorEntry default_detector(DetectorKind kind);

struct TrialRecord {
    std::uint32_t bits = 0;
    std::uint32_t bit_errors = 0;
    std::uint32_t vec_errors = 0;
    std::uint64_t candidates = 0;
    std::uint64_t mults = 0;
    std::uint64_t adds = 0;
    double wall_ms = 0.0;
};

/// records[(snr * trials + trial) * detectors + d]
struct TrialTable {
    std::size_t snrs = 0, trials = 0, detectors = 0;
    std::vector<TrialRecord> records;

    const TrialRecord& at(std::size_t snr, std::size_t trial, std::size_t det) const {
        return records[(snr * trials + trial) * detectors + det];
    }
};

/// Every (SNR, trial) is generated from derive_seed(seed, snr index, trial
/// index) and passed to each detector of the roster; results do not depend on
/// the worker count.
TrialTable run_trials(const SimConfig& cfg);

struct ResultRow {
    double snr_db = 0.0;
    std::string detector;
    std::uint64_t trials = 0;
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t vec_errors = 0;
    std::uint64_t candidates = 0;
    std::uint64_t mults = 0;
    std::uint64_t adds = 0;
    double wall_ms = 0.0;

    double ber() const { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }
    double ver() const { return trials ? static_cast<double>(vec_errors) / static_cast<double>(trials) : 0.0; }
};

std::vector<ResultRow> aggregate(const SimConfig& cfg, const TrialTable& table);
std::vector<ResultRow> run(const SimConfig& cfg);

inline constexpr const char* kCsvHeader =
    "snr_db,detector,trials,bits,bit_errors,ber,vec_errors,ver,avg_candidates,real_mults,real_adds,wall_ms";

/// CSV text; candidates and operation counts are per-trial averages, wall_ms
/// the total for the row.
std::string format_csv(const std::vector<ResultRow>& rows);
std::string format_json(const std::vector<ResultRow>& rows);

/// Throws std::invalid_argument on empty rows (nothing written), std::runtime_error on I/O failure.
void write_results(const std::string& path, const std::vector<ResultRow>& rows);
void write_json(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace rcsmld
