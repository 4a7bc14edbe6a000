#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rcsmld/candidates.hpp"
#include "rcsmld/channel.hpp"
#include "rcsmld/constellation.hpp"
#include "rcsmld/mcmc.hpp"
#include "rcsmld/metric_engine.hpp"
#include "rcsmld/numerics.hpp"

namespace rcsmld {

inline constexpr double kDefaultLlrClip = 1000.0;

struct DetectorConfig {
    std::vector<int> m_vector{5, 5, 3, 3};
    int n_iter = 2;
    double alpha = 0.5;
    bool reduction = true;
    std::optional<PairingMode> pairing;  ///< real-paired formulation when set
    bool ce_aware = false;
    double sigma_ce_sq = 0.0;
    bool mcmc = false;
    GibbsConfig gibbs;
    bool gibbs_match_budget = true;  ///< pool_cap := number of reduced candidates
    double llr_clip = kDefaultLlrClip;
    double prior_clip = kDefaultPriorClip;
    AccountingMode accounting = AccountingMode::PerRe;
    std::function<double(double)> alpha_schedule;  ///< optional alpha per SNR in dB

    double alpha_at(double snr_db) const { return alpha_schedule ? alpha_schedule(snr_db) : alpha; }
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct CandidateLlrs {
    std::vector<double> llrs;
    std::vector<std::uint8_t> missing;
};

struct DetectionResult {
    std::vector<double> llrs;
    std::vector<std::uint8_t> missing;
    std::size_t candidates_evaluated = 0;
    OpCounters ops;
    std::vector<double> spic_llrs;
    std::vector<double> rcsmld_llrs;
};

/// Two-max LLRs over candidate scores (negative log-likelihoods):
/// L_i = min_{b_i=0} score - min_{b_i=1} score. A bit on which every candidate
/// agrees is flagged missing and set to +-llr_clip with the sign of that value.
CandidateLlrs score_llrs(std::span<const double> scores, std::span<const std::uint32_t> bitwords, std::size_t n_bits,
                         double llr_clip = kDefaultLlrClip);

/// score_llrs with score = 2 mu / N0.
CandidateLlrs candidate_llrs(std::span<const double> metrics, std::span<const std::uint32_t> bitwords,
                             std::size_t n_bits, double n0, double llr_clip = kDefaultLlrClip);

/// alpha * l_rcsmld + (1 - alpha) * l_spic, with alpha = 0 on missing bits,
/// clipped to +-llr_clip.
std::vector<double> combine(std::span<const double> l_rcsmld, std::span<const double> l_spic, double alpha,
                            std::span<const std::uint8_t> missing, double llr_clip = kDefaultLlrClip);

/// Full soft-output detection of one channel use. rng is drawn from only when
/// MCMC refinement is enabled.
DetectionResult detect(std::span<const cdouble> y, const CMatrix& h_est, double n0, const Constellation& c,
                       const DetectorConfig& cfg, Rng& rng);

}  // namespace rcsmld
