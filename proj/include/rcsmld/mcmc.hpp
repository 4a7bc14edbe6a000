#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rcsmld/candidates.hpp"
#include "rcsmld/channel.hpp"
#include "rcsmld/metric_engine.hpp"

namespace rcsmld {

struct GibbsConfig {
    std::size_t n_samplers = 4;
    int n_sweeps = 3;
    double temperature = 1.0;
    std::size_t pool_cap = 64;

    void validate() const;
};

struct RefinedCandidates {
    CandidateSet set;    ///< per layer: surviving seed symbols by original rank, then new symbols by grid index
    CandidateList list;  ///< lexicographic in the ranks of `set`
    std::size_t visited = 0;
};

/// P(u_k = s | u_{-k}) over the PAM x PAM grid of layer k (index first*L + second),
/// proportional to exp(-||y - Hx||^2 / (N0 * temperature)).
std::vector<double> conditional_distribution(const BlockModel& model, std::span<const std::array<double, 2>> state,
                                             std::size_t k, const Constellation& c, double n0, double temperature);

/// Symbol-wise Gibbs sampling seeded from the best-metric candidates.
///
/// Each sampler starts at one of the n_samplers lowest-metric seeds and sweeps
/// the detector layers in order, resampling one layer at a time from its exact
/// conditional. Every visited vector joins the pool together with all seeds;
/// the pool is deduplicated and cut to pool_cap by metric (ties broken
/// lexicographically), always keeping the best seed.
RefinedCandidates gibbs_refine(const CandidateSet& cs, const CandidateList& seeds, const BlockModel& model, double n0,
                               const Constellation& c, const GibbsConfig& cfg, Rng& rng);

}  // namespace rcsmld
