#pragma once

#include <span>
#include <vector>

#include "rcsmld/constellation.hpp"
#include "rcsmld/numerics.hpp"

namespace rcsmld::spic {

inline constexpr double kVarianceFloor = 1e-12;

/// Gaussian-approximated output of one layer: x_hat = gain * x + noise.
struct PostStats {
    double gain = 0.0;       ///< beta_n
    double noise_var = 0.0;  ///< post-filter noise-plus-interference variance
    double sinr = 0.0;       ///< gain^2 / noise_var
};

struct LayerOutput {
    cdouble estimate;
    PostStats stats;
};

struct SpicState {
    std::vector<LayerOutput> layers;
    std::vector<double> llrs;        ///< Q*N_L demodulator LLRs of the last iteration
    std::vector<double> prior_llrs;  ///< LLRs that fed the last iteration (zeros when n_iter == 1)
    int iterations = 0;

    std::vector<double> sinrs() const;
};

/// x_hat = H^H (H H^H + N0 I)^{-1} y.
CVector mmse_oneshot(const CMatrix& h, std::span<const cdouble> y, double n0);

/// y - sum_{m != n} h_m * means[m].
CVector pic(const CMatrix& h, std::span<const cdouble> y, std::span<const cdouble> means, std::size_t n);

/// Shared SPIC filter (H^H H R_xx + N0 I)^{-1} H^H, returned as an N_L x N_R
/// matrix whose row n is g_n^H. Evaluated through the equivalent Hermitian form
/// H^H (H R_xx H^H + N0 I)^{-1} so that only a positive definite solve is needed.
CMatrix spic_filter(const CMatrix& h, std::span<const double> variances, double n0);

/// Effective gain and post-filter variance of layer n from its filter row and
/// channel column. Never throws: the gain is floored at kVarianceFloor and
/// capped at 1/variance (its analytic maximum), the noise variance floored
/// at kVarianceFloor.
PostStats post_stats(std::span<const cdouble> filter_row, std::span<const cdouble> channel_column,
                     double variance);

/// n_iter rounds of soft-statistics, PIC, filtering, Gaussian approximation and
/// scalar max-log demodulation. The first round starts from zero LLRs.
SpicState run(std::span<const cdouble> y, const CMatrix& h, double n0, const Constellation& c, int n_iter,
              double prior_clip = kDefaultPriorClip);

}  // namespace rcsmld::spic
