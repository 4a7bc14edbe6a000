#pragma once

// Multiplication-free candidate metric evaluation.
//
// With G = H^H H and z = H^H y the Euclidean metric splits as
//
//   ||y - Hx||^2 = ||y||^2 + 2 mu(x),
//   mu(x) = sum_k gamma_k(x_k) + sum_{k>m} delta_km(x_k, x_m),
//   gamma_k(u) = -Re{u^* z_k} + |u|^2 G[k,k]/2,   delta_km(u, v) = Re{u^* G[k,m] v}.
//
// gamma and delta are tabulated over the candidate alphabets once, after which
// every candidate metric is a sum of table entries accumulated down a tree
// whose depth is the detector layer. Each detector layer is handled as a
// 2-dimensional real block so the same engine serves the complex pipeline and
// the real-paired one.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rcsmld/candidates.hpp"
#include "rcsmld/constellation.hpp"
#include "rcsmld/numerics.hpp"

namespace rcsmld {

enum class AccountingMode {
    PerRe,                    ///< delta tables rebuilt and charged for every resource element
    ChannelRateDeltaExcluded  ///< delta products charged to the channel-rate counters
};

struct OpCounters {
    std::uint64_t mults_symbol_rate = 0;
    std::uint64_t mults_channel_rate = 0;
    std::uint64_t adds = 0;
    std::uint64_t adds_channel_rate = 0;
    AccountingMode mode = AccountingMode::PerRe;

    OpCounters& operator+=(const OpCounters& o) noexcept {
        mults_symbol_rate += o.mults_symbol_rate;
        mults_channel_rate += o.mults_channel_rate;
        adds += o.adds;
        adds_channel_rate += o.adds_channel_rate;
        return *this;
    }
    void reset() noexcept { *this = OpCounters{.mode = mode}; }
};

/// Real 2x2-block form of (G, z) in detector-layer order.
struct BlockModel {
    std::size_t layers = 0;
    std::vector<std::array<double, 2>> z;
    std::vector<std::array<double, 4>> g;  ///< block (k, m) at k*layers + m, row-major
    /// Diagonal blocks are multiples of the identity (complex layers), so
    /// u^T G_kk u / 2 costs a single multiplication given |u|^2.
    bool isotropic = false;

    const std::array<double, 4>& block(std::size_t k, std::size_t m) const { return g[k * layers + m]; }
};

/// Block model over a real Gram matrix and matched-filter vector indexed like
/// RealPairedModel components.
BlockModel make_block_model(const RMatrix& g, std::span<const double> z, const CandidateSet& cs);
/// Block model of complex (G, z), permuted to the detector layers of cs.
BlockModel make_block_model(const CMatrix& g, std::span<const cdouble> z, const CandidateSet& cs);

/// mu(u) evaluated directly from the blocks, u holding one 2-vector per detector layer.
double block_metric(const BlockModel& model, std::span<const std::array<double, 2>> u);

struct MetricTables {
    std::vector<int> sizes;
    std::vector<std::vector<double>> gamma;  ///< [layer][rank]
    std::vector<std::vector<double>> delta;  ///< [k(k-1)/2 + m][rank_k * M_m + rank_m], k > m

    const std::vector<double>& delta_table(std::size_t k, std::size_t m) const { return delta[k * (k - 1) / 2 + m]; }
    std::size_t gamma_entries() const;
    std::size_t delta_entries() const;
};

/// Tabulates gamma and delta over the candidate sets. Symbol-rate charges:
/// 3 multiplications and 2 additions per gamma entry of a complex layer (|u|^2
/// and G[k,k]/2 pretabulated; a general real pair costs 5 and 4), and
/// 2 multiplications and 1 addition per delta entry (against G[k,m] v rotated
/// at channel rate).
MetricTables precompute_tables(const BlockModel& model, const CandidateSet& cs, const Constellation& c,
                               OpCounters& counters);
MetricTables precompute_tables(const CMatrix& g, std::span<const cdouble> z, const CandidateSet& cs,
                               const Constellation& c, OpCounters& counters);

/// mu(x) for every candidate using table lookups and additions only. Prefix
/// metrics are shared between consecutive candidates and partial delta sums
/// are cached per (layer value, prefix).
std::vector<double> evaluate_all(const MetricTables& tables, const CandidateList& cl, OpCounters& counters);

struct OpCounts {
    std::uint64_t mults = 0;
    std::uint64_t adds = 0;
};

/// Closed-form operation counts for the full (unreduced) candidate tree:
///   mults = 3 sum M_k + 2 sum_{k>=2} M_k sum_{l<k} M_l
///   adds  = 2 sum M_k + sum_{k>=2} M_k sum_{l<k} M_l
///         + sum_{l>=3} M_l sum_{k=1}^{l-2} prod_{n<=k} M_n + 2 sum_{k>=2} prod_{l<=k} M_l
OpCounts predict_counts(std::span<const int> m_vector);

/// Score of a candidate when the channel estimate carries error of variance
/// sigma_ce_sq per entry: n_r log(N0 + e sigma^2) + mu / (N0 + e sigma^2), with
/// mu = ||y - Hx||^2 and e = ||x||^2.
double ce_aware_transform(double mu, double energy, double n0, double sigma_ce_sq, std::size_t n_r);

}  // namespace rcsmld
