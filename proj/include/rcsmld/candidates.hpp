#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcsmld/constellation.hpp"
#include "rcsmld/mmse_spic.hpp"
#include "rcsmld/numerics.hpp"

namespace rcsmld {

/// One real coordinate of the transmitted vector: Re or Im of a physical layer.
struct RealComponent {
    int layer = 0;
    Axis axis = Axis::InPhase;

    friend bool operator==(const RealComponent&, const RealComponent&) = default;
};

/// A candidate for one detector layer: PAM level indices (axis sub-labels) of
/// its two real components.
struct PairSymbol {
    std::uint8_t first = 0;
    std::uint8_t second = 0;

    friend bool operator==(const PairSymbol&, const PairSymbol&) = default;
};

/// Per-detector-layer ranked candidate alphabets.
///
/// Detector layer d jointly decides the two real components layout[d]. In the
/// complex pipeline these are (Re x_n, Im x_n) of physical layer
/// layer_order()[d], and each candidate is a QAM point. In the real-paired
/// pipeline the two components may belong to different layers.
struct CandidateSet {
    std::vector<std::array<RealComponent, 2>> layout;
    std::vector<std::vector<PairSymbol>> sets;  ///< best first

    std::size_t layers() const noexcept { return sets.size(); }
    std::vector<int> sizes() const;
    /// True when every detector layer holds (Re, Im) of a single physical layer.
    bool complex_layers() const noexcept;
    /// Physical layer of each detector layer; only meaningful for complex layers.
    std::vector<int> layer_order() const;
};

/// Candidate vectors as per-layer rank indices into a CandidateSet.
class CandidateList {
public:
    CandidateList() = default;
    explicit CandidateList(std::size_t layers) : layers_(layers) {}

    std::size_t layers() const noexcept { return layers_; }
    std::size_t size() const noexcept { return layers_ == 0 ? 0 : ranks_.size() / layers_; }
    bool empty() const noexcept { return ranks_.empty(); }
    std::span<const std::uint8_t> operator[](std::size_t i) const { return {ranks_.data() + i * layers_, layers_}; }
    void push_back(std::span<const std::uint8_t> ranks);
    std::span<const std::uint8_t> flat() const noexcept { return ranks_; }

    /// Size of the Cartesian product before reduction.
    std::size_t enumerated = 0;

private:
    std::size_t layers_ = 0;
    std::vector<std::uint8_t> ranks_;
};

/// Detector-layer ordering by ascending post-processing SINR: detector layer 0
/// (largest M) is the weakest physical layer; ties go to the lower index.
std::vector<int> order_layers(std::span<const double> sinrs, std::span<const int> m_vector);

/// C_d = the m_vector[d] points nearest to x_hat/beta of physical layer order[d]
/// (maximizing the Gaussian posterior), ties by label.
CandidateSet build_sets(const spic::SpicState& state, const Constellation& c, std::span<const int> m_vector,
                        std::span<const int> order);
/// Same, with the order taken from order_layers on the state's SINRs.
CandidateSet build_sets(const spic::SpicState& state, const Constellation& c, std::span<const int> m_vector);

/// Lexicographic enumeration of the Cartesian product; with reduction, drops
/// every vector that uses the worst-ranked member of two or more layers
/// (layers with a single candidate never count).
CandidateList enumerate_and_reduce(const CandidateSet& cs, bool reduction);

/// Survivor count of enumerate_and_reduce without enumerating.
std::size_t count_survivors(std::span<const int> m_vector, bool reduction);

/// Complex symbol vector of one candidate, in physical layer order.
CVector candidate_vector(const CandidateSet& cs, const Constellation& c, std::span<const std::uint8_t> ranks,
                         std::size_t n_layers);

/// Bit word (bit i of the Q*N_L vector in position i) of every candidate.
std::vector<std::uint32_t> candidate_bitwords(const CandidateSet& cs, const CandidateList& cl,
                                              const Constellation& c, std::size_t n_layers);

/// ||x||^2 of every candidate.
std::vector<double> candidate_energies(const CandidateSet& cs, const CandidateList& cl, const Constellation& c);

// ---------------------------------------------------------------------------
// Real-valued formulation

enum class PairingMode {
    SameLayer,   ///< (Re x_k, Im x_k)
    CrossLayer,  ///< (Re x_k, Im x_{(k+1) mod N_L})
};

/// y_r = [Re y; Im y], H_r = [[Re H, -Im H], [Im H, Re H]]. Component c < N_L is
/// Re x_c, component N_L + c is Im x_c. Pair p holds components
/// pairing[2p] and pairing[2p+1].
struct RealPairedModel {
    RMatrix h;
    std::vector<double> y;
    std::vector<int> pairing;

    std::size_t pairs() const noexcept { return pairing.size() / 2; }
    std::array<RealComponent, 2> pair_layout(std::size_t p) const;
};

RealPairedModel real_decompose(const CMatrix& h, std::span<const cdouble> y, PairingMode mode);

/// Gaussian approximation of a pair after pair-wise soft interference
/// cancellation and real MMSE filtering: estimate = gain * u + n, Cov(n) = cov.
struct PairPosterior {
    std::array<double, 2> estimate{};
    std::array<double, 4> gain{};  ///< row-major 2x2
    std::array<double, 4> cov{};   ///< row-major 2x2, positive definite
    double sinr = 0.0;

    /// (estimate - gain*u)^T cov^{-1} (estimate - gain*u).
    double distance(double u0, double u1) const noexcept;
};

/// Pair posteriors using per-component soft priors (means and variances of
/// the 2*N_L real components, indexed like RealPairedModel).
std::vector<PairPosterior> pair_posteriors(const RealPairedModel& model, std::span<const double> means,
                                           std::span<const double> variances, double n0);

struct ComponentPriors {
    std::vector<double> means;
    std::vector<double> variances;
};

/// Component priors from per-symbol LLRs (Q*N_L values).
ComponentPriors component_priors(const Constellation& c, std::span<const double> llrs, std::size_t n_layers,
                                 double clip = kDefaultPriorClip);

/// Candidate sets over the PAM x PAM grid of every pair, ranked by whitened
/// distance (ties by grid index). Pairs are ordered by ascending pair SINR.
CandidateSet build_pair_sets(const RealPairedModel& model, std::span<const PairPosterior> posteriors,
                             const Constellation& c, std::span<const int> m_vector);

}  // namespace rcsmld
