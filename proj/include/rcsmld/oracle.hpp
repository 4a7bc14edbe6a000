#pragma once

// Exhaustive soft-output detectors over the full alphabet S^{N_L}.

#include <span>
#include <stdexcept>
#include <vector>

#include "rcsmld/constellation.hpp"
#include "rcsmld/numerics.hpp"

namespace rcsmld {

inline constexpr double kMaxHypotheses = 1e6;

class SearchSpaceExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

enum class OracleMode { Map, Mlm };

/// max_{b_i=1} -||y-Hx||^2/N0 - max_{b_i=0} -||y-Hx||^2/N0, bit i of the
/// Q*N_L vector (layer n owns bits [nQ, (n+1)Q)).
std::vector<double> mlm_llrs(std::span<const cdouble> y, const CMatrix& h, double n0, const Constellation& c);

/// log sum_{b_i=1} exp(-||y-Hx||^2/N0) - log sum_{b_i=0} exp(-||y-Hx||^2/N0).
std::vector<double> map_llrs(std::span<const cdouble> y, const CMatrix& h, double n0, const Constellation& c);

/// Either oracle with the per-candidate score
/// N_R log(N0 + ||x||^2 s) + ||y-Hx||^2 / (N0 + ||x||^2 s), s = sigma_ce_sq.
std::vector<double> ce_aware_oracle(std::span<const cdouble> y, const CMatrix& h, double n0, double sigma_ce_sq,
                                    const Constellation& c, OracleMode mode);

}  // namespace rcsmld
