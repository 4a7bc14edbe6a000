#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcsmld/numerics.hpp"

namespace rcsmld {

using Bits = std::vector<std::uint8_t>;

/// Real or imaginary axis of a QAM symbol.
enum class Axis : std::uint8_t { InPhase = 0, Quadrature = 1 };

/// Gray-labeled square QAM with the LTE bit-to-symbol convention.
///
/// A symbol is addressed by its label: the Q-bit word b_0 b_1 ... b_{Q-1}
/// read with b_0 as the most significant bit, so `point(label)` matches the
/// row order of the LTE modulation tables. The labeling factorizes per axis:
/// even-position bits select the in-phase PAM level and odd-position bits the
/// quadrature level. Both PAM alphabets share one level table indexed by the
/// axis sub-label (the axis bits in order, first bit most significant).
class Constellation {
public:
    /// Q must be 2 (QPSK), 4 (16-QAM) or 6 (64-QAM).
    static Constellation build(int bits_per_symbol);

    int bits_per_symbol() const noexcept { return q_; }
    int bits_per_axis() const noexcept { return q_ / 2; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t levels_per_axis() const noexcept { return levels_.size(); }

    std::span<const cdouble> points() const noexcept { return points_; }
    cdouble point(std::size_t label) const { return points_.at(label); }
    double energy(std::size_t label) const { return std::norm(points_.at(label)); }
    double max_magnitude() const noexcept { return max_magnitude_; }

    /// Bit b_i of a label, i in [0, Q).
    int bit(std::size_t label, int i) const noexcept {
        return static_cast<int>((label >> (q_ - 1 - i)) & 1u);
    }

    std::span<const double> pam_levels() const noexcept { return levels_; }
    double pam_level(std::size_t axis_label) const { return levels_.at(axis_label); }
    std::size_t axis_label(std::size_t label, Axis axis) const noexcept;
    std::size_t compose(std::size_t in_phase_label, std::size_t quadrature_label) const noexcept;
    /// Bit position (within the symbol) of the j-th bit on an axis.
    int axis_bit_position(Axis axis, int j) const noexcept { return 2 * j + static_cast<int>(axis); }

    /// Nearest point, ties to the lower label.
    std::size_t hard_decision(cdouble sample) const noexcept;

private:
    int q_ = 0;
    std::vector<cdouble> points_;
    std::vector<double> levels_;
    double max_magnitude_ = 0.0;
};

/// Per-symbol mean and variance under independent bit priors.
struct SoftSymbolStats {
    cdouble mean;
    double variance = 1.0;
};

/// Mean and variance of one PAM axis of a symbol.
struct AxisSoftStats {
    double mean = 0.0;
    double variance = 0.5;
};

inline constexpr double kDefaultPriorClip = 50.0;

/// Maps Q*N_L bits onto N_L symbols; layer n takes bits [nQ, (n+1)Q).
CVector map_bits(const Constellation& c, std::span<const std::uint8_t> bits);

/// Bits of the nearest point of every sample.
Bits hard_demap(const Constellation& c, std::span<const cdouble> symbols);

/// Symbol statistics from Q bit LLRs (positive favors bit 1). LLRs are clipped
/// to +/-clip before exponentiation.
SoftSymbolStats soft_stats(const Constellation& c, std::span<const double> llrs,
                           double clip = kDefaultPriorClip);

AxisSoftStats axis_soft_stats(const Constellation& c, std::span<const double> llrs, Axis axis,
                              double clip = kDefaultPriorClip);

/// Max-log LLRs of one symbol observed as x_hat = gain * s + n, E|n|^2 = noise_var.
/// Throws std::domain_error when noise_var is not positive.
std::vector<double> scalar_llrs(const Constellation& c, cdouble x_hat, double gain, double noise_var);

}  // namespace rcsmld
