#include "rcsmld/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rcsmld {

namespace {

// Magnitude of a Gray PAM level from the axis bits after the sign bit:
// 2^{m-1} - (1 - 2c_1) * mag(c_2 ...), with a single remaining level equal to 1.
int gray_magnitude(std::size_t axis_label, int m) {
    if (m == 1) return 1;
    const int c1 = static_cast<int>((axis_label >> (m - 2)) & 1u);
    const std::size_t rest = axis_label & ((std::size_t{1} << (m - 2)) - 1);
    return (1 << (m - 1)) - (1 - 2 * c1) * gray_magnitude(rest, m - 1);
}

}  // namespace

Constellation Constellation::build(int bits_per_symbol) {
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6)
        throw std::invalid_argument("unsupported bits per symbol " + std::to_string(bits_per_symbol) +
                                    " (expected 2, 4 or 6)");
    Constellation c;
    c.q_ = bits_per_symbol;
    const int m = bits_per_symbol / 2;
    const std::size_t n_levels = std::size_t{1} << m;
    // unit average symbol energy: 2 * (4^m - 1) / 3 is the mean of |a + jb|^2 on the odd grid
    const double norm = std::sqrt(2.0 * (std::pow(4.0, m) - 1.0) / 3.0);

    c.levels_.resize(n_levels);
    for (std::size_t a = 0; a < n_levels; ++a) {
        const int sign_bit = static_cast<int>((a >> (m - 1)) & 1u);
        const std::size_t rest = a & ((std::size_t{1} << (m - 1)) - 1);
        c.levels_[a] = (1 - 2 * sign_bit) * gray_magnitude(rest, m) / norm;
    }

    c.points_.resize(std::size_t{1} << bits_per_symbol);
    for (std::size_t label = 0; label < c.points_.size(); ++label) {
        c.points_[label] = {c.levels_[c.axis_label(label, Axis::InPhase)],
                            c.levels_[c.axis_label(label, Axis::Quadrature)]};
        c.max_magnitude_ = std::max(c.max_magnitude_, std::abs(c.points_[label]));
    }
    return c;
}

std::size_t Constellation::axis_label(std::size_t label, Axis axis) const noexcept {
    const int m = bits_per_axis();
    std::size_t out = 0;
    for (int j = 0; j < m; ++j) out = (out << 1) | static_cast<std::size_t>(bit(label, axis_bit_position(axis, j)));
    return out;
}

std::size_t Constellation::compose(std::size_t in_phase_label, std::size_t quadrature_label) const noexcept {
    const int m = bits_per_axis();
    std::size_t label = 0;
    for (int j = 0; j < m; ++j) {
        const std::size_t bi = (in_phase_label >> (m - 1 - j)) & 1u;
        const std::size_t bq = (quadrature_label >> (m - 1 - j)) & 1u;
        label = (label << 2) | (bi << 1) | bq;
    }
    return label;
}

std::size_t Constellation::hard_decision(cdouble sample) const noexcept {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double d = std::norm(sample - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

CVector map_bits(const Constellation& c, std::span<const std::uint8_t> bits) {
    const auto q = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % q != 0)
        throw std::invalid_argument("map_bits: bit count " + std::to_string(bits.size()) +
                                    " is not a multiple of " + std::to_string(q));
    CVector out(bits.size() / q);
    for (std::size_t n = 0; n < out.size(); ++n) {
        std::size_t label = 0;
        for (std::size_t i = 0; i < q; ++i) label = (label << 1) | (bits[n * q + i] & 1u);
        out[n] = c.point(label);
    }
    return out;
}

Bits hard_demap(const Constellation& c, std::span<const cdouble> symbols) {
    const int q = c.bits_per_symbol();
    Bits out;
    out.reserve(symbols.size() * static_cast<std::size_t>(q));
    for (const auto& s : symbols) {
        const std::size_t label = c.hard_decision(s);
        for (int i = 0; i < q; ++i) out.push_back(static_cast<std::uint8_t>(c.bit(label, i)));
    }
    return out;
}

namespace {

struct BitProbs {
    double p0;
    double p1;
};

BitProbs bit_probs(double llr, double clip) {
    const double l = std::clamp(llr, -clip, clip);
    // both computed directly so neither side suffers cancellation
    return {1.0 / (1.0 + std::exp(l)), 1.0 / (1.0 + std::exp(-l))};
}

}  // namespace

SoftSymbolStats soft_stats(const Constellation& c, std::span<const double> llrs, double clip) {
    const int q = c.bits_per_symbol();
    if (llrs.size() != static_cast<std::size_t>(q))
        throw std::invalid_argument("soft_stats: expected one LLR per bit of the symbol");
    std::vector<BitProbs> probs(q);
    for (int i = 0; i < q; ++i) probs[i] = bit_probs(llrs[i], clip);

    std::vector<double> p(c.size());
    cdouble mean{};
    for (std::size_t label = 0; label < c.size(); ++label) {
        double pr = 1.0;
        for (int i = 0; i < q; ++i) pr *= c.bit(label, i) ? probs[i].p1 : probs[i].p0;
        p[label] = pr;
        mean += pr * c.point(label);
    }
    double var = 0.0;
    for (std::size_t label = 0; label < c.size(); ++label) var += p[label] * std::norm(c.point(label) - mean);
    return {mean, var};
}

AxisSoftStats axis_soft_stats(const Constellation& c, std::span<const double> llrs, Axis axis, double clip) {
    const int q = c.bits_per_symbol();
    if (llrs.size() != static_cast<std::size_t>(q))
        throw std::invalid_argument("axis_soft_stats: expected one LLR per bit of the symbol");
    const int m = c.bits_per_axis();
    std::vector<BitProbs> probs(m);
    for (int j = 0; j < m; ++j) probs[j] = bit_probs(llrs[c.axis_bit_position(axis, j)], clip);

    std::vector<double> p(c.levels_per_axis());
    double mean = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        double pr = 1.0;
        for (int j = 0; j < m; ++j) pr *= ((a >> (m - 1 - j)) & 1u) ? probs[j].p1 : probs[j].p0;
        p[a] = pr;
        mean += pr * c.pam_level(a);
    }
    double var = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double d = c.pam_level(a) - mean;
        var += p[a] * d * d;
    }
    return {mean, var};
}

std::vector<double> scalar_llrs(const Constellation& c, cdouble x_hat, double gain, double noise_var) {
    if (!(noise_var > 0.0))
        throw std::domain_error("scalar_llrs: post-filter noise variance must be positive");
    const int q = c.bits_per_symbol();
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> best1(q, ninf), best0(q, ninf);
    for (std::size_t label = 0; label < c.size(); ++label) {
        const double v = -std::norm(x_hat - gain * c.point(label)) / noise_var;
        for (int i = 0; i < q; ++i) {
            double& slot = c.bit(label, i) ? best1[i] : best0[i];
            slot = std::max(slot, v);
        }
    }
    std::vector<double> out(q);
    for (int i = 0; i < q; ++i) out[i] = best1[i] - best0[i];
    return out;
}

}  // namespace rcsmld
