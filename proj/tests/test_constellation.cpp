#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "rcsmld/constellation.hpp"
#include "test_util.hpp"

using namespace rcsmld;

namespace {

// TS 36.211 Tables 7.1.2-1, 7.1.3-1, 7.1.4-1 as closed forms over the label bits
cdouble lte_point(int q, std::size_t label) {
    auto b = [&](int i) { return static_cast<int>((label >> (q - 1 - i)) & 1u); };
    auto sgn = [](int bit) { return 1.0 - 2.0 * bit; };
    if (q == 2) return cdouble(sgn(b(0)), sgn(b(1))) / std::sqrt(2.0);
    if (q == 4) {
        const double i = sgn(b(0)) * (2.0 - sgn(b(2)));
        const double qq = sgn(b(1)) * (2.0 - sgn(b(3)));
        return cdouble(i, qq) / std::sqrt(10.0);
    }
    const double i = sgn(b(0)) * (4.0 - sgn(b(2)) * (2.0 - sgn(b(4))));
    const double qq = sgn(b(1)) * (4.0 - sgn(b(3)) * (2.0 - sgn(b(5))));
    return cdouble(i, qq) / std::sqrt(42.0);
}

double prob_bit(double llr, int bit) {
    const double p1 = 1.0 / (1.0 + std::exp(-llr));
    return bit ? p1 : 1.0 - p1;
}

std::vector<double> brute_llrs(const Constellation& c, cdouble xh, double g, double nv) {
    const int q = c.bits_per_symbol();
    std::vector<double> out(q);
    for (int i = 0; i < q; ++i) {
        double m0 = -std::numeric_limits<double>::infinity(), m1 = m0;
        for (std::size_t s = 0; s < c.size(); ++s) {
            const double v = -std::norm(xh - g * c.point(s)) / nv;
            (c.bit(s, i) ? m1 : m0) = std::max(c.bit(s, i) ? m1 : m0, v);
        }
        out[i] = m1 - m0;
    }
    return out;
}

}  // namespace

TEST_CASE("alphabets follow the LTE tables") {
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        REQUIRE(c.size() == (std::size_t{1} << q));
        double e = 0.0;
        std::set<std::pair<double, double>> distinct;
        for (std::size_t s = 0; s < c.size(); ++s) {
            CHECK(std::abs(c.point(s) - lte_point(q, s)) <= 1e-15);
            e += c.energy(s);
            distinct.insert({c.point(s).real(), c.point(s).imag()});
        }
        CHECK(e / static_cast<double>(c.size()) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(distinct.size() == c.size());
    }
    const Constellation qpsk = Constellation::build(2);
    CHECK(std::abs(qpsk.point(0) - cdouble(1, 1) / std::sqrt(2.0)) < 1e-15);
    CHECK_THROWS_AS(Constellation::build(3), std::invalid_argument);
}

TEST_CASE("64-QAM minimum distance") {
    const Constellation c = Constellation::build(6);
    double dmin = 1e9;
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b) dmin = std::min(dmin, std::abs(c.point(a) - c.point(b)));
    CHECK(dmin == doctest::Approx(2.0 / std::sqrt(42.0)).epsilon(1e-12));
}

TEST_CASE("gray labeling: neighbours differ in one bit") {
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        const double d = 2.0 * c.pam_levels().back() / static_cast<double>(c.levels_per_axis() - 1);
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b)
                if (std::abs(std::abs(c.point(a) - c.point(b)) - d) < 1e-9) CHECK(std::popcount(a ^ b) == 1);
    }
}

TEST_CASE("map_bits and hard_demap") {
    const Constellation qpsk = Constellation::build(2);
    const Bits bits{0, 0, 1, 1};
    const CVector x = map_bits(qpsk, bits);
    REQUIRE(x.size() == 2);
    CHECK(std::abs(x[0] - cdouble(1, 1) / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(x[1] - cdouble(-1, -1) / std::sqrt(2.0)) < 1e-15);
    CHECK(map_bits(qpsk, Bits{}).empty());
    CHECK_THROWS_AS(map_bits(qpsk, Bits{1, 0, 1}), std::invalid_argument);

    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        for (std::size_t s = 0; s < c.size(); ++s) {
            Bits b(static_cast<std::size_t>(q));
            for (int i = 0; i < q; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(c.bit(s, i));
            CHECK(hard_demap(c, map_bits(c, b)) == b);
            CHECK(c.hard_decision(c.point(s)) == s);
        }
    }
}

TEST_CASE("axis decomposition recomposes every point") {
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        for (std::size_t s = 0; s < c.size(); ++s) {
            const std::size_t i = c.axis_label(s, Axis::InPhase), qq = c.axis_label(s, Axis::Quadrature);
            CHECK(c.compose(i, qq) == s);
            CHECK(c.pam_level(i) == doctest::Approx(c.point(s).real()));
            CHECK(c.pam_level(qq) == doctest::Approx(c.point(s).imag()));
        }
    }
}

TEST_CASE("soft statistics") {
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        const std::vector<double> zeros(static_cast<std::size_t>(q), 0.0);
        const SoftSymbolStats s = soft_stats(c, zeros);
        CHECK(std::abs(s.mean) < 1e-15);
        CHECK(s.variance == doctest::Approx(1.0).epsilon(1e-12));

        for (std::size_t label = 0; label < c.size(); ++label) {
            std::vector<double> sure(static_cast<std::size_t>(q));
            for (int i = 0; i < q; ++i) sure[static_cast<std::size_t>(i)] = c.bit(label, i) ? 1e6 : -1e6;
            const SoftSymbolStats t = soft_stats(c, sure);
            CHECK(std::abs(t.mean - c.point(label)) < 1e-6);
            CHECK(t.variance < 1e-6);
        }
    }

    const Constellation qpsk = Constellation::build(2);
    for (double l : {-7.0, -1.0, 0.3, 4.0}) {
        const std::vector<double> llrs{l, 0.0};
        cdouble mean = 0.0;
        double second = 0.0;
        for (std::size_t s = 0; s < 4; ++s) {
            const double p = prob_bit(l, qpsk.bit(s, 0)) * prob_bit(0.0, qpsk.bit(s, 1));
            mean += p * qpsk.point(s);
            second += p * qpsk.energy(s);
        }
        const SoftSymbolStats st = soft_stats(qpsk, llrs);
        CHECK(std::abs(st.mean - mean) < 1e-14);
        // b0 = 1 maps to a negative real part
        CHECK(st.mean.real() == doctest::Approx(-std::tanh(l / 2) / std::sqrt(2.0)));
        CHECK(st.variance == doctest::Approx(second - std::norm(mean)));
    }
}

TEST_CASE("soft statistics bounds over random priors") {
    Rng rng(21);
    std::normal_distribution<double> n(0.0, 6.0);
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        for (int t = 0; t < 2000; ++t) {
            std::vector<double> llrs(static_cast<std::size_t>(q));
            for (auto& l : llrs) l = n(rng);
            const SoftSymbolStats s = soft_stats(c, llrs);
            CHECK(s.variance >= 0.0);
            // the unit bound only holds for constant-modulus alphabets
            CHECK(s.variance <= (q == 2 ? 1.0 : c.max_magnitude() * c.max_magnitude()) + 1e-9);
            CHECK(std::abs(s.mean) <= c.max_magnitude() + 1e-12);
            const AxisSoftStats ai = axis_soft_stats(c, llrs, Axis::InPhase);
            const AxisSoftStats aq = axis_soft_stats(c, llrs, Axis::Quadrature);
            CHECK(ai.mean == doctest::Approx(s.mean.real()).epsilon(1e-12));
            CHECK(aq.mean == doctest::Approx(s.mean.imag()).epsilon(1e-12));
            CHECK(ai.variance + aq.variance == doctest::Approx(s.variance).epsilon(1e-9));
        }
    }
}

TEST_CASE("scalar LLRs") {
    const Constellation qpsk = Constellation::build(2);
    for (double l : scalar_llrs(qpsk, 0.0, 1.0, 0.5)) CHECK(l == 0.0);
    CHECK_THROWS_AS(scalar_llrs(qpsk, 0.0, 1.0, 0.0), std::domain_error);

    Rng rng(22);
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        for (std::size_t s = 0; s < c.size(); ++s) {
            const auto l = scalar_llrs(c, 0.7 * c.point(s), 0.7, 1e-4);
            for (int i = 0; i < q; ++i) CHECK((l[static_cast<std::size_t>(i)] > 0) == (c.bit(s, i) == 1));
        }
        for (int t = 0; t < 500; ++t) {
            const cdouble xh = complex_gaussian(rng, 1.0);
            const double g = 0.2 + std::abs(complex_gaussian(rng, 1.0));
            const double nv = 0.05 + std::abs(complex_gaussian(rng, 0.3));
            const auto got = scalar_llrs(c, xh, g, nv);
            const auto ref = brute_llrs(c, xh, g, nv);
            for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        }
    }
    for (int t = 0; t < 200; ++t) {
        const cdouble xh = complex_gaussian(rng, 1.0);
        const auto a = scalar_llrs(qpsk, xh, 0.8, 0.3);
        const auto b = scalar_llrs(qpsk, -xh, 0.8, 0.3);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(-b[i]));
    }
}
