#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rcsmld/mmse_spic.hpp"
#include "test_util.hpp"

using namespace rcsmld;

namespace {

CVector random_symbols(Rng& rng, const Constellation& c, std::size_t n) {
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    CVector x(n);
    for (auto& v : x) v = c.point(pick(rng));
    return x;
}

}  // namespace

TEST_CASE("one-shot MMSE") {
    Rng rng(31);
    const CVector y = testing::random_vector(rng, 3);
    const CVector half = spic::mmse_oneshot(CMatrix::identity(3), y, 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(half[i] - y[i] / 2.0) < 1e-15);
    const CVector near = spic::mmse_oneshot(CMatrix::identity(3), y, 1e-12);
    CHECK(testing::max_abs_diff_vec(near, y) < 1e-10);
    CHECK_THROWS_AS(spic::mmse_oneshot(CMatrix::identity(3), y, 0.0), std::invalid_argument);

    for (int t = 0; t < 200; ++t) {
        const CMatrix h = testing::random_matrix(rng, 4, 4);
        const CVector yy = testing::random_vector(rng, 4);
        const double n0 = 0.05 + std::abs(complex_gaussian(rng, 1.0));
        CMatrix a = h * h.adjoint();
        for (std::size_t i = 0; i < 4; ++i) a(i, i) += n0;
        const CVector ref = h.adjoint() * (testing::cofactor_inverse(a) * yy);
        CHECK(testing::max_abs_diff_vec(spic::mmse_oneshot(h, yy, n0), ref) < 1e-9);
    }
}

TEST_CASE("parallel interference cancellation") {
    Rng rng(32);
    const CMatrix h = testing::random_matrix(rng, 4, 3);
    const CVector y = testing::random_vector(rng, 4);
    const CVector zeros(3);
    for (std::size_t n = 0; n < 3; ++n) CHECK(testing::max_abs_diff_vec(spic::pic(h, y, zeros, n), y) == 0.0);

    const CVector x = testing::random_vector(rng, 3);
    const CVector clean = h * x;
    for (std::size_t n = 0; n < 3; ++n) {
        const CVector r = spic::pic(h, clean, x, n);
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r[i] - h(i, n) * x[n]) < 1e-12);
    }
    const CVector means = testing::random_vector(rng, 3);
    const CVector r = spic::pic(h, y, means, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        const cdouble ref = y[i] - h(i, 0) * means[0] - h(i, 2) * means[2];
        CHECK(std::abs(r[i] - ref) < 1e-12);
    }
}

TEST_CASE("SPIC filter limits") {
    const std::vector<double> ones(3, 1.0), zeros(3, 0.0);
    const CMatrix g = spic::spic_filter(CMatrix::identity(3), ones, 1.0);
    CHECK(testing::max_abs_diff(g, CMatrix::identity(3) * cdouble(0.5)) < 1e-15);

    Rng rng(33);
    const CMatrix h = testing::random_matrix(rng, 4, 3);
    const CMatrix mf = spic::spic_filter(h, zeros, 0.7);
    CHECK(testing::max_abs_diff(mf, h.adjoint() * cdouble(1.0 / 0.7)) < 1e-12);
}

TEST_CASE("SPIC filter with unit prior equals the one-shot MMSE filter") {
    Rng rng(34);
    const std::vector<double> ones(4, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const CMatrix h = testing::random_matrix(rng, 4, 4);
        const CVector y = testing::random_vector(rng, 4);
        const double n0 = 0.01 + std::abs(complex_gaussian(rng, 1.0));
        const CVector ref = spic::mmse_oneshot(h, y, n0);
        const CVector got = spic::spic_filter(h, ones, n0) * y;
        REQUIRE(testing::max_abs_diff_vec(got, ref) < 1e-9);
    }
}

TEST_CASE("SPIC filter against the dimension-consistent printed form") {
    // (H^H H R + N0 I)^{-1} H^H with a non-identity R and N_R != N_L
    Rng rng(35);
    for (int t = 0; t < 200; ++t) {
        const CMatrix h = testing::random_matrix(rng, 4, 3);
        std::vector<double> v(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& x : v) x = u(rng);
        const double n0 = 0.1 + u(rng);
        CMatrix a = gram(h);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) a(i, j) *= v[j];
        for (std::size_t i = 0; i < 3; ++i) a(i, i) += n0;
        const CMatrix ref = testing::cofactor_inverse(a) * h.adjoint();
        CHECK(testing::max_abs_diff(spic::spic_filter(h, v, n0), ref) < 1e-9);
    }
}

TEST_CASE("post-filter statistics") {
    const CVector one{cdouble(1.0)};
    const auto boundary = spic::post_stats(one, one, 1.0);
    CHECK(boundary.noise_var == spic::kVarianceFloor);

    const CVector half{cdouble(0.5)};
    const auto s = spic::post_stats(half, one, 1.0);
    CHECK(s.gain == doctest::Approx(0.5));
    CHECK(s.noise_var == doctest::Approx(0.25));
    CHECK(s.sinr == doctest::Approx(1.0));

    const CVector neg{cdouble(-0.3)};
    const auto floored = spic::post_stats(neg, one, 1.0);
    CHECK(floored.gain == spic::kVarianceFloor);
    CHECK(floored.noise_var > 0.0);

    Rng rng(36);
    const std::vector<double> ones(4, 1.0);
    for (int t = 0; t < 10000; ++t) {
        const CMatrix h = testing::random_matrix(rng, 4, 4);
        const double n0 = 0.01 + std::abs(complex_gaussian(rng, 1.0));
        const CMatrix g = spic::spic_filter(h, ones, n0);
        for (std::size_t n = 0; n < 4; ++n) {
            const auto st = spic::post_stats(g.row(n), h.column(n), 1.0);
            REQUIRE(st.gain > 0.0);
            REQUIRE(st.gain <= 1.0 + 1e-9);
            REQUIRE(st.noise_var > 0.0);
            REQUIRE(st.sinr >= 0.0);
        }
    }
}

TEST_CASE("one iteration reproduces the one-shot MMSE demodulator") {
    Rng rng(37);
    for (int q : {2, 4, 6}) {
        const Constellation c = Constellation::build(q);
        for (int t = 0; t < 300; ++t) {
            const CMatrix h = testing::random_matrix(rng, 4, 4);
            const double n0 = 0.05 + std::abs(complex_gaussian(rng, 0.5));
            const CVector y = h * random_symbols(rng, c, 4);
            const CVector xh = spic::mmse_oneshot(h, y, n0);
            CMatrix a = gram(h);
            for (std::size_t i = 0; i < 4; ++i) a(i, i) += n0;
            const CMatrix gh = testing::cofactor_inverse(a) * h.adjoint();
            const CMatrix b = gh * h;
            const spic::SpicState st = spic::run(y, h, n0, c, 1);
            CHECK(st.iterations == 1);
            for (std::size_t n = 0; n < 4; ++n) {
                const double beta = b(n, n).real();
                const auto ref = scalar_llrs(c, xh[n], beta, beta * (1.0 - beta));
                for (int i = 0; i < q; ++i)
                    REQUIRE(st.llrs[n * q + i] == doctest::Approx(ref[i]).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("SPIC invariants across iterations") {
    Rng rng(38);
    const Constellation c = Constellation::build(4);
    for (int t = 0; t < 500; ++t) {
        const CMatrix h = testing::random_matrix(rng, 4, 4);
        const double n0 = 0.02 + std::abs(complex_gaussian(rng, 0.3));
        const CVector y = testing::add(h * random_symbols(rng, c, 4), testing::random_vector(rng, 4, n0));
        for (int it : {1, 2, 3}) {
            const auto a = spic::run(y, h, n0, c, it);
            const auto b = spic::run(y, h, n0, c, it);
            CHECK(a.llrs == b.llrs);
            for (const auto& l : a.layers) {
                CHECK(l.stats.noise_var > 0.0);
                CHECK(l.stats.sinr >= 0.0);
                CHECK(l.stats.sinr == doctest::Approx(l.stats.gain * l.stats.gain / l.stats.noise_var));
            }
            CHECK(a.prior_llrs.size() == a.llrs.size());
        }
    }
    CHECK_THROWS_AS(spic::run(CVector(4), CMatrix::identity(4), 0.1, c, 0), std::invalid_argument);
}

TEST_CASE("noiseless orthonormal channel is decoded exactly") {
    const Constellation c = Constellation::build(4);
    Rng rng(39);
    // a unitary 4x4 DFT matrix
    CMatrix h(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) h(i, j) = std::polar(0.5, 2.0 * 3.14159265358979323846 * i * j / 4.0);
    for (int t = 0; t < 100; ++t) {
        Bits bits(16);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
        const CVector y = h * map_bits(c, bits);
        for (int it : {1, 2, 3}) {
            const auto st = spic::run(y, h, 1e-3, c, it);
            for (std::size_t i = 0; i < 16; ++i) CHECK((st.llrs[i] > 0) == (bits[i] == 1));
        }
    }
}

TEST_CASE("more iterations do not hurt on average") {
    const Constellation c = Constellation::build(4);
    Rng rng(40);
    std::size_t agree2 = 0, agree3 = 0;
    const double n0 = 4.0 * std::pow(10.0, -1.6);
    for (int t = 0; t < 10000; ++t) {
        const CMatrix h = testing::random_matrix(rng, 4, 4);
        Bits bits(16);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
        const CVector y = testing::add(h * map_bits(c, bits), testing::random_vector(rng, 4, n0));
        const auto s2 = spic::run(y, h, n0, c, 2);
        const auto s3 = spic::run(y, h, n0, c, 3);
        for (std::size_t i = 0; i < 16; ++i) {
            agree2 += (s2.llrs[i] > 0) == (bits[i] == 1);
            agree3 += (s3.llrs[i] > 0) == (bits[i] == 1);
        }
    }
    MESSAGE("sign agreement: n_iter=2 " << agree2 << ", n_iter=3 " << agree3);
    CHECK(agree3 >= agree2);
}
