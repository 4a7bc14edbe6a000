#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "rcsmld/channel.hpp"
#include "test_util.hpp"

using namespace rcsmld;

TEST_CASE("correlation matrix closed form") {
    CHECK(testing::max_abs_diff(correlation_matrix(4, 0.0), CMatrix::identity(4)) == 0.0);
    const CMatrix ones = correlation_matrix(2, 1.0);
    for (const cdouble& v : ones.data()) CHECK(v == cdouble(1.0));
    const CMatrix r = correlation_matrix(4, 0.9);
    CHECK(r(0, 1).real() == doctest::Approx(0.98836).epsilon(1e-5));
    CHECK(r(0, 2).real() == doctest::Approx(std::pow(0.9, 4.0 / 9.0)));
    CHECK(r(0, 3).real() == doctest::Approx(0.9));
    CHECK(correlation_matrix(1, 0.5)(0, 0) == cdouble(1.0));
    CHECK_THROWS_AS(correlation_matrix(3, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(correlation_matrix(2, 1.5), std::invalid_argument);
}

TEST_CASE("correlation matrices are PSD and their square roots reproduce them") {
    for (int n : {1, 2, 4})
        for (int k = 0; k <= 10; ++k) {
            const CMatrix r = correlation_matrix(n, 0.1 * k);
            Eigen::MatrixXcd e(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) e(i, j) = r(i, j);
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
            const CMatrix s = hermitian_sqrt(r);
            CHECK(testing::max_abs_diff(s * s.adjoint(), r) <= 1e-10);
        }
}

TEST_CASE("seed derivation is a pure function of its coordinates") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("generation is reproducible and exact without estimation error") {
    const AntennaSetup setup;
    ImpairmentConfig imp;
    Rng a(5), b(5);
    const auto ca = generate_channel(a, setup, imp, 0.1);
    const auto cb = generate_channel(b, setup, imp, 0.1);
    CHECK(testing::max_abs_diff(ca.h_true, cb.h_true) == 0.0);
    CHECK(testing::max_abs_diff(ca.h_true, ca.h_est) == 0.0);
    CHECK(ca.h_true.rows() == 4);
    CHECK(ca.h_true.cols() == 4);

    const AntennaSetup two{4, 4, 2};
    const auto c2 = generate_channel(a, two, imp, 0.1);
    CHECK(c2.h_true.cols() == 2);

    imp.sigma_ce_sq = 0.25;
    Rng r(6);
    double err = 0.0;
    const int n = 20000;
    for (int t = 0; t < n; ++t) {
        const auto ch = generate_channel(r, setup, imp, 0.1);
        err += (ch.h_est - ch.h_true).frobenius_norm() * (ch.h_est - ch.h_true).frobenius_norm();
    }
    CHECK(err / (16.0 * n) == doctest::Approx(0.25).epsilon(0.02));

    ImpairmentConfig bad;
    bad.alpha_tx = 1.5;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("alpha_tx"), std::invalid_argument);
}

TEST_CASE("uncorrelated channel has identity covariance") {
    const AntennaSetup setup;
    const ImpairmentConfig imp;
    Rng rng(7);
    const int n = 100000;
    CMatrix cov(16, 16);
    for (int t = 0; t < n; ++t) {
        const auto ch = generate_channel(rng, setup, imp, 1.0);
        const auto v = ch.h_true.data();
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j) cov(i, j) += v[i] * std::conj(v[j]);
    }
    cov *= cdouble(1.0 / n);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(cov(i, i).real() == doctest::Approx(1.0).epsilon(0.02));
        for (std::size_t j = 0; j < 16; ++j)
            if (i != j) CHECK(std::abs(cov(i, j)) < 0.02);
    }
}

TEST_CASE("transmit correlation shows up between adjacent columns") {
    const AntennaSetup setup;
    ImpairmentConfig imp;
    imp.alpha_tx = 0.9;
    Rng rng(8);
    const int n = 100000;
    cdouble acc = 0.0;
    double p0 = 0.0, p1 = 0.0;
    for (int t = 0; t < n; ++t) {
        const auto ch = generate_channel(rng, setup, imp, 1.0);
        for (std::size_t r = 0; r < 4; ++r) {
            acc += ch.h_true(r, 0) * std::conj(ch.h_true(r, 1));
            p0 += std::norm(ch.h_true(r, 0));
            p1 += std::norm(ch.h_true(r, 1));
        }
    }
    const double rho = std::abs(acc) / std::sqrt(p0 * p1);
    CHECK(rho == doctest::Approx(std::pow(0.9, 1.0 / 9.0)).epsilon(0.02));
}

TEST_CASE("transmission model") {
    Rng rng(9);
    const CMatrix h = testing::random_matrix(rng, 4, 3);
    const CVector x = testing::random_vector(rng, 3);
    const CVector y = transmit(rng, h, x, 0.0, 0.0);
    CHECK(testing::max_abs_diff_vec(y, h * x) == 0.0);
    CHECK_THROWS_AS(transmit(rng, h, CVector(2), 0.0, 0.0), std::invalid_argument);

    const CVector zero(3);
    const int n = 100000;
    double p = 0.0;
    for (int t = 0; t < n; ++t)
        for (const cdouble& v : transmit(rng, h, zero, 0.3, 0.0)) p += std::norm(v);
    CHECK(p / (4.0 * n) == doctest::Approx(0.3).epsilon(0.02));

    // EVM excess power: 0.0036 times the row energy of H
    double excess = 0.0, row_energy = 0.0;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c) row_energy += std::norm(h(r, c));
    for (int t = 0; t < n; ++t) {
        const CVector yy = transmit(rng, h, x, 0.0, 0.06);
        const CVector clean = h * x;
        for (std::size_t r = 0; r < 4; ++r) excess += std::norm(yy[r] - clean[r]);
    }
    CHECK(excess / n == doctest::Approx(0.0036 * row_energy).epsilon(0.02));

    Rng a(10), b(10);
    CHECK(testing::max_abs_diff_vec(transmit(a, h, x, 0.1, 0.06), transmit(b, h, x, 0.1, 0.06)) == 0.0);
}
