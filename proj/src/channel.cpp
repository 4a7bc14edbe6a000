#include "rcsmld/channel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rcsmld {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void require_unit_interval(double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string("impairments.") + field + ": must lie in [0, 1], got " +
                                    std::to_string(v));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ splitmix64(a + 0x632BE59BD9B4E019ull));
    s = splitmix64(s ^ splitmix64(b + 0x8CB92BA72F3D8DD7ull));
    return s;
}

void ImpairmentConfig::validate() const {
    if (!(evm_fraction >= 0.0)) throw std::invalid_argument("impairments.evm_fraction: must be >= 0");
    if (!(sigma_ce_sq >= 0.0)) throw std::invalid_argument("impairments.sigma_ce_sq: must be >= 0");
    require_unit_interval(alpha_tx, "alpha_tx");
    require_unit_interval(beta_rx, "beta_rx");
}

CMatrix correlation_matrix(int n, double c) {
    if (n != 1 && n != 2 && n != 4)
        throw std::invalid_argument("correlation_matrix: unsupported antenna count " + std::to_string(n));
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("correlation_matrix: coefficient outside [0, 1]");
    CMatrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                r(i, j) = 1.0;
                continue;
            }
            const double e = static_cast<double>(std::abs(i - j)) / (n - 1);
            r(i, j) = std::pow(c, e * e);
        }
    return r;
}

CMatrix hermitian_sqrt(const CMatrix& r) {
    const auto n = static_cast<Eigen::Index>(r.rows());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = r(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
    if (eig.info() != Eigen::Success) throw std::runtime_error("hermitian_sqrt: eigendecomposition failed");
    // clamp round-off negatives of a semidefinite input
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXcd s = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().adjoint();
    CMatrix out(r.rows(), r.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = s(i, j);
    return out;
}

cdouble complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

ChannelRealization generate_channel(Rng& rng, const AntennaSetup& setup, const ImpairmentConfig& impairments,
                                    double n0) {
    impairments.validate();
    if (setup.n_layers < 1 || setup.n_layers > std::min(setup.n_tx, setup.n_rx))
        throw std::invalid_argument("generate_channel: n_layers must lie in [1, min(n_tx, n_rx)]");
    const CMatrix rx_sqrt = hermitian_sqrt(correlation_matrix(setup.n_rx, impairments.beta_rx));
    const CMatrix tx_sqrt = hermitian_sqrt(correlation_matrix(setup.n_tx, impairments.alpha_tx));

    CMatrix hw(setup.n_rx, setup.n_tx);
    for (int r = 0; r < setup.n_rx; ++r)
        for (int t = 0; t < setup.n_tx; ++t) hw(r, t) = complex_gaussian(rng, 1.0);
    const CMatrix full = rx_sqrt * hw * tx_sqrt;

    ChannelRealization ch;
    ch.n0 = n0;
    ch.sigma_ce_sq = impairments.sigma_ce_sq;
    ch.h_true = CMatrix(setup.n_rx, setup.n_layers);
    for (int r = 0; r < setup.n_rx; ++r)
        for (int l = 0; l < setup.n_layers; ++l) ch.h_true(r, l) = full(r, l);
    ch.h_est = ch.h_true;
    if (impairments.sigma_ce_sq > 0.0) {
        for (int r = 0; r < setup.n_rx; ++r)
            for (int l = 0; l < setup.n_layers; ++l)
                ch.h_est(r, l) += complex_gaussian(rng, impairments.sigma_ce_sq);
    }
    return ch;
}

CVector transmit(Rng& rng, const CMatrix& h_true, std::span<const cdouble> x, double n0, double evm_fraction) {
    if (x.size() != h_true.cols()) throw std::invalid_argument("transmit: symbol count must equal layers of H");
    CVector tx(x.begin(), x.end());
    if (evm_fraction > 0.0) {
        const double v = evm_fraction * evm_fraction;
        for (auto& s : tx) s += complex_gaussian(rng, v);
    }
    CVector y = h_true * tx;
    if (n0 > 0.0)
        for (auto& v : y) v += complex_gaussian(rng, n0);
    return y;
}

}  // namespace rcsmld
