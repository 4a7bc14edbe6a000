#include "rcsmld/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcsmld {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct MaxOp {
    static double apply(double a, double b) noexcept { return a > b ? a : b; }
};

struct LogAddOp {
    static double apply(double a, double b) noexcept {
        if (a == kNegInf) return b;
        if (b == kNegInf) return a;
        const double hi = std::max(a, b);
        return hi + std::log1p(std::exp(-std::abs(a - b)));
    }
};

template <class Op>
class Enumerator {
public:
    Enumerator(std::span<const cdouble> y, const CMatrix& h, double n0, double sigma_ce_sq, const Constellation& c)
        : c_(c), nr_(h.rows()), nl_(h.cols()), q_(c.bits_per_symbol()), n0_(n0), sigma_(sigma_ce_sq) {
        const std::size_t ns = c.size();
        products_.resize(nl_ * ns * nr_);
        for (std::size_t n = 0; n < nl_; ++n)
            for (std::size_t s = 0; s < ns; ++s)
                for (std::size_t r = 0; r < nr_; ++r) products_[(n * ns + s) * nr_ + r] = h(r, n) * c.point(s);
        residual_.resize((nl_ + 1) * nr_);
        std::copy(y.begin(), y.end(), residual_.begin());
        acc_.assign(nl_ * static_cast<std::size_t>(q_) * 2, kNegInf);
    }

    std::vector<double> run() {
        descend(0, 0.0);
        std::vector<double> llrs(nl_ * static_cast<std::size_t>(q_));
        for (std::size_t i = 0; i < llrs.size(); ++i) llrs[i] = acc_[2 * i + 1] - acc_[2 * i];
        return llrs;
    }

private:
    double log_likelihood(double dist, double energy) const noexcept {
        if (sigma_ == 0.0) return -dist / n0_;
        const double density = n0_ + energy * sigma_;
        return -(static_cast<double>(nr_) * std::log(density / n0_) + dist / density);
    }

    double descend(std::size_t d, double energy) {
        const std::size_t ns = c_.size();
        const cdouble* r_in = residual_.data() + d * nr_;
        cdouble* r_out = residual_.data() + (d + 1) * nr_;
        const bool leaf = d + 1 == nl_;
        double node = kNegInf;
        for (std::size_t s = 0; s < ns; ++s) {
            const cdouble* hs = products_.data() + (d * ns + s) * nr_;
            const double e = energy + c_.energy(s);
            double value;
            if (leaf) {
                double dist = 0.0;
                for (std::size_t r = 0; r < nr_; ++r) dist += std::norm(r_in[r] - hs[r]);
                value = log_likelihood(dist, e);
            } else {
                for (std::size_t r = 0; r < nr_; ++r) r_out[r] = r_in[r] - hs[r];
                value = descend(d + 1, e);
            }
            double* slot = acc_.data() + d * static_cast<std::size_t>(q_) * 2;
            for (int j = 0; j < q_; ++j) {
                double& a = slot[2 * j + c_.bit(s, j)];
                a = Op::apply(a, value);
            }
            node = Op::apply(node, value);
        }
        return node;
    }

    const Constellation& c_;
    std::size_t nr_, nl_;
    int q_;
    double n0_, sigma_;
    CVector products_;   // h_n * s for every layer and symbol
    CVector residual_;   // y minus the layers fixed so far, one row per depth
    std::vector<double> acc_;  // [bit][hypothesis]
};

void check_inputs(std::span<const cdouble> y, const CMatrix& h, double n0, double sigma_ce_sq,
                  const Constellation& c) {
    if (y.size() != h.rows()) throw std::invalid_argument("oracle: y and H dimensions differ");
    if (h.cols() == 0) throw std::invalid_argument("oracle: H has no layers");
    if (!(n0 > 0.0)) throw std::invalid_argument("oracle: N0 must be positive");
    if (!(sigma_ce_sq >= 0.0)) throw std::invalid_argument("oracle: sigma_ce_sq must be non-negative");
    const double hyp = std::pow(static_cast<double>(c.size()), static_cast<double>(h.cols()));
    if (hyp > kMaxHypotheses) throw SearchSpaceExceeded("oracle: search space exceeds 1e6 hypotheses");
}

}  // namespace

std::vector<double> ce_aware_oracle(std::span<const cdouble> y, const CMatrix& h, double n0, double sigma_ce_sq,
                                    const Constellation& c, OracleMode mode) {
    check_inputs(y, h, n0, sigma_ce_sq, c);
    if (mode == OracleMode::Mlm) return Enumerator<MaxOp>(y, h, n0, sigma_ce_sq, c).run();
    return Enumerator<LogAddOp>(y, h, n0, sigma_ce_sq, c).run();
}

std::vector<double> mlm_llrs(std::span<const cdouble> y, const CMatrix& h, double n0, const Constellation& c) {
    return ce_aware_oracle(y, h, n0, 0.0, c, OracleMode::Mlm);
}

std::vector<double> map_llrs(std::span<const cdouble> y, const CMatrix& h, double n0, const Constellation& c) {
    return ce_aware_oracle(y, h, n0, 0.0, c, OracleMode::Map);
}

}  // namespace rcsmld
