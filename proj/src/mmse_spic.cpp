#include "rcsmld/mmse_spic.hpp"

#include <algorithm>
#include <stdexcept>

namespace rcsmld::spic {

std::vector<double> SpicState::sinrs() const {
    std::vector<double> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.push_back(l.stats.sinr);
    return out;
}

CVector mmse_oneshot(const CMatrix& h, std::span<const cdouble> y, double n0) {
    if (!(n0 > 0.0)) throw std::invalid_argument("mmse_oneshot: N0 must be positive");
    if (y.size() != h.rows()) throw std::invalid_argument("mmse_oneshot: y length must equal rows of H");
    CMatrix a = h * h.adjoint();
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += n0;
    const CVector v = hpd_solve(a, y);
    return matched_filter(h, v);
}

CVector pic(const CMatrix& h, std::span<const cdouble> y, std::span<const cdouble> means, std::size_t n) {
    if (n >= h.cols()) throw std::out_of_range("pic: layer index out of range");
    if (means.size() != h.cols() || y.size() != h.rows()) throw std::invalid_argument("pic: dimension mismatch");
    CVector out(y.begin(), y.end());
    for (std::size_t m = 0; m < h.cols(); ++m) {
        if (m == n || means[m] == cdouble{}) continue;
        for (std::size_t r = 0; r < h.rows(); ++r) out[r] -= h(r, m) * means[m];
    }
    return out;
}

CMatrix spic_filter(const CMatrix& h, std::span<const double> variances, double n0) {
    if (!(n0 > 0.0)) throw std::invalid_argument("spic_filter: N0 must be positive");
    if (variances.size() != h.cols()) throw std::invalid_argument("spic_filter: one variance per layer required");
    const std::size_t nr = h.rows();
    CMatrix a(nr, nr);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = i; j < nr; ++j) {
            cdouble acc{};
            for (std::size_t m = 0; m < h.cols(); ++m) acc += h(i, m) * variances[m] * std::conj(h(j, m));
            a(i, j) = acc;
            a(j, i) = std::conj(acc);
        }
        a(i, i) = a(i, i).real() + n0;
    }
    // (A^{-1} H)^H = H^H A^{-1} since A is Hermitian
    return hpd_solve(a, h).adjoint();
}

PostStats post_stats(std::span<const cdouble> filter_row, std::span<const cdouble> channel_column,
                     double variance) {
    cdouble gh{};
    const std::size_t n = std::min(filter_row.size(), channel_column.size());
    for (std::size_t i = 0; i < n; ++i) gh += filter_row[i] * channel_column[i];

    PostStats s;
    double gain = gh.real();
    const double cap = variance > 0.0 ? 1.0 / variance : std::numeric_limits<double>::infinity();
    if (!(gain >= kVarianceFloor)) gain = kVarianceFloor;
    if (gain > cap) gain = cap;
    s.gain = gain;
    s.noise_var = std::max(gain * (1.0 - variance * gain), kVarianceFloor);
    s.sinr = gain * gain / s.noise_var;
    return s;
}

SpicState run(std::span<const cdouble> y, const CMatrix& h, double n0, const Constellation& c, int n_iter,
              double prior_clip) {
    if (n_iter < 1) throw std::invalid_argument("spic::run: n_iter must be >= 1");
    const std::size_t nl = h.cols();
    const auto q = static_cast<std::size_t>(c.bits_per_symbol());

    SpicState st;
    st.llrs.assign(nl * q, 0.0);
    st.layers.resize(nl);
    std::vector<cdouble> means(nl);
    std::vector<double> vars(nl);

    for (int it = 0; it < n_iter; ++it) {
        st.prior_llrs = st.llrs;
        for (std::size_t n = 0; n < nl; ++n) {
            const auto stats = soft_stats(c, std::span<const double>(st.prior_llrs).subspan(n * q, q), prior_clip);
            means[n] = stats.mean;
            vars[n] = stats.variance;
        }
        const CMatrix gh = spic_filter(h, vars, n0);
        for (std::size_t n = 0; n < nl; ++n) {
            const CVector y_n = pic(h, y, means, n);
            cdouble est{};
            for (std::size_t r = 0; r < h.rows(); ++r) est += gh(n, r) * y_n[r];
            const CVector hn = h.column(n);
            st.layers[n] = {est, post_stats(gh.row(n), hn, vars[n])};
        }
        for (std::size_t n = 0; n < nl; ++n) {
            const auto& out = st.layers[n];
            const auto l = scalar_llrs(c, out.estimate, out.stats.gain, out.stats.noise_var);
            std::copy(l.begin(), l.end(), st.llrs.begin() + static_cast<std::ptrdiff_t>(n * q));
        }
        st.iterations = it + 1;
    }
    return st;
}

}  // namespace rcsmld::spic
