#include "rcsmld/candidates.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rcsmld {

std::vector<int> CandidateSet::sizes() const {
    std::vector<int> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.push_back(static_cast<int>(s.size()));
    return out;
}

bool CandidateSet::complex_layers() const noexcept {
    return std::all_of(layout.begin(), layout.end(), [](const auto& l) {
        return l[0].layer == l[1].layer && l[0].axis == Axis::InPhase && l[1].axis == Axis::Quadrature;
    });
}

std::vector<int> CandidateSet::layer_order() const {
    std::vector<int> out;
    out.reserve(layout.size());
    for (const auto& l : layout) out.push_back(l[0].layer);
    return out;
}

void CandidateList::push_back(std::span<const std::uint8_t> ranks) {
    if (ranks.size() != layers_) throw std::invalid_argument("CandidateList: rank vector has wrong length");
    ranks_.insert(ranks_.end(), ranks.begin(), ranks.end());
}

std::vector<int> order_layers(std::span<const double> sinrs, std::span<const int> m_vector) {
    if (sinrs.size() != m_vector.size())
        throw std::invalid_argument("order_layers: need one SINR per entry of the M-vector");
    std::vector<int> order(sinrs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sinrs[a] < sinrs[b]; });
    return order;
}

namespace {

void validate_m_vector(std::span<const int> m_vector, std::size_t layers, std::size_t alphabet) {
    if (m_vector.size() != layers)
        throw std::invalid_argument("M-vector has " + std::to_string(m_vector.size()) + " entries for " +
                                    std::to_string(layers) + " layers");
    for (int m : m_vector)
        if (m < 1 || static_cast<std::size_t>(m) > alphabet)
            throw std::invalid_argument("M-vector entry " + std::to_string(m) + " outside [1, " +
                                        std::to_string(alphabet) + "]");
}

}  // namespace

CandidateSet build_sets(const spic::SpicState& state, const Constellation& c, std::span<const int> m_vector,
                        std::span<const int> order) {
    const std::size_t nl = state.layers.size();
    validate_m_vector(m_vector, nl, c.size());
    if (order.size() != nl) throw std::invalid_argument("build_sets: order has wrong length");

    CandidateSet cs;
    cs.layout.resize(nl);
    cs.sets.resize(nl);
    std::vector<std::size_t> labels(c.size());
    std::vector<double> dist(c.size());
    for (std::size_t d = 0; d < nl; ++d) {
        const int n = order[d];
        const auto& out = state.layers.at(static_cast<std::size_t>(n));
        for (std::size_t s = 0; s < c.size(); ++s) dist[s] = std::norm(out.estimate - out.stats.gain * c.point(s));
        std::iota(labels.begin(), labels.end(), std::size_t{0});
        std::stable_sort(labels.begin(), labels.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
        cs.layout[d] = {RealComponent{n, Axis::InPhase}, RealComponent{n, Axis::Quadrature}};
        auto& set = cs.sets[d];
        for (int k = 0; k < m_vector[d]; ++k) {
            const std::size_t s = labels[k];
            set.push_back({static_cast<std::uint8_t>(c.axis_label(s, Axis::InPhase)),
                           static_cast<std::uint8_t>(c.axis_label(s, Axis::Quadrature))});
        }
    }
    return cs;
}

CandidateSet build_sets(const spic::SpicState& state, const Constellation& c, std::span<const int> m_vector) {
    const auto sinrs = state.sinrs();
    const auto order = order_layers(sinrs, m_vector);
    return build_sets(state, c, m_vector, order);
}

CandidateList enumerate_and_reduce(const CandidateSet& cs, bool reduction) {
    const std::size_t nl = cs.layers();
    CandidateList out(nl);
    if (nl == 0) return out;
    const auto m = cs.sizes();
    std::size_t total = 1;
    for (int v : m) total *= static_cast<std::size_t>(v);
    out.enumerated = total;

    std::vector<std::uint8_t> ranks(nl, 0);
    for (std::size_t i = 0; i < total; ++i) {
        int worst = 0;
        for (std::size_t k = 0; k < nl; ++k)
            if (m[k] > 1 && ranks[k] == m[k] - 1) ++worst;
        if (!reduction || worst < 2) out.push_back(ranks);
        // odometer, last layer fastest
        for (std::size_t k = nl; k-- > 0;) {
            if (++ranks[k] < m[k]) break;
            ranks[k] = 0;
        }
    }
    return out;
}

std::size_t count_survivors(std::span<const int> m_vector, bool reduction) {
    // ways[j] = number of prefixes carrying j worst-ranked symbols (j capped at 2)
    std::array<std::size_t, 3> ways{1, 0, 0};
    for (int mk : m_vector) {
        const auto m = static_cast<std::size_t>(mk);
        std::array<std::size_t, 3> next{};
        const std::size_t plain = m > 1 ? m - 1 : 1;
        const std::size_t flagged = m > 1 ? 1 : 0;
        for (int j = 0; j < 3; ++j) {
            next[j] += ways[j] * plain;
            next[std::min(j + 1, 2)] += ways[j] * flagged;
        }
        ways = next;
    }
    return reduction ? ways[0] + ways[1] : ways[0] + ways[1] + ways[2];
}

CVector candidate_vector(const CandidateSet& cs, const Constellation& c, std::span<const std::uint8_t> ranks,
                         std::size_t n_layers) {
    std::vector<double> re(n_layers, 0.0), im(n_layers, 0.0);
    for (std::size_t d = 0; d < cs.layers(); ++d) {
        const PairSymbol e = cs.sets[d][ranks[d]];
        const std::array<std::uint8_t, 2> lv{e.first, e.second};
        for (int j = 0; j < 2; ++j) {
            const auto& comp = cs.layout[d][j];
            auto& dst = comp.axis == Axis::InPhase ? re : im;
            dst.at(static_cast<std::size_t>(comp.layer)) = c.pam_level(lv[j]);
        }
    }
    CVector x(n_layers);
    for (std::size_t n = 0; n < n_layers; ++n) x[n] = {re[n], im[n]};
    return x;
}

std::vector<std::uint32_t> candidate_bitwords(const CandidateSet& cs, const CandidateList& cl,
                                              const Constellation& c, std::size_t n_layers) {
    const int q = c.bits_per_symbol();
    const int m = c.bits_per_axis();
    if (static_cast<std::size_t>(q) * n_layers > 32) throw std::invalid_argument("candidate_bitwords: too many bits");

    std::vector<std::vector<std::uint32_t>> masks(cs.layers());
    for (std::size_t d = 0; d < cs.layers(); ++d) {
        for (const PairSymbol& e : cs.sets[d]) {
            std::uint32_t w = 0;
            const std::array<std::uint8_t, 2> lv{e.first, e.second};
            for (int j = 0; j < 2; ++j) {
                const auto& comp = cs.layout[d][j];
                for (int b = 0; b < m; ++b) {
                    if (((lv[j] >> (m - 1 - b)) & 1u) == 0) continue;
                    const int pos = comp.layer * q + c.axis_bit_position(comp.axis, b);
                    w |= std::uint32_t{1} << pos;
                }
            }
            masks[d].push_back(w);
        }
    }
    std::vector<std::uint32_t> out(cl.size());
    for (std::size_t i = 0; i < cl.size(); ++i) {
        const auto r = cl[i];
        std::uint32_t w = 0;
        for (std::size_t d = 0; d < cs.layers(); ++d) w |= masks[d][r[d]];
        out[i] = w;
    }
    return out;
}

std::vector<double> candidate_energies(const CandidateSet& cs, const CandidateList& cl, const Constellation& c) {
    std::vector<std::vector<double>> e(cs.layers());
    for (std::size_t d = 0; d < cs.layers(); ++d)
        for (const PairSymbol& s : cs.sets[d]) {
            const double a = c.pam_level(s.first), b = c.pam_level(s.second);
            e[d].push_back(a * a + b * b);
        }
    std::vector<double> out(cl.size());
    for (std::size_t i = 0; i < cl.size(); ++i) {
        const auto r = cl[i];
        double acc = 0.0;
        for (std::size_t d = 0; d < cs.layers(); ++d) acc += e[d][r[d]];
        out[i] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::array<RealComponent, 2> RealPairedModel::pair_layout(std::size_t p) const {
    const int nl = static_cast<int>(pairs());
    auto comp = [nl](int idx) {
        return RealComponent{idx % nl, idx < nl ? Axis::InPhase : Axis::Quadrature};
    };
    return {comp(pairing.at(2 * p)), comp(pairing.at(2 * p + 1))};
}

RealPairedModel real_decompose(const CMatrix& h, std::span<const cdouble> y, PairingMode mode) {
    if (y.size() != h.rows()) throw std::invalid_argument("real_decompose: y length must equal rows of H");
    const std::size_t nr = h.rows(), nl = h.cols();
    RealPairedModel m;
    m.h = RMatrix(2 * nr, 2 * nl);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nl; ++c) {
            const cdouble v = h(r, c);
            m.h(r, c) = v.real();
            m.h(r, nl + c) = -v.imag();
            m.h(nr + r, c) = v.imag();
            m.h(nr + r, nl + c) = v.real();
        }
    m.y.resize(2 * nr);
    for (std::size_t r = 0; r < nr; ++r) {
        m.y[r] = y[r].real();
        m.y[nr + r] = y[r].imag();
    }
    m.pairing.resize(2 * nl);
    for (std::size_t k = 0; k < nl; ++k) {
        m.pairing[2 * k] = static_cast<int>(k);
        const std::size_t partner = mode == PairingMode::SameLayer ? k : (k + 1) % nl;
        m.pairing[2 * k + 1] = static_cast<int>(nl + partner);
    }
    return m;
}

double PairPosterior::distance(double u0, double u1) const noexcept {
    const double e0 = estimate[0] - (gain[0] * u0 + gain[1] * u1);
    const double e1 = estimate[1] - (gain[2] * u0 + gain[3] * u1);
    const double det = cov[0] * cov[3] - cov[1] * cov[2];
    // e^T C^{-1} e with C^{-1} = adj(C)/det
    return (e0 * (cov[3] * e0 - cov[1] * e1) + e1 * (-cov[2] * e0 + cov[0] * e1)) / det;
}

ComponentPriors component_priors(const Constellation& c, std::span<const double> llrs, std::size_t n_layers,
                                 double clip) {
    const auto q = static_cast<std::size_t>(c.bits_per_symbol());
    if (llrs.size() != q * n_layers) throw std::invalid_argument("component_priors: LLR count mismatch");
    ComponentPriors p;
    p.means.resize(2 * n_layers);
    p.variances.resize(2 * n_layers);
    for (std::size_t n = 0; n < n_layers; ++n) {
        const auto sym = llrs.subspan(n * q, q);
        const auto i = axis_soft_stats(c, sym, Axis::InPhase, clip);
        const auto qd = axis_soft_stats(c, sym, Axis::Quadrature, clip);
        p.means[n] = i.mean;
        p.variances[n] = i.variance;
        p.means[n_layers + n] = qd.mean;
        p.variances[n_layers + n] = qd.variance;
    }
    return p;
}

std::vector<PairPosterior> pair_posteriors(const RealPairedModel& model, std::span<const double> means,
                                           std::span<const double> variances, double n0) {
    if (!(n0 > 0.0)) throw std::invalid_argument("pair_posteriors: N0 must be positive");
    const std::size_t rows = model.h.rows(), comps = model.h.cols();
    if (means.size() != comps || variances.size() != comps)
        throw std::invalid_argument("pair_posteriors: one prior per real component required");

    RMatrix a(rows, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = i; j < rows; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < comps; ++c) acc += model.h(i, c) * variances[c] * model.h(j, c);
            a(i, j) = acc;
            a(j, i) = acc;
        }
    for (std::size_t i = 0; i < rows; ++i) a(i, i) += n0 / 2.0;
    const RMatrix w = hpd_solve(a, model.h);  // column c = A^{-1} h_c

    std::vector<PairPosterior> out(model.pairs());
    for (std::size_t p = 0; p < model.pairs(); ++p) {
        const std::array<int, 2> idx{model.pairing[2 * p], model.pairing[2 * p + 1]};
        std::vector<double> yt = model.y;
        for (std::size_t c = 0; c < comps; ++c) {
            if (static_cast<int>(c) == idx[0] || static_cast<int>(c) == idx[1] || means[c] == 0.0) continue;
            for (std::size_t r = 0; r < rows; ++r) yt[r] -= model.h(r, c) * means[c];
        }
        PairPosterior& pp = out[p];
        for (int i = 0; i < 2; ++i) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r) acc += w(r, idx[i]) * yt[r];
            pp.estimate[i] = acc;
            for (int j = 0; j < 2; ++j) {
                double g = 0.0;
                for (std::size_t r = 0; r < rows; ++r) g += model.h(r, idx[i]) * w(r, idx[j]);
                pp.gain[2 * i + j] = g;
            }
        }
        const double g01 = 0.5 * (pp.gain[1] + pp.gain[2]);
        pp.gain[1] = pp.gain[2] = g01;
        // cov = B - B R_p B
        const double v0 = variances[idx[0]], v1 = variances[idx[1]];
        const auto& b = pp.gain;
        pp.cov[0] = b[0] - (b[0] * v0 * b[0] + b[1] * v1 * b[2]);
        pp.cov[1] = b[1] - (b[0] * v0 * b[1] + b[1] * v1 * b[3]);
        pp.cov[2] = pp.cov[1];
        pp.cov[3] = b[3] - (b[2] * v0 * b[1] + b[3] * v1 * b[3]);
        pp.cov[0] = std::max(pp.cov[0], spic::kVarianceFloor);
        pp.cov[3] = std::max(pp.cov[3], spic::kVarianceFloor);
        const double limit = (1.0 - 1e-9) * pp.cov[0] * pp.cov[3];
        if (pp.cov[1] * pp.cov[1] > limit) pp.cov[1] = pp.cov[2] = std::copysign(std::sqrt(limit), pp.cov[1]);

        // SINR = tr(B C^{-1} B) / 4, which equals beta^2/sigma^2 for a (Re, Im) pair
        const double det = pp.cov[0] * pp.cov[3] - pp.cov[1] * pp.cov[2];
        const std::array<double, 4> ci{pp.cov[3] / det, -pp.cov[1] / det, -pp.cov[2] / det, pp.cov[0] / det};
        double tr = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) tr += b[2 * i + k] * ci[2 * k + l] * b[2 * l + i];
        pp.sinr = tr / 4.0;
    }
    return out;
}

CandidateSet build_pair_sets(const RealPairedModel& model, std::span<const PairPosterior> posteriors,
                             const Constellation& c, std::span<const int> m_vector) {
    const std::size_t np = model.pairs();
    if (posteriors.size() != np) throw std::invalid_argument("build_pair_sets: one posterior per pair required");
    validate_m_vector(m_vector, np, c.size());
    std::vector<double> sinrs(np);
    for (std::size_t p = 0; p < np; ++p) sinrs[p] = posteriors[p].sinr;
    const auto order = order_layers(sinrs, m_vector);

    const std::size_t lv = c.levels_per_axis();
    std::vector<std::size_t> grid(lv * lv);
    std::vector<double> dist(lv * lv);
    CandidateSet cs;
    cs.layout.resize(np);
    cs.sets.resize(np);
    for (std::size_t d = 0; d < np; ++d) {
        const auto p = static_cast<std::size_t>(order[d]);
        for (std::size_t g = 0; g < grid.size(); ++g)
            dist[g] = posteriors[p].distance(c.pam_level(g / lv), c.pam_level(g % lv));
        std::iota(grid.begin(), grid.end(), std::size_t{0});
        std::stable_sort(grid.begin(), grid.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
        cs.layout[d] = model.pair_layout(p);
        for (int k = 0; k < m_vector[d]; ++k)
            cs.sets[d].push_back({static_cast<std::uint8_t>(grid[k] / lv), static_cast<std::uint8_t>(grid[k] % lv)});
    }
    return cs;
}

}  // namespace rcsmld
