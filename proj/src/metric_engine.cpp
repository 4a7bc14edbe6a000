#include "rcsmld/metric_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace rcsmld {

namespace {

std::size_t component_index(const RealComponent& rc, std::size_t n_layers) {
    return static_cast<std::size_t>(rc.layer) + (rc.axis == Axis::Quadrature ? n_layers : 0);
}

std::array<double, 2> symbol_value(const PairSymbol& s, const Constellation& c) {
    return {c.pam_level(s.first), c.pam_level(s.second)};
}

}  // namespace

BlockModel make_block_model(const RMatrix& g, std::span<const double> z, const CandidateSet& cs) {
    if (g.rows() != g.cols() || g.rows() != z.size() || g.rows() % 2 != 0)
        throw std::invalid_argument("make_block_model: real Gram matrix and z must be 2N_L-dimensional");
    const std::size_t nl = g.rows() / 2;
    const std::size_t layers = cs.layers();
    BlockModel m;
    m.layers = layers;
    m.isotropic = cs.complex_layers();
    m.z.resize(layers);
    m.g.resize(layers * layers);
    for (std::size_t k = 0; k < layers; ++k) {
        const std::array<std::size_t, 2> rk{component_index(cs.layout[k][0], nl), component_index(cs.layout[k][1], nl)};
        m.z[k] = {z[rk[0]], z[rk[1]]};
        for (std::size_t j = 0; j < layers; ++j) {
            const std::array<std::size_t, 2> rj{component_index(cs.layout[j][0], nl),
                                                component_index(cs.layout[j][1], nl)};
            m.g[k * layers + j] = {g(rk[0], rj[0]), g(rk[0], rj[1]), g(rk[1], rj[0]), g(rk[1], rj[1])};
        }
    }
    return m;
}

BlockModel make_block_model(const CMatrix& g, std::span<const cdouble> z, const CandidateSet& cs) {
    const std::size_t nl = g.rows();
    if (g.cols() != nl || z.size() != nl) throw std::invalid_argument("make_block_model: G and z dimensions differ");
    RMatrix gr(2 * nl, 2 * nl);
    std::vector<double> zr(2 * nl);
    for (std::size_t i = 0; i < nl; ++i) {
        zr[i] = z[i].real();
        zr[nl + i] = z[i].imag();
        for (std::size_t j = 0; j < nl; ++j) {
            const cdouble v = g(i, j);
            gr(i, j) = v.real();
            gr(i, nl + j) = -v.imag();
            gr(nl + i, j) = v.imag();
            gr(nl + i, nl + j) = v.real();
        }
    }
    return make_block_model(gr, zr, cs);
}

double block_metric(const BlockModel& model, std::span<const std::array<double, 2>> u) {
    double mu = 0.0;
    for (std::size_t k = 0; k < model.layers; ++k) {
        const auto& gk = model.block(k, k);
        const auto& v = u[k];
        mu += -(v[0] * model.z[k][0] + v[1] * model.z[k][1]) +
              0.5 * (v[0] * (gk[0] * v[0] + gk[1] * v[1]) + v[1] * (gk[2] * v[0] + gk[3] * v[1]));
        for (std::size_t m = 0; m < k; ++m) {
            const auto& b = model.block(k, m);
            const auto& w = u[m];
            mu += v[0] * (b[0] * w[0] + b[1] * w[1]) + v[1] * (b[2] * w[0] + b[3] * w[1]);
        }
    }
    return mu;
}

std::size_t MetricTables::gamma_entries() const {
    std::size_t n = 0;
    for (const auto& g : gamma) n += g.size();
    return n;
}

std::size_t MetricTables::delta_entries() const {
    std::size_t n = 0;
    for (const auto& d : delta) n += d.size();
    return n;
}

MetricTables precompute_tables(const BlockModel& model, const CandidateSet& cs, const Constellation& c,
                               OpCounters& counters) {
    if (model.layers != cs.layers()) throw std::invalid_argument("precompute_tables: model and candidate set differ");
    const std::size_t layers = cs.layers();
    MetricTables t;
    t.sizes = cs.sizes();
    t.gamma.resize(layers);
    t.delta.resize(layers * (layers > 0 ? layers - 1 : 0) / 2);

    for (std::size_t k = 0; k < layers; ++k) {
        const auto& gk = model.block(k, k);
        const auto& zk = model.z[k];
        auto& row = t.gamma[k];
        row.reserve(cs.sets[k].size());
        if (model.isotropic) {
            const double half_g = gk[0] / 2;  // channel rate
            counters.mults_channel_rate += 1;
            for (const PairSymbol& s : cs.sets[k]) {
                const auto u = symbol_value(s, c);
                const double energy = c.pam_level(s.first) * c.pam_level(s.first) +
                                      c.pam_level(s.second) * c.pam_level(s.second);  // alphabet table
                row.push_back(-(u[0] * zk[0] + u[1] * zk[1]) + energy * half_g);
            }
            counters.mults_symbol_rate += 3 * cs.sets[k].size();
            counters.adds += 2 * cs.sets[k].size();
        } else {
            const double h00 = gk[0] / 2, h11 = gk[3] / 2, h01 = (gk[1] + gk[2]) / 2;
            counters.mults_channel_rate += 3;
            counters.adds_channel_rate += 1;
            for (const PairSymbol& s : cs.sets[k]) {
                const auto u = symbol_value(s, c);
                // u0^2, u1^2, u0*u1 are alphabet tables
                row.push_back(-(u[0] * zk[0] + u[1] * zk[1]) + (u[0] * u[0] * h00 + u[1] * u[1] * h11) +
                              u[0] * u[1] * h01);
            }
            counters.mults_symbol_rate += 5 * cs.sets[k].size();
            counters.adds += 4 * cs.sets[k].size();
        }
    }

    const bool delta_symbol_rate = counters.mode == AccountingMode::PerRe;
    for (std::size_t k = 1; k < layers; ++k) {
        for (std::size_t m = 0; m < k; ++m) {
            const auto& b = model.block(k, m);
            const std::size_t mk = cs.sets[k].size(), mm = cs.sets[m].size();
            // rotate the lower-layer candidates once: w = G_km v
            std::vector<std::array<double, 2>> w(mm);
            for (std::size_t j = 0; j < mm; ++j) {
                const auto v = symbol_value(cs.sets[m][j], c);
                w[j] = {b[0] * v[0] + b[1] * v[1], b[2] * v[0] + b[3] * v[1]};
            }
            counters.mults_channel_rate += 4 * mm;
            counters.adds_channel_rate += 2 * mm;

            auto& table = t.delta[k * (k - 1) / 2 + m];
            table.resize(mk * mm);
            for (std::size_t i = 0; i < mk; ++i) {
                const auto u = symbol_value(cs.sets[k][i], c);
                for (std::size_t j = 0; j < mm; ++j) table[i * mm + j] = u[0] * w[j][0] + u[1] * w[j][1];
            }
            if (delta_symbol_rate) {
                counters.mults_symbol_rate += 2 * mk * mm;
                counters.adds += mk * mm;
            } else {
                counters.mults_channel_rate += 2 * mk * mm;
                counters.adds_channel_rate += mk * mm;
            }
        }
    }
    return t;
}

MetricTables precompute_tables(const CMatrix& g, std::span<const cdouble> z, const CandidateSet& cs,
                               const Constellation& c, OpCounters& counters) {
    return precompute_tables(make_block_model(g, z, cs), cs, c, counters);
}

std::vector<double> evaluate_all(const MetricTables& tables, const CandidateList& cl, OpCounters& counters) {
    const std::size_t layers = tables.sizes.size();
    if (cl.layers() != layers) throw std::invalid_argument("evaluate_all: candidate list does not match the tables");
    std::vector<double> out(cl.size());
    if (cl.empty()) return out;

    // partial[d][k][x]: gamma_d(x) + sum_{m<=k} delta_dm(x, r_m) for the current
    // prefix r_0..r_k, valid while stamp[d][k][x] equals node_id[k].
    std::vector<std::vector<std::vector<double>>> partial(layers);
    std::vector<std::vector<std::vector<std::uint64_t>>> stamp(layers);
    for (std::size_t d = 2; d < layers; ++d) {
        partial[d].assign(d - 1, std::vector<double>(static_cast<std::size_t>(tables.sizes[d])));
        stamp[d].assign(d - 1, std::vector<std::uint64_t>(static_cast<std::size_t>(tables.sizes[d]), 0));
    }
    std::vector<std::uint64_t> node_id(layers, 0);
    std::vector<double> mu(layers, 0.0);
    std::uint64_t adds = 0;

    auto delta = [&](std::size_t d, std::size_t m, std::uint8_t rd, std::uint8_t rm) {
        return tables.delta_table(d, m)[static_cast<std::size_t>(rd) * static_cast<std::size_t>(tables.sizes[m]) + rm];
    };
    std::span<const std::uint8_t> r;
    auto cached = [&](auto&& self, std::size_t d, std::size_t k, std::uint8_t x) -> double {
        double& slot = partial[d][k][x];
        std::uint64_t& st = stamp[d][k][x];
        if (st == node_id[k]) return slot;
        const double base = k == 0 ? tables.gamma[d][x] : self(self, d, k - 1, x);
        slot = base + delta(d, k, x, r[k]);
        ++adds;
        st = node_id[k];
        return slot;
    };

    std::span<const std::uint8_t> prev;
    for (std::size_t i = 0; i < cl.size(); ++i) {
        r = cl[i];
        std::size_t first = 0;
        if (i > 0)
            while (first < layers && r[first] == prev[first]) ++first;
        if (first == layers) {  // duplicate entry
            out[i] = mu[layers - 1];
            continue;
        }
        for (std::size_t d = first; d < layers; ++d) {
            ++node_id[d];
            const std::uint8_t x = r[d];
            if (d == 0) {
                mu[0] = tables.gamma[0][x];
            } else {
                const double s = d >= 2 ? cached(cached, d, d - 2, x) : tables.gamma[d][x];
                mu[d] = mu[d - 1] + s + delta(d, d - 1, x, r[d - 1]);
                adds += 2;
            }
        }
        out[i] = mu[layers - 1];
        prev = r;
    }
    counters.adds += adds;
    return out;
}

OpCounts predict_counts(std::span<const int> m_vector) {
    OpCounts c;
    const std::size_t n = m_vector.size();
    std::uint64_t sum_m = 0, cross = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto mk = static_cast<std::uint64_t>(m_vector[k]);
        cross += mk * sum_m;
        sum_m += mk;
    }
    c.mults = 3 * sum_m + 2 * cross;

    std::vector<std::uint64_t> prefix_prod(n);  // prod_{n<=k} M_n
    std::uint64_t p = 1;
    for (std::size_t k = 0; k < n; ++k) prefix_prod[k] = p *= static_cast<std::uint64_t>(m_vector[k]);
    std::uint64_t third = 0, fourth = 0;
    for (std::size_t l = 2; l < n; ++l) {
        std::uint64_t s = 0;
        for (std::size_t k = 0; k + 2 <= l; ++k) s += prefix_prod[k];
        third += static_cast<std::uint64_t>(m_vector[l]) * s;
    }
    for (std::size_t k = 1; k < n; ++k) fourth += 2 * prefix_prod[k];
    c.adds = 2 * sum_m + cross + third + fourth;
    return c;
}

double ce_aware_transform(double mu, double energy, double n0, double sigma_ce_sq, std::size_t n_r) {
    const double density = n0 + energy * sigma_ce_sq;
    return static_cast<double>(n_r) * std::log(density) + mu / density;
}

}  // namespace rcsmld
