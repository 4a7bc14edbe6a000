#include "rcsmld/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace rcsmld {

void GibbsConfig::validate() const {
    if (n_samplers < 1) throw std::invalid_argument("gibbs.n_samplers: must be >= 1");
    if (n_sweeps < 0) throw std::invalid_argument("gibbs.n_sweeps: must be >= 0");
    if (!(temperature > 0.0)) throw std::invalid_argument("gibbs.temperature: must be positive");
    if (pool_cap < n_samplers) throw std::invalid_argument("gibbs.pool_cap: must be >= n_samplers");
}

namespace {

using GridVector = std::vector<std::uint8_t>;  // per layer grid index first*L + second

std::array<double, 2> grid_value(std::size_t g, const Constellation& c) {
    const std::size_t lv = c.levels_per_axis();
    return {c.pam_level(g / lv), c.pam_level(g % lv)};
}

double grid_metric(const BlockModel& model, const GridVector& v, const Constellation& c) {
    std::vector<std::array<double, 2>> u(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) u[k] = grid_value(v[k], c);
    return block_metric(model, u);
}

struct PoolEntry {
    GridVector vec;
    double metric;
};

bool better(const PoolEntry& a, const PoolEntry& b) {
    if (a.metric != b.metric) return a.metric < b.metric;
    return a.vec < b.vec;
}

}  // namespace

std::vector<double> conditional_distribution(const BlockModel& model, std::span<const std::array<double, 2>> state,
                                             std::size_t k, const Constellation& c, double n0, double temperature) {
    std::array<double, 2> w{0.0, 0.0};
    for (std::size_t m = 0; m < model.layers; ++m) {
        if (m == k) continue;
        const auto& b = model.block(k, m);
        w[0] += b[0] * state[m][0] + b[1] * state[m][1];
        w[1] += b[2] * state[m][0] + b[3] * state[m][1];
    }
    const auto& gk = model.block(k, k);
    const auto& zk = model.z[k];
    const std::size_t n = c.levels_per_axis() * c.levels_per_axis();
    std::vector<double> score(n);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < n; ++g) {
        const auto u = grid_value(g, c);
        const double quad = 0.5 * (u[0] * (gk[0] * u[0] + gk[1] * u[1]) + u[1] * (gk[2] * u[0] + gk[3] * u[1]));
        score[g] = -(u[0] * zk[0] + u[1] * zk[1]) + quad + u[0] * w[0] + u[1] * w[1];
        best = std::min(best, score[g]);
    }
    // ||y - Hx||^2 = ||y||^2 + 2 mu, only the layer-k part of mu varies
    const double scale = 2.0 / (n0 * temperature);
    double total = 0.0;
    for (auto& s : score) {
        s = std::exp(-(s - best) * scale);
        total += s;
    }
    for (auto& s : score) s /= total;
    return score;
}

RefinedCandidates gibbs_refine(const CandidateSet& cs, const CandidateList& seeds, const BlockModel& model, double n0,
                               const Constellation& c, const GibbsConfig& cfg, Rng& rng) {
    cfg.validate();
    if (seeds.empty()) throw std::invalid_argument("gibbs_refine: need at least one seed");
    const std::size_t layers = cs.layers();
    const std::size_t lv = c.levels_per_axis();

    std::map<GridVector, double> pool;
    std::vector<PoolEntry> seed_entries;
    seed_entries.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        GridVector v(layers);
        for (std::size_t k = 0; k < layers; ++k) {
            const PairSymbol s = cs.sets[k][seeds[i][k]];
            v[k] = static_cast<std::uint8_t>(s.first * lv + s.second);
        }
        const double metric = grid_metric(model, v, c);
        if (pool.emplace(v, metric).second) seed_entries.push_back({std::move(v), metric});
    }
    std::sort(seed_entries.begin(), seed_entries.end(), better);
    const PoolEntry best_seed = seed_entries.front();

    const std::size_t n_samplers = std::min(cfg.n_samplers, seed_entries.size());
    std::vector<std::uint64_t> substreams(n_samplers);
    for (auto& s : substreams) s = rng();

    std::size_t visited = 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t s = 0; s < n_samplers; ++s) {
        Rng sub(substreams[s]);
        GridVector state = seed_entries[s].vec;
        std::vector<std::array<double, 2>> u(layers);
        for (std::size_t k = 0; k < layers; ++k) u[k] = grid_value(state[k], c);
        for (int sweep = 0; sweep < cfg.n_sweeps; ++sweep) {
            for (std::size_t k = 0; k < layers; ++k) {
                const auto p = conditional_distribution(model, u, k, c, n0, cfg.temperature);
                const double draw = unif(sub);
                double acc = 0.0;
                std::size_t pick = p.size() - 1;
                for (std::size_t g = 0; g < p.size(); ++g) {
                    acc += p[g];
                    if (draw < acc) {
                        pick = g;
                        break;
                    }
                }
                state[k] = static_cast<std::uint8_t>(pick);
                u[k] = grid_value(pick, c);
                ++visited;
                if (!pool.contains(state)) pool.emplace(state, block_metric(model, u));
            }
        }
    }

    std::vector<PoolEntry> entries;
    entries.reserve(pool.size());
    for (auto& [v, m] : pool) entries.push_back({v, m});
    std::sort(entries.begin(), entries.end(), better);
    if (entries.size() > cfg.pool_cap) {
        entries.resize(cfg.pool_cap);
        const bool kept = std::any_of(entries.begin(), entries.end(), [&](const PoolEntry& e) { return e.vec == best_seed.vec; });
        if (!kept) entries.back() = best_seed;
    }

    // per-layer alphabets: seed symbols in their original rank order, then new ones by grid index
    RefinedCandidates out;
    out.visited = visited;
    out.set.layout = cs.layout;
    out.set.sets.resize(layers);
    std::vector<std::vector<int>> rank_of(layers, std::vector<int>(lv * lv, -1));
    for (std::size_t k = 0; k < layers; ++k) {
        std::vector<bool> used(lv * lv, false);
        for (const auto& e : entries) used[e.vec[k]] = true;
        for (const PairSymbol& s : cs.sets[k]) {
            const std::size_t g = s.first * lv + s.second;
            if (used[g] && rank_of[k][g] < 0) {
                rank_of[k][g] = static_cast<int>(out.set.sets[k].size());
                out.set.sets[k].push_back(s);
            }
        }
        for (std::size_t g = 0; g < lv * lv; ++g)
            if (used[g] && rank_of[k][g] < 0) {
                rank_of[k][g] = static_cast<int>(out.set.sets[k].size());
                out.set.sets[k].push_back({static_cast<std::uint8_t>(g / lv), static_cast<std::uint8_t>(g % lv)});
            }
    }
    std::vector<std::vector<std::uint8_t>> ranked;
    ranked.reserve(entries.size());
    for (const auto& e : entries) {
        std::vector<std::uint8_t> r(layers);
        for (std::size_t k = 0; k < layers; ++k) r[k] = static_cast<std::uint8_t>(rank_of[k][e.vec[k]]);
        ranked.push_back(std::move(r));
    }
    std::sort(ranked.begin(), ranked.end());
    out.list = CandidateList(layers);
    for (const auto& r : ranked) out.list.push_back(r);
    out.list.enumerated = seeds.enumerated;
    return out;
}

}  // namespace rcsmld
