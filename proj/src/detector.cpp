#include "rcsmld/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rcsmld/mmse_spic.hpp"

namespace rcsmld {

void DetectorConfig::validate() const {
    if (m_vector.empty()) throw std::invalid_argument("m_vector: must not be empty");
    for (std::size_t k = 0; k < m_vector.size(); ++k) {
        if (m_vector[k] < 1) throw std::invalid_argument("m_vector: entries must be >= 1");
        if (k > 0 && m_vector[k] > m_vector[k - 1]) throw std::invalid_argument("m_vector: must be non-increasing");
    }
    if (n_iter < 1) throw std::invalid_argument("n_iter: must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha: must lie in [0, 1]");
    if (!(sigma_ce_sq >= 0.0)) throw std::invalid_argument("sigma_ce_sq: must be non-negative");
    if (!(llr_clip > 0.0)) throw std::invalid_argument("llr_clip: must be positive");
    if (!(prior_clip > 0.0)) throw std::invalid_argument("prior_clip: must be positive");
    if (mcmc) {
        GibbsConfig g = gibbs;
        if (gibbs_match_budget) g.pool_cap = std::max(g.pool_cap, g.n_samplers);
        g.validate();
    }
}

CandidateLlrs score_llrs(std::span<const double> scores, std::span<const std::uint32_t> bitwords, std::size_t n_bits,
                         double llr_clip) {
    if (scores.size() != bitwords.size()) throw std::invalid_argument("score_llrs: scores and bit words differ in length");
    if (scores.empty()) throw std::invalid_argument("score_llrs: need at least one candidate");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best0(n_bits, inf), best1(n_bits, inf);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = scores[i];
        const std::uint32_t w = bitwords[i];
        for (std::size_t b = 0; b < n_bits; ++b) {
            double& slot = (w >> b) & 1u ? best1[b] : best0[b];
            if (s < slot) slot = s;
        }
    }
    CandidateLlrs out;
    out.llrs.resize(n_bits);
    out.missing.assign(n_bits, 0);
    for (std::size_t b = 0; b < n_bits; ++b) {
        if (best0[b] == inf || best1[b] == inf) {
            out.missing[b] = 1;
            out.llrs[b] = best1[b] == inf ? -llr_clip : llr_clip;
        } else {
            out.llrs[b] = best0[b] - best1[b];
        }
    }
    return out;
}

CandidateLlrs candidate_llrs(std::span<const double> metrics, std::span<const std::uint32_t> bitwords,
                             std::size_t n_bits, double n0, double llr_clip) {
    if (!(n0 > 0.0)) throw std::invalid_argument("candidate_llrs: N0 must be positive");
    std::vector<double> scores(metrics.size());
    for (std::size_t i = 0; i < metrics.size(); ++i) scores[i] = 2.0 * metrics[i] / n0;
    return score_llrs(scores, bitwords, n_bits, llr_clip);
}

std::vector<double> combine(std::span<const double> l_rcsmld, std::span<const double> l_spic, double alpha,
                            std::span<const std::uint8_t> missing, double llr_clip) {
    if (l_rcsmld.size() != l_spic.size() || missing.size() != l_spic.size())
        throw std::invalid_argument("combine: LLR vectors differ in length");
    std::vector<double> out(l_spic.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = missing[i] ? l_spic[i] : alpha * l_rcsmld[i] + (1.0 - alpha) * l_spic[i];
        out[i] = std::clamp(v, -llr_clip, llr_clip);
    }
    return out;
}

namespace {

// N_R log(d/N0) + (2 mu + ||y||^2)/d - ||y||^2/N0 with d = N0 + ||x||^2 sigma^2;
// differs from the printed score by the constant N_R log N0 + ||y||^2/N0.
std::vector<double> ce_aware_scores(std::span<const double> metrics, std::span<const double> energies, double y_norm2,
                                    double n0, double sigma_ce_sq, std::size_t n_r) {
    std::vector<double> out(metrics.size());
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const double es = energies[i] * sigma_ce_sq;
        const double d = n0 + es;
        out[i] = static_cast<double>(n_r) * std::log1p(es / n0) + 2.0 * metrics[i] / d - y_norm2 * es / (d * n0);
    }
    return out;
}

}  // namespace

DetectionResult detect(std::span<const cdouble> y, const CMatrix& h_est, double n0, const Constellation& c,
                       const DetectorConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t nl = h_est.cols();
    const std::size_t n_bits = nl * static_cast<std::size_t>(c.bits_per_symbol());
    if (cfg.m_vector.size() != nl) throw std::invalid_argument("m_vector: length must equal the number of layers");
    if (y.size() != h_est.rows()) throw std::invalid_argument("detect: y and H dimensions differ");

    DetectionResult res;
    res.ops.mode = cfg.accounting;

    const spic::SpicState state = spic::run(y, h_est, n0, c, cfg.n_iter, cfg.prior_clip);
    res.spic_llrs = state.llrs;

    CandidateSet cs;
    BlockModel model;
    if (cfg.pairing) {
        const RealPairedModel rp = real_decompose(h_est, y, *cfg.pairing);
        const ComponentPriors priors = component_priors(c, state.prior_llrs, nl, cfg.prior_clip);
        const auto posteriors = pair_posteriors(rp, priors.means, priors.variances, n0);
        cs = build_pair_sets(rp, posteriors, c, cfg.m_vector);
        model = make_block_model(gram(rp.h), matched_filter(rp.h, rp.y), cs);
    } else {
        cs = build_sets(state, c, cfg.m_vector);
        model = make_block_model(gram(h_est), matched_filter(h_est, y), cs);
    }

    CandidateList cl = enumerate_and_reduce(cs, cfg.reduction);
    if (cfg.mcmc) {
        GibbsConfig g = cfg.gibbs;
        if (cfg.gibbs_match_budget) g.pool_cap = std::max(cl.size(), g.n_samplers);
        RefinedCandidates refined = gibbs_refine(cs, cl, model, n0, c, g, rng);
        cs = std::move(refined.set);
        cl = std::move(refined.list);
    }

    const MetricTables tables = precompute_tables(model, cs, c, res.ops);
    const std::vector<double> mu = evaluate_all(tables, cl, res.ops);
    res.candidates_evaluated = cl.size();

    const auto words = candidate_bitwords(cs, cl, c, nl);
    CandidateLlrs cand;
    if (cfg.ce_aware) {
        const auto scores = ce_aware_scores(mu, candidate_energies(cs, cl, c), squared_norm(y), n0, cfg.sigma_ce_sq,
                                            h_est.rows());
        cand = score_llrs(scores, words, n_bits, cfg.llr_clip);
    } else {
        cand = candidate_llrs(mu, words, n_bits, n0, cfg.llr_clip);
    }
    res.rcsmld_llrs = cand.llrs;
    res.llrs = combine(cand.llrs, state.llrs, cfg.alpha, cand.missing, cfg.llr_clip);
    res.missing = std::move(cand.missing);
    return res;
}

}  // namespace rcsmld
