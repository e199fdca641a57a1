#include "polyfine/counts.hpp"

#include <numeric>

namespace polyfine {

namespace {

std::vector<std::size_t> permuted_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    rng.shuffle(idx);
    return idx;
}

EpisodeDataset take(const EpisodeDataset& data, const std::vector<std::size_t>& idx, std::size_t begin,
                    std::size_t count) {
    EpisodeDataset out;
    out.behavior_tag = data.behavior_tag;
    out.seed = data.seed;
    out.episodes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.episodes.push_back(data.episodes[idx[begin + i]]);
    return out;
}

std::vector<EpisodeDataset> split_range(const EpisodeDataset& data, const std::vector<std::size_t>& idx,
                                        std::size_t begin, std::size_t n, int num_folds) {
    const std::size_t base = n / std::size_t(num_folds);
    const std::size_t rem = n % std::size_t(num_folds);
    std::vector<EpisodeDataset> folds;
    folds.reserve(std::size_t(num_folds));
    std::size_t at = begin;
    for (int f = 0; f < num_folds; ++f) {
        const std::size_t sz = base + (std::size_t(f) < rem ? 1 : 0);
        folds.push_back(take(data, idx, at, sz));
        at += sz;
    }
    return folds;
}

}  // namespace

std::vector<EpisodeDataset> split_vilcb(const EpisodeDataset& data, int num_folds, Rng& rng) {
    if (num_folds <= 0) throw InvalidParams("fold count must be positive");
    const std::vector<std::size_t> idx = permuted_indices(data.size(), rng);
    return split_range(data, idx, 0, data.size(), num_folds);
}

PeviSplit split_pevi(const EpisodeDataset& data, int num_folds, Rng& rng) {
    if (num_folds <= 0) throw InvalidParams("fold count must be positive");
    const std::size_t n = data.size();
    const std::size_t third = n / 3;
    const std::size_t ref_size = third + n % 3;  // remainder goes to the reference part
    const std::vector<std::size_t> idx = permuted_indices(n, rng);

    PeviSplit split;
    split.ref = take(data, idx, 0, ref_size);
    split.d0 = take(data, idx, ref_size, third);
    split.d1 = split_range(data, idx, ref_size + third, third, num_folds);
    return split;
}

CountsModel estimate_step(const EpisodeDataset& data, int h, int S, int A) {
    if (h < 0) throw InvalidParams("step index must be nonnegative");
    CountsModel m;
    m.h = h;
    m.S = S;
    m.A = A;
    m.n_sa.assign(std::size_t(S) * A, 0);
    m.n_sas.assign(std::size_t(S) * A * S, 0);
    m.p_hat.assign(std::size_t(S) * A * S, 0.0);
    m.r_hat.assign(std::size_t(S) * A, 0.0);

    for (const Episode& ep : data.episodes) {
        const int horizon = int(ep.states.size());
        if (h >= horizon) throw ShapeMismatch("step index exceeds episode horizon");
        const int s = ep.states[h];
        const int a = ep.actions[h];
        if (s < 0 || s >= S || a < 0 || a >= A) throw ShapeMismatch("episode indices out of range for (S,A)");
        const std::size_t sa = std::size_t(s) * A + a;
        m.n_sa[sa] += 1;
        m.r_hat[sa] = ep.rewards[h];  // deterministic rewards, any visit pins it
        if (h + 1 < horizon) {
            const int s2 = ep.states[h + 1];
            if (s2 < 0 || s2 >= S) throw ShapeMismatch("episode successor state out of range");
            m.n_sas[sa * S + s2] += 1;
        }
    }
    for (std::size_t sa = 0; sa < m.n_sa.size(); ++sa) {
        const long long n = m.n_sa[sa];
        if (n <= 0) continue;
        for (int s2 = 0; s2 < S; ++s2) m.p_hat[sa * S + s2] = double(m.n_sas[sa * S + s2]) / double(n);
    }
    return m;
}

std::vector<double> apply_phat(const CountsModel& model, const std::vector<double>& v_next) {
    if (v_next.size() != std::size_t(model.S)) throw ShapeMismatch("value vector length does not match S");
    std::vector<double> out(std::size_t(model.S) * model.A, 0.0);
    for (std::size_t sa = 0; sa < out.size(); ++sa) {
        if (model.n_sa[sa] <= 0) continue;
        double acc = 0.0;
        for (int s2 = 0; s2 < model.S; ++s2) acc += model.p_hat[sa * model.S + s2] * v_next[s2];
        out[sa] = acc;
    }
    return out;
}

std::vector<double> empirical_variance(const CountsModel& model, const std::vector<double>& v_next) {
    if (v_next.size() != std::size_t(model.S)) throw ShapeMismatch("value vector length does not match S");
    std::vector<double> out(std::size_t(model.S) * model.A, 0.0);
    for (std::size_t sa = 0; sa < out.size(); ++sa) {
        if (model.n_sa[sa] <= 0) continue;
        double mean = 0.0, mean_sq = 0.0;
        for (int s2 = 0; s2 < model.S; ++s2) {
            const double p = model.p_hat[sa * model.S + s2];
            if (p == 0.0) continue;
            mean += p * v_next[s2];
            mean_sq += p * v_next[s2] * v_next[s2];
        }
        const double var = mean_sq - mean * mean;
        out[sa] = var > 0.0 ? var : 0.0;
    }
    return out;
}

}  // namespace polyfine
