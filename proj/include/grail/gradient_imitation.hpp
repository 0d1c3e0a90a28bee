#pragma once

#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "grail/adamw.hpp"
#include "grail/common.hpp"
#include "grail/math.hpp"
#include "grail/parameters.hpp"

namespace grail {

template <typename M>
concept TaskModelLike = requires(M& m, const M& cm, const typename M::Example& ex,
                                 const typename M::Label& y,
                                 const std::vector<typename M::Label>& ys, GradientVector& g) {
    typename M::Example;
    typename M::Label;
    { cm.predict(ex) } -> std::same_as<typename M::Label>;
    { cm.loss(ex, y) } -> std::convertible_to<double>;
    { cm.loss_and_grad(ex, y, g) } -> std::convertible_to<double>;
    { cm.confidence(ex, y) } -> std::convertible_to<double>;
    { cm.quality(ys, ys) } -> std::same_as<Prf>;
    { m.params() } -> std::same_as<ParameterVector&>;
    { M::make_example(ex, y) } -> std::same_as<typename M::Example>;
    { M::label_of(ex) } -> std::convertible_to<const typename M::Label&>;
};

enum class GradientScope { all, head_only };

enum class GradientRefresh { episode, pretrain_only };

struct GirlConfig {
    double lambda = 0.5;                 // selection threshold on the reward
    int episode_len = 16;                // T, also the batch size
    int pretrain_epochs = 20;
    int refit_epochs = 1;
    GradientScope scope = GradientScope::all;
    GradientRefresh refresh = GradientRefresh::episode;
    // Learning rate for the reward-weighted episode steps; the supervised
    // passes keep the optimizer's own rate. 0 means "same rate".
    double rl_learning_rate = 0.0;
    double confidence_threshold = 0.9;   // pseudo-labeling baseline
    bool record_gradients = false;       // keep per-step g_p copies in the log

    void validate() const {
        if (lambda <= -1.0) throw std::invalid_argument("girl config: lambda must be > -1");
        if (episode_len < 1) throw std::invalid_argument("girl config: T must be >= 1");
        if (pretrain_epochs < 0 || refit_epochs < 0)
            throw std::invalid_argument("girl config: epochs must be >= 0");
        if (rl_learning_rate < 0.0)
            throw std::invalid_argument("girl config: rl_learning_rate must be >= 0");
        if (confidence_threshold < 0.0)
            throw std::invalid_argument("girl config: confidence threshold must be >= 0");
    }
};

struct StepRecord {
    int segment = 0;
    int batch = 0;
    int t = 0;
    double loss = 0.0;
    double reward = 0.0;  // cosine reward; the baseline logs its confidence here
    bool selected = false;
    std::size_t pool_size = 0;
    // Only when record_gradients is set: the pseudo gradient and the
    // standard direction the reward was computed against.
    std::optional<std::vector<double>> g_p;
    std::optional<std::vector<double>> g_l_before;
};

struct SegmentSummary {
    int segment = 0;
    std::size_t pool_size = 0;
    std::size_t step_count = 0;
    std::size_t selected_count = 0;
    std::optional<Prf> pseudo_all;       // vs hidden gold, when available
    std::optional<Prf> pseudo_selected;
};

struct RunLog {
    std::vector<StepRecord> steps;
    std::vector<SegmentSummary> segments;
    // Parameter snapshots after pretraining and after each segment.
    std::vector<std::pair<long, std::vector<double>>> snapshots;
};

// The RL state: the labeled pool D_l and the standard gradient direction
// g_l, which the accepted pseudo samples correct incrementally.
template <TaskModelLike M>
struct RlState {
    std::vector<typename M::Example>& pool;
    GradientVector g_l;
    long step = 0;

    std::size_t pool_size() const { return pool.size(); }
};

template <TaskModelLike M>
struct PseudoSample {
    typename M::Example input;   // unlabeled input (label fields cleared)
    typename M::Label pseudo;
    double loss = 0.0;
    double reward = 0.0;
    bool selected = false;
    GradientVector g_p;
};

namespace detail {

inline void apply_scope(GradientVector& g, GradientScope scope) {
    if (scope == GradientScope::all) return;
    for (const auto& seg : g.layout().segments()) {
        if (seg.name.starts_with("encoder.")) {
            auto s = g.segment(seg.name);
            std::fill(s.begin(), s.end(), 0.0);
        }
    }
}

}  // namespace detail

// One full pass = shuffled mini-batches of `batch_size`, mean loss per
// batch, one optimizer step per batch.
template <TaskModelLike M>
void supervised_pretrain(M& model, const std::vector<typename M::Example>& pool, int epochs,
                         OptimizerState& opt, int batch_size, Rng& rng) {
    if (pool.empty()) throw std::invalid_argument("supervised_pretrain: empty labeled pool");
    if (epochs < 0) throw std::invalid_argument("supervised_pretrain: negative epochs");
    if (batch_size < 1) throw std::invalid_argument("supervised_pretrain: batch size must be >= 1");

    std::vector<std::size_t> order(pool.size());
    GradientVector grad(model.params().layout_ptr());
    for (int e = 0; e < epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (auto [lo, hi] : chunk_ranges(order.size(), static_cast<std::size_t>(batch_size))) {
            grad.zero();
            for (std::size_t i = lo; i < hi; ++i) {
                const auto& ex = pool[order[i]];
                model.loss_and_grad(ex, M::label_of(ex), grad);
            }
            grad.scale(1.0 / static_cast<double>(hi - lo));
            optimizer_step(model.params(), grad, opt);
        }
    }
}

// g_l = gradient of the mean labeled loss = mean of per-example gradients.
template <TaskModelLike M>
GradientVector compute_standard_gradient(const M& model,
                                         const std::vector<typename M::Example>& pool,
                                         GradientScope scope = GradientScope::all) {
    if (pool.empty())
        throw std::invalid_argument("compute_standard_gradient: empty labeled pool");
    GradientVector g(model.params().layout_ptr());
    for (const auto& ex : pool) model.loss_and_grad(ex, M::label_of(ex), g);
    g.scale(1.0 / static_cast<double>(pool.size()));
    g.check_finite("standard gradient");
    detail::apply_scope(g, scope);
    return g;
}

// The action: the model's deterministic prediction on an unlabeled input.
template <TaskModelLike M>
typename M::Label act(const M& model, const typename M::Example& unlabeled) {
    return model.predict(unlabeled);
}

// Single-sample loss gradient with the pseudo label as the target.
template <TaskModelLike M>
double pseudo_gradient(const M& model, const typename M::Example& unlabeled,
                       const typename M::Label& pseudo, GradientVector& g_p,
                       GradientScope scope = GradientScope::all) {
    g_p.zero();
    const double loss = model.loss_and_grad(unlabeled, pseudo, g_p);
    g_p.check_finite("pseudo gradient");
    detail::apply_scope(g_p, scope);
    return loss;
}

// Cosine reward. A zero-norm pseudo gradient carries no direction and gets
// reward 0 (never selected, no pull on the episode loss); a zero-norm
// standard gradient leaves the reward undefined and is an error.
inline double reward(const GradientVector& g_l, const GradientVector& g_p) {
    if (g_l.norm() == 0.0)
        throw DegenerateGradientError("reward: standard gradient has zero norm");
    if (g_p.norm() == 0.0) return 0.0;
    return cosine_similarity(g_l, g_p);
}

// Reward gate: strictly above lambda appends the pseudo sample to the pool
// and corrects g_l as a running mean over N+1 vectors.
template <TaskModelLike M>
bool select_and_update(RlState<M>& state, const PseudoSample<M>& sample, double lambda) {
    if (!(sample.reward > lambda)) return false;
    const std::size_t n = state.pool.size();
    state.g_l = running_mean_update(state.g_l, sample.g_p, n);
    state.pool.push_back(M::make_example(sample.input, sample.pseudo));
    return true;
}

// One episode over a batch of unlabeled inputs: act, compute the pseudo
// gradient and its reward against the current g_l, gate the pool update,
// and accumulate the reward-weighted gradient; a single optimizer step
// applies the batch. Rewards at step t see the state as updated by all
// prior steps.
template <TaskModelLike M>
void rl_episode(M& model, RlState<M>& state,
                const std::vector<const typename M::Example*>& batch, OptimizerState& opt,
                const GirlConfig& cfg, RunLog& log, int segment, int batch_index,
                std::vector<typename M::Label>* pseudo_out = nullptr,
                std::vector<bool>* selected_out = nullptr) {
    if (batch.empty()) throw std::invalid_argument("rl_episode: empty batch");
    GradientVector accumulated(model.params().layout_ptr());
    GradientVector g_p(model.params().layout_ptr());
    int t = 0;
    for (const auto* unlabeled : batch) {
        ++t;
        ++state.step;
        PseudoSample<M> sample{*unlabeled, act(model, *unlabeled), 0.0, 0.0, false,
                               GradientVector(model.params().layout_ptr())};
        sample.loss = pseudo_gradient(model, *unlabeled, sample.pseudo, g_p, cfg.scope);
        sample.reward = reward(state.g_l, g_p);
        sample.g_p = g_p;
        accumulated.axpy(sample.reward, g_p);

        StepRecord rec{segment, batch_index, t, sample.loss, sample.reward, false, 0};
        if (cfg.record_gradients) {
            rec.g_p = g_p.values();
            rec.g_l_before = state.g_l.values();
        }
        sample.selected = select_and_update(state, sample, cfg.lambda);
        rec.selected = sample.selected;
        rec.pool_size = state.pool.size();
        log.steps.push_back(std::move(rec));
        if (pseudo_out) pseudo_out->push_back(std::move(sample.pseudo));
        if (selected_out) selected_out->push_back(sample.selected);
    }
    optimizer_step(model.params(), accumulated, opt);
}

namespace detail {

// Per-segment quality audit. The hidden gold labels are consulted here and
// nowhere else.
template <TaskModelLike M>
SegmentSummary summarize_segment(const M& model, int segment, std::size_t pool_size,
                                 const std::vector<typename M::Label>& seg_pseudo,
                                 const std::vector<bool>& seg_selected,
                                 const std::vector<int>& seg_indices,
                                 const std::vector<typename M::Label>* hidden_gold) {
    SegmentSummary summary;
    summary.segment = segment;
    summary.pool_size = pool_size;
    summary.step_count = seg_pseudo.size();
    for (bool sel : seg_selected) summary.selected_count += sel ? 1 : 0;
    if (hidden_gold) {
        std::vector<typename M::Label> gold_all, gold_sel, pseudo_sel;
        for (std::size_t i = 0; i < seg_indices.size(); ++i) {
            gold_all.push_back(hidden_gold->at(static_cast<std::size_t>(seg_indices[i])));
            if (seg_selected[i]) {
                gold_sel.push_back(gold_all.back());
                pseudo_sel.push_back(seg_pseudo[i]);
            }
        }
        summary.pseudo_all = model.quality(seg_pseudo, gold_all);
        summary.pseudo_selected = model.quality(pseudo_sel, gold_sel);
    }
    return summary;
}

}  // namespace detail

// Full training run: supervised pretraining, then per unlabeled segment a
// sequence of episodes followed by supervised refit passes on the expanded
// pool. `hidden_gold`, when given, is consulted only for the per-segment
// quality summaries, never by the training path.
template <TaskModelLike M>
RunLog train_gradient_imitation(M& model, std::vector<typename M::Example>& pool,
                                const std::vector<typename M::Example>& unlabeled,
                                const std::vector<std::vector<int>>& segments,
                                const GirlConfig& cfg, OptimizerState& opt, Rng& rng,
                                const std::vector<typename M::Label>* hidden_gold = nullptr) {
    cfg.validate();
    if (pool.empty()) throw std::invalid_argument("train: empty labeled pool");
    if (unlabeled.empty()) throw std::invalid_argument("train: empty unlabeled set");

    RunLog log;
    supervised_pretrain(model, pool, cfg.pretrain_epochs, opt, cfg.episode_len, rng);
    log.snapshots.emplace_back(0, model.params().values());

    // The reward-weighted episode loss gets its own optimizer when a
    // separate rate is configured.
    AdamwConfig rl_cfg = opt.config;
    if (cfg.rl_learning_rate > 0.0) rl_cfg.learning_rate = cfg.rl_learning_rate;
    OptimizerState rl_opt(model.params().size(), rl_cfg);
    OptimizerState& episode_opt = cfg.rl_learning_rate > 0.0 ? rl_opt : opt;

    RlState<M> state{pool, compute_standard_gradient(model, pool, cfg.scope), 0};
    for (std::size_t s = 0; s < segments.size(); ++s) {
        std::vector<typename M::Label> seg_pseudo;
        std::vector<bool> seg_selected;
        std::vector<int> seg_indices;
        int batch_index = 0;
        for (auto [lo, hi] :
             chunk_ranges(segments[s].size(), static_cast<std::size_t>(cfg.episode_len))) {
            if (cfg.refresh == GradientRefresh::episode)
                state.g_l = compute_standard_gradient(model, pool, cfg.scope);
            std::vector<const typename M::Example*> batch;
            for (std::size_t i = lo; i < hi; ++i) {
                const int idx = segments[s][i];
                batch.push_back(&unlabeled.at(static_cast<std::size_t>(idx)));
                seg_indices.push_back(idx);
            }
            rl_episode(model, state, batch, episode_opt, cfg, log, static_cast<int>(s),
                       batch_index, &seg_pseudo, &seg_selected);
            ++batch_index;
        }
        supervised_pretrain(model, pool, cfg.refit_epochs, opt, cfg.episode_len, rng);
        log.segments.push_back(detail::summarize_segment(model, static_cast<int>(s),
                                                         pool.size(), seg_pseudo, seg_selected,
                                                         seg_indices, hidden_gold));
        log.snapshots.emplace_back(static_cast<long>(s) + 1, model.params().values());
    }
    return log;
}

// Ablation baseline: identical segment/batch schedule, but selection uses
// the model confidence and the accepted samples feed a plain supervised
// step (no reward weighting).
template <TaskModelLike M>
RunLog train_pseudo_labeling(M& model, std::vector<typename M::Example>& pool,
                             const std::vector<typename M::Example>& unlabeled,
                             const std::vector<std::vector<int>>& segments,
                             const GirlConfig& cfg, OptimizerState& opt, Rng& rng,
                             const std::vector<typename M::Label>* hidden_gold = nullptr) {
    cfg.validate();
    if (pool.empty()) throw std::invalid_argument("train: empty labeled pool");
    if (unlabeled.empty()) throw std::invalid_argument("train: empty unlabeled set");

    RunLog log;
    supervised_pretrain(model, pool, cfg.pretrain_epochs, opt, cfg.episode_len, rng);
    log.snapshots.emplace_back(0, model.params().values());

    GradientVector batch_grad(model.params().layout_ptr());
    GradientVector g_p(model.params().layout_ptr());
    for (std::size_t s = 0; s < segments.size(); ++s) {
        std::vector<typename M::Label> seg_pseudo;
        std::vector<bool> seg_selected;
        std::vector<int> seg_indices;
        int batch_index = 0;
        for (auto [lo, hi] :
             chunk_ranges(segments[s].size(), static_cast<std::size_t>(cfg.episode_len))) {
            batch_grad.zero();
            std::size_t accepted = 0;
            int t = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                ++t;
                const int idx = segments[s][i];
                seg_indices.push_back(idx);
                const auto& ex = unlabeled.at(static_cast<std::size_t>(idx));
                auto pseudo = act(model, ex);
                const double conf = model.confidence(ex, pseudo);
                const bool selected = conf > cfg.confidence_threshold;
                const double loss = pseudo_gradient(model, ex, pseudo, g_p, cfg.scope);
                if (selected) {
                    batch_grad.axpy(1.0, g_p);
                    ++accepted;
                    pool.push_back(M::make_example(ex, pseudo));
                }
                log.steps.push_back(
                    {static_cast<int>(s), batch_index, t, loss, conf, selected, pool.size()});
                seg_pseudo.push_back(std::move(pseudo));
                seg_selected.push_back(selected);
            }
            if (accepted > 0) {
                batch_grad.scale(1.0 / static_cast<double>(accepted));
                optimizer_step(model.params(), batch_grad, opt);
            }
            ++batch_index;
        }
        supervised_pretrain(model, pool, cfg.refit_epochs, opt, cfg.episode_len, rng);
        log.segments.push_back(detail::summarize_segment(model, static_cast<int>(s),
                                                         pool.size(), seg_pseudo, seg_selected,
                                                         seg_indices, hidden_gold));
        log.snapshots.emplace_back(static_cast<long>(s) + 1, model.params().values());
    }
    return log;
}

}  // namespace grail
