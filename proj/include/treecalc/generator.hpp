#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "treecalc/axioms.hpp"
#include "treecalc/dataset.hpp"
#include "treecalc/expr.hpp"
#include "treecalc/oracle.hpp"
#include "treecalc/rng.hpp"

namespace treecalc {

// --- grammar sampling --------------------------------------------------------

namespace grammar {

inline const std::vector<std::string>& leaf_symbols() {
    static const std::vector<std::string> syms = {"x", "y",  "z", "w", "-1", "0",
                                                  "1", "2",  "3", "4", "pi"};
    return syms;
}

inline const std::vector<std::string>& unary_ops() {
    static const std::vector<std::string> ops = {"sqrt", "sin", "cos", "tan", "sec", "csc"};
    return ops;
}

inline const std::vector<std::string>& binary_ops() {
    static const std::vector<std::string> ops = {"+", "*", "pow"};
    return ops;
}

// Random expression of depth <= max_depth (>= 1). Leaf probability rises as
// the budget shrinks so sampled trees stay small-ish.
inline ExprPtr sample(Rng& rng, int max_depth) {
    if (max_depth <= 1 || rng.bernoulli(0.30)) {
        const auto& ls = leaf_symbols();
        return leaf(ls[rng.next_below(ls.size())]);
    }
    if (rng.bernoulli(0.35)) {
        const auto& ops = unary_ops();
        return make_expr(ops[rng.next_below(ops.size())], {sample(rng, max_depth - 1)});
    }
    const auto& ops = binary_ops();
    return make_expr(ops[rng.next_below(ops.size())],
                     {sample(rng, max_depth - 1), sample(rng, max_depth - 1)});
}

// All subtrees of depth exactly 1 (leaves) or depth <= 2. Anything deeper is
// sampled rather than enumerated.
inline std::vector<ExprPtr> enumerate_up_to_depth2() {
    std::vector<ExprPtr> out;
    for (const std::string& s : leaf_symbols()) out.push_back(leaf(s));
    for (const std::string& op : unary_ops())
        for (const std::string& a : leaf_symbols()) out.push_back(make_expr(op, {leaf(a)}));
    for (const std::string& op : binary_ops())
        for (const std::string& a : leaf_symbols())
            for (const std::string& b : leaf_symbols())
                out.push_back(make_expr(op, {leaf(a), leaf(b)}));
    return out;
}

}  // namespace grammar

// --- local mutations ----------------------------------------------------------

enum class MutationKind { replace_subtree, swap_siblings, perturb_number, identity_wrap };

namespace detail {

inline std::vector<int> matching_indices(const ExprPtr& eq,
                                         const std::function<bool(const ExprPtr&)>& pred) {
    std::vector<ExprPtr> nodes;
    collect_nodes(eq, nodes);
    std::vector<int> idx;
    for (std::size_t i = 1; i < nodes.size(); ++i)  // skip the eq root
        if (pred(nodes[i])) idx.push_back(static_cast<int>(i));
    return idx;
}

// true when the subtree is provably nonnegative at the oracle's sample points
inline bool nonnegative_on_window(const ExprPtr& e) {
    std::vector<std::string> vars;
    collect_variables(e, vars);
    int valid = 0;
    for (int t = 0; t < 16; ++t) {
        std::map<std::string, double> assignment;
        for (const std::string& v : vars) assignment[v] = oracle_point(v, t);
        EvalResult r = numeric_eval(e, assignment);
        if (!r) continue;
        ++valid;
        if (*r < -1e-12) return false;
    }
    return valid > 0;
}

}  // namespace detail

// Applies one local random change; returns nullptr when the chosen kind has no
// applicable site in this equation.
inline ExprPtr apply_mutation(const ExprPtr& eq, MutationKind kind, Rng& rng) {
    std::vector<ExprPtr> nodes;
    collect_nodes(eq, nodes);
    int n_nodes = static_cast<int>(nodes.size());
    if (n_nodes <= 1) return nullptr;

    switch (kind) {
        case MutationKind::replace_subtree: {
            int target = 1 + static_cast<int>(rng.next_below(
                                 static_cast<std::uint64_t>(n_nodes - 1)));
            ExprPtr sub = grammar::sample(rng, 1 + static_cast<int>(rng.next_below(3)));
            return replace_node(eq, target, sub);
        }
        case MutationKind::swap_siblings: {
            std::vector<int> sites = detail::matching_indices(
                eq, [](const ExprPtr& e) { return e->symbol == "+" || e->symbol == "*"; });
            if (sites.empty()) return nullptr;
            int target = sites[rng.next_below(sites.size())];
            std::vector<ExprPtr> all;
            collect_nodes(eq, all);
            const ExprPtr& site = all[static_cast<std::size_t>(target)];
            ExprPtr swapped = make_expr(site->symbol, {site->children[1], site->children[0]});
            return replace_node(eq, target, swapped);
        }
        case MutationKind::perturb_number: {
            std::vector<int> sites = detail::matching_indices(
                eq, [](const ExprPtr& e) { return e->kind == SymKind::number; });
            if (sites.empty()) return nullptr;
            int target = sites[rng.next_below(sites.size())];
            std::vector<ExprPtr> all;
            collect_nodes(eq, all);
            const std::string& old = all[static_cast<std::size_t>(target)]->symbol;
            static const std::vector<std::string> numbers = {"-1", "0", "1", "2", "3", "4"};
            std::string repl = old;
            while (repl == old) repl = numbers[rng.next_below(numbers.size())];
            return replace_node(eq, target, leaf(repl));
        }
        case MutationKind::identity_wrap: {
            int target = 1 + static_cast<int>(rng.next_below(
                                 static_cast<std::uint64_t>(n_nodes - 1)));
            const ExprPtr& u = nodes[static_cast<std::size_t>(target)];
            int pattern = static_cast<int>(rng.next_below(4));
            // sqrt(u^2) = u only holds for nonnegative u; fall back when the guard fails
            if (pattern == 3 && !detail::nonnegative_on_window(u)) pattern = static_cast<int>(rng.next_below(3));
            ExprPtr wrapped;
            switch (pattern) {
                case 0: wrapped = make_expr("*", {u, leaf("1")}); break;
                case 1: wrapped = make_expr("+", {u, leaf("0")}); break;
                case 2: wrapped = make_expr("pow", {u, leaf("1")}); break;
                default: wrapped = make_expr("sqrt", {make_expr("pow", {u, leaf("2")})}); break;
            }
            return replace_node(eq, target, wrapped);
        }
    }
    return nullptr;
}

// --- dataset generation --------------------------------------------------------

struct GenConfig {
    int n_target = 1000;
    int min_depth = 1;
    int max_depth = 13;     // emission window; the identity pool always caps at 13
    int oracle_trials = 16;
    double oracle_tol = 1e-6;
    long long budget_factor = 80;  // iteration budget = budget_factor * n_target
    int min_per_depth = 12;        // depths thinner than this are dropped
};

struct DepthStats {
    int correct = 0;
    int incorrect = 0;
    int total() const { return correct + incorrect; }
    double cc() const { return total() ? static_cast<double>(correct) / total() : 0.0; }
};

struct GenResult {
    std::vector<LabeledEquation> items;
    std::map<int, DepthStats> per_depth;
    bool reached_target = true;
    long long iterations = 0;
};

namespace detail {

// Per-depth class balancer: emits items only while |#Correct - #Incorrect| <= 1
// at that depth, parking the over-represented class until a counterpart shows
// up. Keeps the correct-class fraction pinned near one half at every depth.
class ClassBalancer {
public:
    explicit ClassBalancer(int pending_cap) : cap_(pending_cap) {}

    void offer(std::vector<LabeledEquation>& out, std::map<int, DepthStats>& stats,
               LabeledEquation item) {
        int d = item.equation_depth;
        DepthStats& s = stats[d];
        bool ok = item.label == Label::Correct ? s.correct <= s.incorrect
                                               : s.incorrect <= s.correct;
        if (ok) {
            emit(out, s, std::move(item));
            drain(out, stats, d);
        } else {
            auto& queue = item.label == Label::Correct ? pending_correct_[d] : pending_incorrect_[d];
            if (static_cast<int>(queue.size()) < cap_) queue.push_back(std::move(item));
        }
    }

private:
    int cap_;
    std::map<int, std::vector<LabeledEquation>> pending_correct_;
    std::map<int, std::vector<LabeledEquation>> pending_incorrect_;

    static void emit(std::vector<LabeledEquation>& out, DepthStats& s, LabeledEquation item) {
        (item.label == Label::Correct ? s.correct : s.incorrect) += 1;
        out.push_back(std::move(item));
    }

    void drain(std::vector<LabeledEquation>& out, std::map<int, DepthStats>& stats, int d) {
        DepthStats& s = stats[d];
        bool progressed = true;
        while (progressed) {
            progressed = false;
            if (s.correct <= s.incorrect && !pending_correct_[d].empty()) {
                emit(out, s, std::move(pending_correct_[d].front()));
                pending_correct_[d].erase(pending_correct_[d].begin());
                progressed = true;
            } else if (s.incorrect <= s.correct && !pending_incorrect_[d].empty()) {
                emit(out, s, std::move(pending_incorrect_[d].front()));
                pending_incorrect_[d].erase(pending_incorrect_[d].begin());
                progressed = true;
            }
        }
    }
};

}  // namespace detail

// Grows a labeled dataset by local random changes to known identities. New
// Correct results join the identity pool (so depth climbs over iterations);
// both classes are emitted, Undecided verdicts are discarded.
inline GenResult generate_dataset(const std::vector<ExprPtr>& axioms, const GenConfig& cfg,
                                  std::uint64_t seed) {
    if (axioms.empty()) throw ParseError("generate_dataset: empty axiom list");
    for (const ExprPtr& ax : axioms)
        if (label_identity(ax, cfg.oracle_trials, cfg.oracle_tol) != OracleVerdict::Correct)
            throw ParseError("axiom does not label Correct under the oracle: " + print_expr(ax));

    Rng rng = make_stream(seed, "data");

    // identity pool, bucketed by depth for weighted base selection
    std::vector<ExprPtr> pool;
    std::vector<std::vector<int>> buckets(14);  // depth 1..13
    std::unordered_set<std::string> seen_pool, seen_emitted;
    auto pool_add = [&](const ExprPtr& e) {
        std::string key = print_expr(e);
        if (!seen_pool.insert(key).second) return;
        int d = depth(e);
        if (d > 13) return;
        pool.push_back(e);
        buckets[static_cast<std::size_t>(d)].push_back(static_cast<int>(pool.size()) - 1);
    };
    for (const ExprPtr& ax : axioms) pool_add(ax);

    auto pick_base = [&]() -> ExprPtr {
        // weight each depth bucket by (depth + 1) so the pool drifts deeper
        std::uint64_t total = 0;
        for (std::size_t d = 1; d < buckets.size(); ++d)
            total += buckets[d].size() * (d + 1);
        std::uint64_t r = rng.next_below(total);
        for (std::size_t d = 1; d < buckets.size(); ++d) {
            std::uint64_t w = buckets[d].size() * (d + 1);
            if (r < w)
                return pool[static_cast<std::size_t>(
                    buckets[d][static_cast<std::size_t>(r / (d + 1))])];
            r -= w;
        }
        return pool.back();
    };

    GenResult res;
    detail::ClassBalancer balancer(4096);
    long long budget = cfg.budget_factor * cfg.n_target;

    auto effective_count = [&]() {
        long long n = 0;
        for (const auto& [d, s] : res.per_depth)
            if (s.total() >= cfg.min_per_depth) n += s.total();
        return n;
    };

    static const MutationKind kinds[] = {MutationKind::replace_subtree,
                                         MutationKind::swap_siblings,
                                         MutationKind::perturb_number,
                                         MutationKind::identity_wrap};
    static const double kind_weights[] = {0.35, 0.15, 0.20, 0.30};

    for (res.iterations = 0; res.iterations < budget; ++res.iterations) {
        if (static_cast<long long>(res.items.size()) >= cfg.n_target &&
            effective_count() >= cfg.n_target)
            break;

        ExprPtr base = pick_base();
        double r = rng.next_double();
        MutationKind kind = kinds[3];
        for (int k = 0; k < 4; ++k) {
            if (r < kind_weights[k]) {
                kind = kinds[k];
                break;
            }
            r -= kind_weights[k];
        }
        ExprPtr mutated = apply_mutation(base, kind, rng);
        if (!mutated) continue;
        int d = depth(mutated);
        if (d > 13) continue;

        OracleVerdict verdict = label_identity(mutated, cfg.oracle_trials, cfg.oracle_tol);
        if (verdict == OracleVerdict::Undecided) continue;
        if (verdict == OracleVerdict::Correct) pool_add(mutated);

        if (d < cfg.min_depth || d > cfg.max_depth) continue;
        std::string key = print_expr(mutated);
        if (!seen_emitted.insert(key).second) continue;

        LabeledEquation item{mutated,
                             verdict == OracleVerdict::Correct ? Label::Correct : Label::Incorrect,
                             d};
        balancer.offer(res.items, res.per_depth, std::move(item));
    }

    // drop depths too thin to balance
    std::vector<LabeledEquation> kept;
    kept.reserve(res.items.size());
    for (LabeledEquation& item : res.items)
        if (res.per_depth[item.equation_depth].total() >= cfg.min_per_depth)
            kept.push_back(std::move(item));
    for (auto it = res.per_depth.begin(); it != res.per_depth.end();)
        it = it->second.total() < cfg.min_per_depth ? res.per_depth.erase(it) : std::next(it);
    res.items = std::move(kept);

    // trim overshoot in C/I pairs from the most populated depth
    while (static_cast<long long>(res.items.size()) > cfg.n_target) {
        int fat = -1;
        for (const auto& [d, s] : res.per_depth)
            if (fat < 0 || s.total() > res.per_depth[fat].total()) fat = d;
        if (fat < 0 || res.per_depth[fat].total() < cfg.min_per_depth + 2) break;
        bool dropped_c = false, dropped_i = false;
        for (int i = static_cast<int>(res.items.size()) - 1; i >= 0 && !(dropped_c && dropped_i);
             --i) {
            const LabeledEquation& item = res.items[static_cast<std::size_t>(i)];
            if (item.equation_depth != fat) continue;
            bool is_c = item.label == Label::Correct;
            if ((is_c && dropped_c) || (!is_c && dropped_i)) continue;
            (is_c ? dropped_c : dropped_i) = true;
            (is_c ? res.per_depth[fat].correct : res.per_depth[fat].incorrect) -= 1;
            res.items.erase(res.items.begin() + i);
        }
        if (!(dropped_c || dropped_i)) break;
    }

    res.reached_target = static_cast<long long>(res.items.size()) >= cfg.n_target - 1;
    return res;
}

// Splits per the depth rule: depths 1-7 go to train/valid (seeded holdout),
// depths 8-13 go to test.
struct SplitDatasets {
    std::vector<LabeledEquation> train, valid, test;
};

inline SplitDatasets split_by_depth(const std::vector<LabeledEquation>& items,
                                    double valid_fraction, std::uint64_t seed) {
    SplitDatasets out;
    Rng rng = make_stream(seed, "split");
    for (const LabeledEquation& item : items) {
        if (item.equation_depth >= 8)
            out.test.push_back(item);
        else if (rng.next_double() < valid_fraction)
            out.valid.push_back(item);
        else
            out.train.push_back(item);
    }
    return out;
}

// --- equation completion instances ---------------------------------------------

struct CompletionInstance {
    ExprPtr equation;               // the source equation (label Correct)
    int blank_node = -1;            // preorder index of the blanked subtree
    ExprPtr blanked_subtree;        // original subtree at that node
    std::vector<ExprPtr> candidates;
    std::vector<int> gold;          // indices into candidates
};

// Blanks one node and builds the candidate/gold sets. `blank_subtree_depth`
// restricts which node gets blanked (0 = any node); candidates come from the
// grammar at depths 1..max_depth, capped by random subsampling, and always
// include the original subtree.
inline CompletionInstance completion_candidates(const LabeledEquation& eq, std::uint64_t seed,
                                                int max_depth, int cap,
                                                int blank_subtree_depth = 0) {
    if (eq.label != Label::Correct)
        throw ParseError("completion_candidates requires a Correct equation");
    Rng rng = make_stream(seed, "blanks");

    std::vector<ExprPtr> nodes;
    collect_nodes(eq.expr, nodes);
    std::vector<int> eligible;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (blank_subtree_depth > 0 && subtree_depth(nodes[i]) != blank_subtree_depth) continue;
        eligible.push_back(static_cast<int>(i));
    }
    if (eligible.empty())
        for (std::size_t i = 1; i < nodes.size(); ++i) eligible.push_back(static_cast<int>(i));

    CompletionInstance inst;
    inst.equation = eq.expr;
    inst.blank_node = eligible[rng.next_below(eligible.size())];
    inst.blanked_subtree = nodes[static_cast<std::size_t>(inst.blank_node)];

    // candidate pool
    std::vector<ExprPtr> pool;
    std::unordered_set<std::string> seen;
    auto add = [&](const ExprPtr& c) {
        if (static_cast<int>(pool.size()) >= cap) return;
        if (seen.insert(print_expr(c)).second) pool.push_back(c);
    };
    add(inst.blanked_subtree);  // original is always a candidate
    if (max_depth <= 2) {
        std::vector<ExprPtr> all = grammar::enumerate_up_to_depth2();
        if (max_depth == 1) {
            all.clear();
            for (const std::string& s : grammar::leaf_symbols()) all.push_back(leaf(s));
        }
        // seeded partial shuffle, then take a prefix
        for (std::size_t i = 0; i + 1 < all.size(); ++i) {
            std::size_t j = i + rng.next_below(all.size() - i);
            std::swap(all[i], all[j]);
        }
        for (const ExprPtr& c : all) add(c);
    } else {
        long long attempts = 0;
        while (static_cast<int>(pool.size()) < cap && attempts < 50LL * cap) {
            ++attempts;
            add(grammar::sample(rng, 1 + static_cast<int>(rng.next_below(
                                         static_cast<std::uint64_t>(max_depth)))));
        }
    }
    inst.candidates = std::move(pool);

    // gold = candidates whose substitution is Correct; the original always is
    for (std::size_t c = 0; c < inst.candidates.size(); ++c) {
        if (expr_equal(inst.candidates[c], inst.blanked_subtree)) {
            inst.gold.push_back(static_cast<int>(c));
            continue;
        }
        ExprPtr filled = replace_node(eq.expr, inst.blank_node, inst.candidates[c]);
        if (label_identity(filled) == OracleVerdict::Correct)
            inst.gold.push_back(static_cast<int>(c));
    }
    return inst;
}

}  // namespace treecalc
