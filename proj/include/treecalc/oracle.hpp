#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "treecalc/expr.hpp"
#include "treecalc/rng.hpp"

namespace treecalc {

enum class Label { Correct, Incorrect };
enum class OracleVerdict { Correct, Incorrect, Undecided };

inline const char* to_string(Label l) { return l == Label::Correct ? "Correct" : "Incorrect"; }

inline Label label_from_string(const std::string& s) {
    if (s == "Correct") return Label::Correct;
    if (s == "Incorrect") return Label::Incorrect;
    throw ParseError("unknown label: " + s);
}

// Evaluation guards. A value is rejected (failure sentinel) on domain
// violations rather than propagated as NaN: negative square roots, fractional
// powers of negative bases, reciprocals of near-zero values, and overflow.
namespace eval_limits {
constexpr double near_zero = 1e-9;
constexpr double overflow = 1e9;
}  // namespace eval_limits

using EvalResult = std::optional<double>;

inline EvalResult guard(double v) {
    if (!std::isfinite(v) || std::abs(v) > eval_limits::overflow) return std::nullopt;
    return v;
}

// Recursive arithmetic over one side of an equation. `assignment` must cover
// every variable; the expression must not contain an eq node.
inline EvalResult numeric_eval(const ExprPtr& e, const std::map<std::string, double>& assignment) {
    if (e->is_eq()) throw ParseError("numeric_eval expects a single side, found '='");
    switch (e->kind) {
        case SymKind::number:
        case SymKind::constant:
            return symbol_table().at(e->symbol).value;
        case SymKind::variable: {
            auto it = assignment.find(e->symbol);
            if (it == assignment.end())
                throw ParseError("assignment missing variable: " + e->symbol);
            return it->second;
        }
        case SymKind::op:
            break;
    }

    std::vector<double> args;
    args.reserve(e->children.size());
    for (const ExprPtr& c : e->children) {
        EvalResult r = numeric_eval(c, assignment);
        if (!r) return std::nullopt;
        args.push_back(*r);
    }

    const std::string& op = e->symbol;
    if (op == "+") return guard(args[0] + args[1]);
    if (op == "*") return guard(args[0] * args[1]);
    if (op == "pow") {
        double b = args[0], ex = args[1];
        bool integral_exp = std::abs(ex - std::round(ex)) < 1e-9;
        if (b < 0.0 && !integral_exp) return std::nullopt;
        if (std::abs(b) < eval_limits::near_zero && ex < 0.0) return std::nullopt;
        return guard(std::pow(b, integral_exp ? std::round(ex) : ex));
    }
    if (op == "sqrt") {
        if (args[0] < -1e-12) return std::nullopt;
        return guard(std::sqrt(std::max(args[0], 0.0)));
    }
    if (op == "sin") return guard(std::sin(args[0]));
    if (op == "cos") return guard(std::cos(args[0]));
    if (op == "tan") {
        double c = std::cos(args[0]);
        if (std::abs(c) < eval_limits::near_zero) return std::nullopt;
        return guard(std::sin(args[0]) / c);
    }
    if (op == "sec") {
        double c = std::cos(args[0]);
        if (std::abs(c) < eval_limits::near_zero) return std::nullopt;
        return guard(1.0 / c);
    }
    if (op == "csc") {
        double s = std::sin(args[0]);
        if (std::abs(s) < eval_limits::near_zero) return std::nullopt;
        return guard(1.0 / s);
    }
    throw ParseError("numeric_eval: unhandled operator " + op);
}

// Sampling window for the identity oracle. Variables are drawn from a
// positive interval bounded away from 0 and below pi; the corpus this
// generator mirrors applies simplifications (sqrt(u^2) = u,
// sqrt(1 - sin^2 u) = cos u, branch-free angle reductions) that are sound
// exactly on such a window, so labels are defined relative to it.
namespace oracle_domain {
constexpr double lo = 0.78539816339744830962;  // pi/4
constexpr double hi = 2.0;
constexpr std::uint64_t point_seed = 0x5eedf00dcafe1234ull;
}  // namespace oracle_domain

// Deterministic sample value for (variable, trial): fixed across runs and
// call sites, so an equation receives the same verdict wherever it is tested.
inline double oracle_point(const std::string& var, int trial) {
    Rng g = make_stream(oracle_domain::point_seed +
                            0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(trial),
                        var);
    return g.uniform(oracle_domain::lo, oracle_domain::hi);
}

struct OracleReport {
    OracleVerdict verdict = OracleVerdict::Undecided;
    int valid_points = 0;
    int matches = 0;
    int hard_violations = 0;  // includes one-sided domain failures
};

// Point-sampling identity check. Both sides are evaluated at `trials`
// assignments; points where both sides fail to evaluate carry no information
// and are skipped. A point where exactly one side is defined counts as a hard
// violation: the two sides are then different functions over the window.
inline OracleReport check_identity(const ExprPtr& eq, int trials, double tol) {
    if (!eq->is_eq()) throw ParseError("label_identity expects an equation rooted at '='");
    if (trials < 8) throw ParseError("label_identity requires trials >= 8");

    std::vector<std::string> vars;
    collect_variables(eq, vars);

    OracleReport rep;
    int soft_mismatches = 0;
    for (int t = 0; t < trials; ++t) {
        std::map<std::string, double> assignment;
        for (const std::string& v : vars) assignment[v] = oracle_point(v, t);
        EvalResult lhs = numeric_eval(eq->children[0], assignment);
        EvalResult rhs = numeric_eval(eq->children[1], assignment);
        if (!lhs && !rhs) continue;
        if (!lhs || !rhs) {
            ++rep.hard_violations;
            continue;
        }
        ++rep.valid_points;
        double denom = 1.0 + std::max(std::abs(*lhs), std::abs(*rhs));
        double diff = std::abs(*lhs - *rhs);
        if (diff <= tol * denom)
            ++rep.matches;
        else if (diff > 10.0 * tol * denom)
            ++rep.hard_violations;
        else
            ++soft_mismatches;
    }

    if (rep.hard_violations > 0)
        rep.verdict = OracleVerdict::Incorrect;
    else if (rep.valid_points < 8)
        rep.verdict = OracleVerdict::Undecided;
    else if (soft_mismatches == 0)
        rep.verdict = OracleVerdict::Correct;
    else
        rep.verdict = OracleVerdict::Undecided;
    return rep;
}

inline OracleVerdict label_identity(const ExprPtr& eq, int trials = 16, double tol = 1e-6) {
    return check_identity(eq, trials, tol).verdict;
}

}  // namespace treecalc
