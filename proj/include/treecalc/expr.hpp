#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace treecalc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SymKind { op, variable, number, constant };

// Fixed vocabulary. Equations are built from binary eq/add/mul/pow, the unary
// trig and sqrt functions, four variables, the integers -1..4 and pi.
// Subtraction and division are not vocabulary; sources normalize them to
// (* -1 x) and (pow x -1).
struct SymbolInfo {
    SymKind kind;
    int arity;       // 0 for leaves
    double value;    // numbers/constants
};

inline const std::map<std::string, SymbolInfo>& symbol_table() {
    static const std::map<std::string, SymbolInfo> table = {
        {"=", {SymKind::op, 2, 0}},    {"+", {SymKind::op, 2, 0}},
        {"*", {SymKind::op, 2, 0}},    {"pow", {SymKind::op, 2, 0}},
        {"sqrt", {SymKind::op, 1, 0}}, {"sin", {SymKind::op, 1, 0}},
        {"cos", {SymKind::op, 1, 0}},  {"tan", {SymKind::op, 1, 0}},
        {"sec", {SymKind::op, 1, 0}},  {"csc", {SymKind::op, 1, 0}},
        {"x", {SymKind::variable, 0, 0}},  {"y", {SymKind::variable, 0, 0}},
        {"z", {SymKind::variable, 0, 0}},  {"w", {SymKind::variable, 0, 0}},
        {"-1", {SymKind::number, 0, -1}},  {"0", {SymKind::number, 0, 0}},
        {"1", {SymKind::number, 0, 1}},    {"2", {SymKind::number, 0, 2}},
        {"3", {SymKind::number, 0, 3}},    {"4", {SymKind::number, 0, 4}},
        {"pi", {SymKind::constant, 0, 3.14159265358979323846}},
    };
    return table;
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable n-ary parse tree node. Children are fixed-arity per the symbol
// table; n-ary + and * in source text are right-folded into binary nodes at
// parse time, so every consumer can assume arity <= 2.
struct Expr {
    std::string symbol;
    SymKind kind;
    std::vector<ExprPtr> children;

    bool is_leaf() const { return children.empty(); }
    bool is_eq() const { return symbol == "="; }
};

inline ExprPtr make_expr(std::string symbol, std::vector<ExprPtr> children = {}) {
    auto it = symbol_table().find(symbol);
    if (it == symbol_table().end()) throw ParseError("unknown symbol: " + symbol);
    const SymbolInfo& info = it->second;
    if (static_cast<int>(children.size()) != info.arity)
        throw ParseError("arity violation: " + symbol + " takes " +
                         std::to_string(info.arity) + " children, got " +
                         std::to_string(children.size()));
    auto e = std::make_shared<Expr>();
    e->symbol = std::move(symbol);
    e->kind = info.kind;
    e->children = std::move(children);
    return e;
}

inline ExprPtr leaf(const std::string& symbol) { return make_expr(symbol); }

// --- printing -------------------------------------------------------------

inline void print_rec(const Expr& e, std::string& out) {
    if (e.is_leaf()) {
        out += e.symbol;
        return;
    }
    out += '(';
    out += e.symbol;
    for (const ExprPtr& c : e.children) {
        out += ' ';
        print_rec(*c, out);
    }
    out += ')';
}

inline std::string print_expr(const ExprPtr& e) {
    std::string out;
    print_rec(*e, out);
    return out;
}

// --- parsing ----------------------------------------------------------------

namespace detail {

struct Token {
    std::string text;
    std::size_t pos;  // byte offset, for error messages
    bool open = false, close = false;
};

inline std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
        } else if (c == '(') {
            tokens.push_back({"(", i, true, false});
            ++i;
        } else if (c == ')') {
            tokens.push_back({")", i, false, true});
            ++i;
        } else {
            std::size_t j = i;
            while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\n' &&
                   s[j] != '\r' && s[j] != '(' && s[j] != ')')
                ++j;
            tokens.push_back({s.substr(i, j - i), i, false, false});
            i = j;
        }
    }
    return tokens;
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text), tokens_(tokenize(text)) {}

    ExprPtr run() {
        ExprPtr e = parse_node(/*depth=*/0);
        if (cursor_ != tokens_.size())
            fail("trailing input", tokens_[cursor_].pos);
        return e;
    }

private:
    const std::string& text_;
    std::vector<Token> tokens_;
    std::size_t cursor_ = 0;

    [[noreturn]] void fail(const std::string& what, std::size_t pos) {
        throw ParseError(what + " at offset " + std::to_string(pos) + " in: " + text_);
    }

    const Token& peek() {
        if (cursor_ >= tokens_.size())
            fail("unexpected end of input (unbalanced parentheses?)", text_.size());
        return tokens_[cursor_];
    }

    ExprPtr parse_node(int depth) {
        const Token& t = peek();
        if (t.close) fail("unexpected ')'", t.pos);
        if (!t.open) {
            ++cursor_;
            auto it = symbol_table().find(t.text);
            if (it == symbol_table().end() || it->second.arity != 0)
                fail("unknown token '" + t.text + "'", t.pos);
            return make_expr(t.text);
        }
        std::size_t open_pos = t.pos;
        ++cursor_;  // consume '('
        const Token& head = peek();
        if (head.open || head.close) fail("expected operator after '('", head.pos);
        auto it = symbol_table().find(head.text);
        if (it == symbol_table().end() || it->second.arity == 0)
            fail("unknown operator '" + head.text + "'", head.pos);
        std::string op = head.text;
        if (op == "=" && depth != 0)
            fail("'=' may only appear at the root", head.pos);
        ++cursor_;

        std::vector<ExprPtr> children;
        while (true) {
            if (cursor_ >= tokens_.size())
                fail("unbalanced parentheses: missing ')' for '(' ", open_pos);
            if (tokens_[cursor_].close) {
                ++cursor_;
                break;
            }
            children.push_back(parse_node(depth + 1));
        }

        int arity = it->second.arity;
        bool foldable = (op == "+" || op == "*");
        if (foldable && static_cast<int>(children.size()) > 2) {
            // right-fold n-ary sums/products into binary nodes
            ExprPtr acc = children.back();
            for (int i = static_cast<int>(children.size()) - 2; i >= 0; --i)
                acc = make_expr(op, {children[static_cast<std::size_t>(i)], acc});
            return acc;
        }
        if (static_cast<int>(children.size()) != arity)
            fail("arity violation: '" + op + "' takes " + std::to_string(arity) +
                     " arguments, got " + std::to_string(children.size()),
                 open_pos);
        return make_expr(op, std::move(children));
    }
};

}  // namespace detail

// Parses parenthesized prefix notation, e.g. (= (+ (* (sqrt 1) 1 y) x) (+ (* 1 y) x)).
inline ExprPtr parse(const std::string& text) { return detail::Parser(text).run(); }

// --- structure helpers -------------------------------------------------------

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->symbol != b->symbol || a->children.size() != b->children.size()) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!expr_equal(a->children[i], b->children[i])) return false;
    return true;
}

inline int node_count(const ExprPtr& e) {
    int n = 1;
    for (const ExprPtr& c : e->children) n += node_count(c);
    return n;
}

// Longest root-to-leaf path in node count; a bare leaf has depth 1.
inline int subtree_depth(const ExprPtr& e) {
    int best = 0;
    for (const ExprPtr& c : e->children) best = std::max(best, subtree_depth(c));
    return 1 + best;
}

// Equation depth: deeper of the two sides, the eq node itself excluded.
inline int depth(const ExprPtr& e) {
    if (!e->is_eq()) throw ParseError("depth requires an equation rooted at '='");
    return std::max(subtree_depth(e->children[0]), subtree_depth(e->children[1]));
}

// Preorder list of every node; used for uniform node selection.
inline void collect_nodes(const ExprPtr& e, std::vector<ExprPtr>& out) {
    out.push_back(e);
    for (const ExprPtr& c : e->children) collect_nodes(c, out);
}

// Returns a copy of `root` with the node at preorder index `target` (counting
// the root as 0) replaced by `replacement`.
inline ExprPtr replace_node(const ExprPtr& root, int target, const ExprPtr& replacement,
                            int* counter = nullptr) {
    int local = 0;
    if (counter == nullptr) counter = &local;
    if (*counter == target) {
        ++*counter;
        return replacement;
    }
    ++*counter;
    std::vector<ExprPtr> children;
    children.reserve(root->children.size());
    for (const ExprPtr& c : root->children)
        children.push_back(replace_node(c, target, replacement, counter));
    return make_expr(root->symbol, std::move(children));
}

inline void collect_variables(const ExprPtr& e, std::vector<std::string>& out) {
    if (e->kind == SymKind::variable) {
        bool seen = false;
        for (const std::string& v : out) seen = seen || v == e->symbol;
        if (!seen) out.push_back(e->symbol);
    }
    for (const ExprPtr& c : e->children) collect_variables(c, out);
}

}  // namespace treecalc
