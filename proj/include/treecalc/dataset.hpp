#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "treecalc/expr.hpp"
#include "treecalc/oracle.hpp"

namespace treecalc {

struct LabeledEquation {
    ExprPtr expr;
    Label label;
    int equation_depth;
};

enum class Split { train, valid, test };

inline const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

struct Dataset {
    std::vector<LabeledEquation> items;
    Split split = Split::train;
};

// File format: one record per line, `label<TAB>depth<TAB>s-expression`,
// '\n' line endings. Written bytes are a pure function of the items.
inline void write_dataset(const std::string& path, const std::vector<LabeledEquation>& items) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    for (const LabeledEquation& item : items) {
        out << to_string(item.label) << '\t' << item.equation_depth << '\t'
            << print_expr(item.expr) << '\n';
    }
}

inline std::vector<LabeledEquation> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file: " + path);
    std::vector<LabeledEquation> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected label<TAB>depth<TAB>expr");
        LabeledEquation item;
        item.label = label_from_string(line.substr(0, t1));
        item.equation_depth = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
        item.expr = parse(line.substr(t2 + 1));
        if (depth(item.expr) != item.equation_depth)
            throw ParseError(path + ":" + std::to_string(lineno) + ": stored depth " +
                             std::to_string(item.equation_depth) + " != computed depth " +
                             std::to_string(depth(item.expr)));
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace treecalc
