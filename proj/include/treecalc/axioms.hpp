#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "treecalc/expr.hpp"

namespace treecalc {

// Seed identities for the dataset generator: trigonometric (Pythagorean,
// angle-sum, reflection/periodicity) plus power/product/field identities.
// Every entry must hold on the oracle's sampling window; the file-based
// loader lets users swap in their own list.
inline const std::vector<std::string>& builtin_axioms() {
    static const std::vector<std::string> axioms = {
        // Pythagorean family
        "(= (+ (pow (sin x) 2) (pow (cos x) 2)) 1)",
        "(= (+ 1 (pow (tan x) 2)) (pow (sec x) 2))",
        "(= (+ 1 (pow (* (cos x) (pow (sin x) -1)) 2)) (pow (csc x) 2))",
        // double angle and angle sums
        "(= (sin (* 2 x)) (* 2 (* (sin x) (cos x))))",
        "(= (cos (* 2 x)) (+ (pow (cos x) 2) (* -1 (pow (sin x) 2))))",
        "(= (sin (+ x y)) (+ (* (sin x) (cos y)) (* (cos x) (sin y))))",
        "(= (cos (+ x y)) (+ (* (cos x) (cos y)) (* -1 (* (sin x) (sin y)))))",
        // shifts and periodicity
        "(= (sin (+ x pi)) (* -1 (sin x)))",
        "(= (cos (+ x pi)) (* -1 (cos x)))",
        "(= (sec (+ x pi)) (* -1 (sec x)))",
        "(= (tan (+ x pi)) (tan x))",
        "(= (sin (+ x (* 2 pi))) (sin x))",
        "(= (cos (+ x (* 2 pi))) (cos x))",
        "(= (csc (+ x (* 2 pi))) (csc x))",
        // reciprocal definitions
        "(= (tan x) (* (sin x) (pow (cos x) -1)))",
        "(= (sec x) (pow (cos x) -1))",
        "(= (csc x) (pow (sin x) -1))",
        "(= (* (sin x) (csc x)) 1)",
        "(= (* (cos x) (sec x)) 1)",
        // algebraic identities
        "(= (+ x 0) x)",
        "(= (* x 1) x)",
        "(= (* 0 x) 0)",
        "(= (+ x y) (+ y x))",
        "(= (* x y) (* y x))",
        "(= (* x (+ y z)) (+ (* x y) (* x z)))",
        "(= (+ (+ x y) z) (+ x (+ y z)))",
        "(= (* (* x y) z) (* x (* y z)))",
        "(= (+ x (* -1 x)) 0)",
        "(= (* -1 (* -1 x)) x)",
        // powers and roots
        "(= (pow x 1) x)",
        "(= (pow x 0) 1)",
        "(= (pow (pow x 2) 2) (pow x 4))",
        "(= (* (pow x 2) x) (pow x 3))",
        "(= (* (pow x 2) (pow x 2)) (pow x 4))",
        "(= (pow (* x y) 2) (* (pow x 2) (pow y 2)))",
        "(= (sqrt (pow x 2)) x)",
        "(= (pow (sqrt x) 2) x)",
        "(= (sqrt (* x y)) (* (sqrt x) (sqrt y)))",
        "(= (* x (pow x -1)) 1)",
        "(= (pow (* x y) -1) (* (pow x -1) (pow y -1)))",
        // ground arithmetic
        "(= (+ 1 1) 2)",
        "(= (+ 2 2) 4)",
        "(= (* 2 2) 4)",
        "(= (+ 1 2) 3)",
        "(= (sqrt 4) 2)",
        "(= (sqrt 1) 1)",
        "(= (* 2 (pow 2 -1)) 1)",
        "(= (cos (* 2 pi)) 1)",
    };
    return axioms;
}

inline std::vector<ExprPtr> parse_axioms(const std::vector<std::string>& lines) {
    std::vector<ExprPtr> out;
    out.reserve(lines.size());
    for (const std::string& line : lines) {
        if (line.empty()) continue;
        out.push_back(parse(line));
    }
    return out;
}

// Axiom file format: one s-expression per line, '#' starts a comment line.
inline std::vector<ExprPtr> load_axioms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open axiom file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
    }
    return parse_axioms(lines);
}

}  // namespace treecalc
