#pragma once

#include <functional>
#include <vector>

#include "treecalc/tape.hpp"

namespace treecalc {

// A builder receives a fresh tape plus one leaf per input tensor and returns
// the scalar output whose gradient is being checked. It must be deterministic.
using GraphBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

namespace detail {
inline double eval_builder(const GraphBuilder& f, const std::vector<Tensor>& inputs) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t));
    Var out = f(tape, leaves);
    return tape.value(out).data[0];
}
}  // namespace detail

// Central finite differences against the analytic reverse pass. Returns the
// max over all input elements of |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
inline double grad_check(const GraphBuilder& f, const std::vector<Tensor>& inputs,
                         double h = 1e-5) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t));
    Var out = f(tape, leaves);
    tape.backward(out);

    double worst = 0.0;
    std::vector<Tensor> probe = inputs;
    for (std::size_t p = 0; p < inputs.size(); ++p) {
        const Tensor& analytic = tape.grad(leaves[p]);
        for (int e = 0; e < probe[p].numel(); ++e) {
            double saved = probe[p].data[e];
            probe[p].data[e] = saved + h;
            double up = detail::eval_builder(f, probe);
            probe[p].data[e] = saved - h;
            double down = detail::eval_builder(f, probe);
            probe[p].data[e] = saved;
            double numeric = (up - down) / (2.0 * h);
            double a = analytic.data[e];
            double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace treecalc
