#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "treecalc/tensor.hpp"

namespace treecalc {

// Reverse-mode autodiff over a per-example tape. Trees have per-example
// topology, so a graph is recorded fresh for every equation; parameters enter
// as leaves bound to a slot id and their gradients are read back after
// backward(). A Tape is single-threaded; concurrent examples use separate
// tapes over read-shared parameter values.

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

enum class Op : std::uint8_t {
    leaf,
    add,
    sub,
    hadamard,
    scale,      // constant factor
    sigmoid,
    tanh_fn,
    log_fn,
    clamp,
    matvec,
    bilinear,   // third-order tensor contraction W(z, x)
    softmax,
    dot,
    concat2,
    pick,
    dropout
};

// Kinds accepted by the elementwise() dispatcher.
enum class ElemOp { add, sub, hadamard, sigmoid, tanh_fn, scale };

class Tape {
public:
    struct Node {
        Op op;
        int in0 = -1, in1 = -1, in2 = -1;
        Tensor val;
        Tensor grad;                      // allocated by backward()
        double s0 = 0.0, s1 = 0.0;        // scale factor / clamp bounds / keep prob
        int k = 0;                        // pick index
        std::vector<std::uint8_t> mask;   // dropout mask
        int param_slot = -1;              // leaf binding, -1 for plain constants
        bool requires_grad = false;
    };

    int size() const { return static_cast<int>(nodes_.size()); }

    const Tensor& value(Var v) const { return nodes_[check(v)].val; }
    const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }
    int param_slot(Var v) const { return nodes_[check(v)].param_slot; }

    Var leaf(Tensor t, int param_slot = -1, bool requires_grad = true) {
        check_finite(t, "leaf");
        Node n;
        n.op = Op::leaf;
        n.val = std::move(t);
        n.param_slot = param_slot;
        n.requires_grad = requires_grad;
        return push(std::move(n));
    }

    Var constant(Tensor t) { return leaf(std::move(t), -1, false); }

    Var zeros(int n) { return constant(Tensor({n})); }

    Var add(Var a, Var b) { return binary(Op::add, a, b); }
    Var sub(Var a, Var b) { return binary(Op::sub, a, b); }
    Var hadamard(Var a, Var b) { return binary(Op::hadamard, a, b); }

    Var scale(Var a, double c) {
        Node n = unary_node(Op::scale, a);
        n.s0 = c;
        n.val = value(a);
        for (double& v : n.val.data) v *= c;
        return push_checked(std::move(n), "scale");
    }

    Var sigmoid(Var a) {
        Node n = unary_node(Op::sigmoid, a);
        n.val = value(a);
        for (double& v : n.val.data) v = 1.0 / (1.0 + std::exp(-v));
        return push_checked(std::move(n), "sigmoid");
    }

    Var tanh_fn(Var a) {
        Node n = unary_node(Op::tanh_fn, a);
        n.val = value(a);
        for (double& v : n.val.data) v = std::tanh(v);
        return push_checked(std::move(n), "tanh");
    }

    Var log_fn(Var a) {
        Node n = unary_node(Op::log_fn, a);
        n.val = value(a);
        for (double& v : n.val.data) v = std::log(v);
        return push_checked(std::move(n), "log");
    }

    Var clamp(Var a, double lo, double hi) {
        Node n = unary_node(Op::clamp, a);
        n.s0 = lo;
        n.s1 = hi;
        n.val = value(a);
        for (double& v : n.val.data) v = std::min(std::max(v, lo), hi);
        return push_checked(std::move(n), "clamp");
    }

    // Dispatcher mirroring the supported elementwise kinds. Binary kinds allow
    // equal shapes or a scalar on either side; nothing else broadcasts.
    Var elementwise(ElemOp kind, Var a, std::optional<Var> b = std::nullopt) {
        switch (kind) {
            case ElemOp::add: return add(a, require(b, "add"));
            case ElemOp::sub: return sub(a, require(b, "sub"));
            case ElemOp::hadamard: return hadamard(a, require(b, "hadamard"));
            case ElemOp::scale: {
                Var s = require(b, "scale");
                if (!value(s).is_scalar())
                    throw TensorError("scale expects a scalar second operand, got shape " +
                                      shape_str(value(s).shape));
                return hadamard(a, s);
            }
            case ElemOp::sigmoid: return sigmoid(a);
            case ElemOp::tanh_fn: return tanh_fn(a);
        }
        throw TensorError("unknown elementwise kind");
    }

    Var matvec(Var w, Var x) {
        const Tensor& W = value(w);
        const Tensor& X = value(x);
        if (W.shape.size() != 2 || X.shape.size() != 1 || W.shape[1] != X.shape[0])
            throw TensorError("matvec dimension mismatch: " + shape_str(W.shape) + " vs " +
                              shape_str(X.shape));
        int m = W.shape[0], k = W.shape[1];
        Node n;
        n.op = Op::matvec;
        n.in0 = w.id;
        n.in1 = x.id;
        n.val = Tensor({m});
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            const double* row = &W.data[static_cast<std::size_t>(i) * k];
            for (int j = 0; j < k; ++j) acc += row[j] * X.data[j];
            n.val.data[i] = acc;
        }
        return push_checked(std::move(n), "matvec");
    }

    // out[l] = sum_{i,j} W[l,i,j] * z[i] * x[j]
    Var bilinear(Var w, Var z, Var x) {
        const Tensor& W = value(w);
        const Tensor& Z = value(z);
        const Tensor& X = value(x);
        if (W.shape.size() != 3 || Z.shape.size() != 1 || X.shape.size() != 1 ||
            W.shape[1] != Z.shape[0] || W.shape[2] != X.shape[0])
            throw TensorError("bilinear dimension mismatch: " + shape_str(W.shape) + " vs " +
                              shape_str(Z.shape) + " and " + shape_str(X.shape));
        int l = W.shape[0], nz = W.shape[1], nx = W.shape[2];
        Node n;
        n.op = Op::bilinear;
        n.in0 = w.id;
        n.in1 = z.id;
        n.in2 = x.id;
        n.val = Tensor({l});
        for (int a = 0; a < l; ++a) {
            double acc = 0.0;
            const double* slab = &W.data[static_cast<std::size_t>(a) * nz * nx];
            for (int i = 0; i < nz; ++i) {
                double zi = Z.data[i];
                if (zi == 0.0) continue;
                const double* row = slab + static_cast<std::size_t>(i) * nx;
                double inner = 0.0;
                for (int j = 0; j < nx; ++j) inner += row[j] * X.data[j];
                acc += zi * inner;
            }
            n.val.data[a] = acc;
        }
        return push_checked(std::move(n), "bilinear");
    }

    Var softmax(Var a) {
        const Tensor& A = value(a);
        if (A.shape.size() != 1 || A.shape[0] < 2)
            throw TensorError("softmax expects a vector of length >= 2, got " +
                              shape_str(A.shape));
        Node n = unary_node(Op::softmax, a);
        n.val = A;
        double mx = n.val.data[0];
        for (double v : n.val.data) mx = std::max(mx, v);
        double sum = 0.0;
        for (double& v : n.val.data) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : n.val.data) v /= sum;
        return push_checked(std::move(n), "softmax");
    }

    Var dot(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (A.shape != B.shape || A.shape.size() != 1)
            throw TensorError("dot shape mismatch: " + shape_str(A.shape) + " vs " +
                              shape_str(B.shape));
        Node n;
        n.op = Op::dot;
        n.in0 = a.id;
        n.in1 = b.id;
        double acc = 0.0;
        for (int i = 0; i < A.numel(); ++i) acc += A.data[i] * B.data[i];
        n.val = Tensor::scalar(acc);
        return push_checked(std::move(n), "dot");
    }

    Var concat2(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (A.shape.size() != 1 || B.shape.size() != 1)
            throw TensorError("concat expects vectors, got " + shape_str(A.shape) + " and " +
                              shape_str(B.shape));
        Node n;
        n.op = Op::concat2;
        n.in0 = a.id;
        n.in1 = b.id;
        n.val = Tensor({A.shape[0] + B.shape[0]});
        std::copy(A.data.begin(), A.data.end(), n.val.data.begin());
        std::copy(B.data.begin(), B.data.end(), n.val.data.begin() + A.numel());
        return push_checked(std::move(n), "concat");
    }

    Var pick(Var a, int index) {
        const Tensor& A = value(a);
        if (A.shape.size() != 1 || index < 0 || index >= A.shape[0])
            throw TensorError("pick index " + std::to_string(index) + " out of range for " +
                              shape_str(A.shape));
        Node n = unary_node(Op::pick, a);
        n.k = index;
        n.val = Tensor::scalar(A.data[index]);
        return push_checked(std::move(n), "pick");
    }

    // Inverted dropout with a recorded mask; the same mask drives backward.
    Var dropout(Var a, std::vector<std::uint8_t> mask, double keep_prob) {
        const Tensor& A = value(a);
        if (static_cast<int>(mask.size()) != A.numel())
            throw TensorError("dropout mask length mismatch");
        if (keep_prob <= 0.0 || keep_prob > 1.0)
            throw TensorError("dropout keep probability must be in (0, 1]");
        Node n = unary_node(Op::dropout, a);
        n.s0 = keep_prob;
        n.mask = std::move(mask);
        n.val = A;
        for (int i = 0; i < A.numel(); ++i)
            n.val.data[i] = n.mask[i] ? n.val.data[i] / keep_prob : 0.0;
        return push_checked(std::move(n), "dropout");
    }

    // Exact reverse sweep: zeroes all gradients, seeds d(loss)/d(loss) = 1 and
    // visits each node exactly once in reverse topological (= recording)
    // order. Running it twice on the same tape gives bit-identical gradients.
    void backward(Var loss) {
        const Tensor& L = value(loss);
        if (!L.is_scalar())
            throw TensorError("backward requires a scalar loss, got shape " +
                              shape_str(L.shape));
        for (Node& n : nodes_) {
            n.grad = Tensor(n.val.shape);
        }
        nodes_[loss.id].grad.data[0] = 1.0;
        for (int id = loss.id; id >= 0; --id) backprop_node(id);
    }

private:
    std::vector<Node> nodes_;

    int check(Var v) const {
        if (!v.valid() || v.id >= size()) throw TensorError("invalid tape variable");
        return v.id;
    }

    static Var require(std::optional<Var> b, const char* what) {
        if (!b) throw TensorError(std::string("elementwise ") + what + " needs two operands");
        return *b;
    }

    Var push(Node n) {
        nodes_.push_back(std::move(n));
        return Var{size() - 1};
    }

    Var push_checked(Node n, const char* where) {
        check_finite(n.val, where);
        return push(std::move(n));
    }

    Node unary_node(Op op, Var a) {
        Node n;
        n.op = op;
        n.in0 = check(a);
        return n;
    }

    Var binary(Op op, Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        bool a_scalar = A.is_scalar(), b_scalar = B.is_scalar();
        if (!(A.shape == B.shape || a_scalar || b_scalar))
            throw TensorError("shape mismatch in elementwise op: " + shape_str(A.shape) +
                              " vs " + shape_str(B.shape));
        Node n;
        n.op = op;
        n.in0 = a.id;
        n.in1 = b.id;
        const Tensor& shape_src = (a_scalar && !b_scalar) ? B : A;
        n.val = Tensor(shape_src.shape);
        int m = n.val.numel();
        for (int i = 0; i < m; ++i) {
            double av = A.data[a_scalar ? 0 : i];
            double bv = B.data[b_scalar ? 0 : i];
            switch (op) {
                case Op::add: n.val.data[i] = av + bv; break;
                case Op::sub: n.val.data[i] = av - bv; break;
                case Op::hadamard: n.val.data[i] = av * bv; break;
                default: throw TensorError("bad binary op");
            }
        }
        return push_checked(std::move(n), "elementwise");
    }

    void backprop_node(int id) {
        Node& n = nodes_[id];
        const Tensor& go = n.grad;
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::add:
            case Op::sub:
            case Op::hadamard: {
                Node& a = nodes_[n.in0];
                Node& b = nodes_[n.in1];
                bool as = a.val.is_scalar() && !n.val.is_scalar();
                bool bs = b.val.is_scalar() && !n.val.is_scalar();
                for (int i = 0; i < n.val.numel(); ++i) {
                    double g = go.data[i];
                    double av = a.val.data[as ? 0 : i];
                    double bv = b.val.data[bs ? 0 : i];
                    switch (n.op) {
                        case Op::add:
                            a.grad.data[as ? 0 : i] += g;
                            b.grad.data[bs ? 0 : i] += g;
                            break;
                        case Op::sub:
                            a.grad.data[as ? 0 : i] += g;
                            b.grad.data[bs ? 0 : i] -= g;
                            break;
                        case Op::hadamard:
                            a.grad.data[as ? 0 : i] += g * bv;
                            b.grad.data[bs ? 0 : i] += g * av;
                            break;
                        default: break;
                    }
                }
                break;
            }
            case Op::scale: {
                Node& a = nodes_[n.in0];
                for (int i = 0; i < n.val.numel(); ++i) a.grad.data[i] += n.s0 * go.data[i];
                break;
            }
            case Op::sigmoid: {
                Node& a = nodes_[n.in0];
                for (int i = 0; i < n.val.numel(); ++i) {
                    double s = n.val.data[i];
                    a.grad.data[i] += s * (1.0 - s) * go.data[i];
                }
                break;
            }
            case Op::tanh_fn: {
                Node& a = nodes_[n.in0];
                for (int i = 0; i < n.val.numel(); ++i) {
                    double t = n.val.data[i];
                    a.grad.data[i] += (1.0 - t * t) * go.data[i];
                }
                break;
            }
            case Op::log_fn: {
                Node& a = nodes_[n.in0];
                for (int i = 0; i < n.val.numel(); ++i)
                    a.grad.data[i] += go.data[i] / a.val.data[i];
                break;
            }
            case Op::clamp: {
                Node& a = nodes_[n.in0];
                for (int i = 0; i < n.val.numel(); ++i) {
                    double v = a.val.data[i];
                    if (v > n.s0 && v < n.s1) a.grad.data[i] += go.data[i];
                }
                break;
            }
            case Op::matvec: {
                Node& w = nodes_[n.in0];
                Node& x = nodes_[n.in1];
                int m = w.val.shape[0], k = w.val.shape[1];
                for (int i = 0; i < m; ++i) {
                    double g = go.data[i];
                    if (g == 0.0) continue;
                    const double* row = &w.val.data[static_cast<std::size_t>(i) * k];
                    double* wrow = &w.grad.data[static_cast<std::size_t>(i) * k];
                    for (int j = 0; j < k; ++j) {
                        wrow[j] += g * x.val.data[j];
                        x.grad.data[j] += g * row[j];
                    }
                }
                break;
            }
            case Op::bilinear: {
                Node& w = nodes_[n.in0];
                Node& z = nodes_[n.in1];
                Node& x = nodes_[n.in2];
                int l = w.val.shape[0], nz = w.val.shape[1], nx = w.val.shape[2];
                for (int a = 0; a < l; ++a) {
                    double g = go.data[a];
                    if (g == 0.0) continue;
                    const double* slab = &w.val.data[static_cast<std::size_t>(a) * nz * nx];
                    double* gslab = &w.grad.data[static_cast<std::size_t>(a) * nz * nx];
                    for (int i = 0; i < nz; ++i) {
                        double zi = z.val.data[i];
                        const double* row = slab + static_cast<std::size_t>(i) * nx;
                        double* grow = gslab + static_cast<std::size_t>(i) * nx;
                        double inner = 0.0;
                        for (int j = 0; j < nx; ++j) {
                            double xj = x.val.data[j];
                            grow[j] += g * zi * xj;
                            x.grad.data[j] += g * zi * row[j];
                            inner += row[j] * xj;
                        }
                        z.grad.data[i] += g * inner;
                    }
                }
                break;
            }
            case Op::softmax: {
                Node& a = nodes_[n.in0];
                double dsum = 0.0;
                for (int i = 0; i < n.val.numel(); ++i) dsum += go.data[i] * n.val.data[i];
                for (int i = 0; i < n.val.numel(); ++i)
                    a.grad.data[i] += n.val.data[i] * (go.data[i] - dsum);
                break;
            }
            case Op::dot: {
                Node& a = nodes_[n.in0];
                Node& b = nodes_[n.in1];
                double g = go.data[0];
                for (int i = 0; i < a.val.numel(); ++i) {
                    a.grad.data[i] += g * b.val.data[i];
                    b.grad.data[i] += g * a.val.data[i];
                }
                break;
            }
            case Op::concat2: {
                Node& a = nodes_[n.in0];
                Node& b = nodes_[n.in1];
                int na = a.val.numel();
                for (int i = 0; i < na; ++i) a.grad.data[i] += go.data[i];
                for (int i = 0; i < b.val.numel(); ++i) b.grad.data[i] += go.data[na + i];
                break;
            }
            case Op::pick: {
                Node& a = nodes_[n.in0];
                a.grad.data[n.k] += go.data[0];
                break;
            }
            case Op::dropout: {
                Node& a = nodes_[n.in0];
                for (int i = 0; i < n.val.numel(); ++i)
                    if (n.mask[i]) a.grad.data[i] += go.data[i] / n.s0;
                break;
            }
        }
    }
};

}  // namespace treecalc
