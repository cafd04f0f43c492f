#pragma once

#include <vector>

#include "gsemtmo/tensor.hpp"

namespace gsemtmo {

// Reverse-mode tape over Tensor2 values. One tape per forward pass; the op
// set is exactly what the GCN + FC pipeline and its L1 loss need.
//
// Leaves copy their tensor in, so parameters live outside the tape and are
// re-registered each step. backward() fills per-node gradients; nodes never
// visited keep an all-zero gradient of matching shape.
class GradTape {
public:
    using Id = int;

    Id leaf(Tensor2 value);

    Id matmul(Id a, Id b);
    Id add(Id a, Id b);
    Id add_rowvec(Id m, Id row);
    Id sub(Id a, Id b);
    Id abs(Id x);
    Id sum_all(Id x);  // 1x1 output
    Id scale(Id x, double c);
    Id leaky_relu(Id x, double negative_slope);
    // Multiplies row i by factors[i]; factors are constants (dropout masks).
    Id scale_rows(Id x, std::vector<double> factors);
    // x^e elementwise; gradient defined as 0 where x <= 0.
    Id pow_const(Id x, double e);
    Id concat_cols(Id a, Id b);
    // out.row(i) = x.row(index[i]); backward scatter-adds.
    Id gather_rows(Id x, std::vector<int> index);

    const Tensor2& value(Id id) const { return nodes_[id].value; }
    // Valid after backward(); zero tensor for nodes the loss does not reach.
    const Tensor2& grad(Id id) const { return nodes_[id].grad; }

    void backward(Id loss);

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        leaf,
        matmul,
        add,
        add_rowvec,
        sub,
        abs,
        sum_all,
        scale,
        leaky_relu,
        scale_rows,
        pow_const,
        concat_cols,
        gather_rows,
    };

    struct Node {
        Op op;
        Id a = -1;
        Id b = -1;
        double c = 0.0;               // scale factor / slope / exponent
        std::vector<double> factors;  // scale_rows
        std::vector<int> index;       // gather_rows
        Tensor2 value;
        Tensor2 grad;
    };

    Id push(Node n);
    std::vector<Node> nodes_;
};

// sum(|a - b|) as a taped subgraph; the Eq-style L1 objective.
GradTape::Id l1_loss(GradTape& tape, GradTape::Id pred, GradTape::Id target);

}  // namespace gsemtmo
