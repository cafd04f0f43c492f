#include "gsemtmo/tape.hpp"

#include <cmath>
#include <utility>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

GradTape::Id GradTape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

GradTape::Id GradTape::leaf(Tensor2 value) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

GradTape::Id GradTape::matmul(Id a, Id b) {
    Node n;
    n.op = Op::matmul;
    n.a = a;
    n.b = b;
    n.value = gsemtmo::matmul(nodes_[a].value, nodes_[b].value);
    return push(std::move(n));
}

GradTape::Id GradTape::add(Id a, Id b) {
    Node n;
    n.op = Op::add;
    n.a = a;
    n.b = b;
    n.value = gsemtmo::add(nodes_[a].value, nodes_[b].value);
    return push(std::move(n));
}

GradTape::Id GradTape::add_rowvec(Id m, Id row) {
    Node n;
    n.op = Op::add_rowvec;
    n.a = m;
    n.b = row;
    n.value = gsemtmo::add_rowvec(nodes_[m].value, nodes_[row].value);
    return push(std::move(n));
}

GradTape::Id GradTape::sub(Id a, Id b) {
    Node n;
    n.op = Op::sub;
    n.a = a;
    n.b = b;
    n.value = gsemtmo::sub(nodes_[a].value, nodes_[b].value);
    return push(std::move(n));
}

GradTape::Id GradTape::abs(Id x) {
    Node n;
    n.op = Op::abs;
    n.a = x;
    n.value = nodes_[x].value;
    for (auto& e : n.value.v) e = std::fabs(e);
    return push(std::move(n));
}

GradTape::Id GradTape::sum_all(Id x) {
    Node n;
    n.op = Op::sum_all;
    n.a = x;
    n.value = Tensor2(1, 1);
    n.value.v[0] = gsemtmo::sum(nodes_[x].value);
    return push(std::move(n));
}

GradTape::Id GradTape::scale(Id x, double c) {
    Node n;
    n.op = Op::scale;
    n.a = x;
    n.c = c;
    n.value = gsemtmo::scale(nodes_[x].value, c);
    return push(std::move(n));
}

GradTape::Id GradTape::leaky_relu(Id x, double negative_slope) {
    Node n;
    n.op = Op::leaky_relu;
    n.a = x;
    n.c = negative_slope;
    n.value = gsemtmo::leaky_relu(nodes_[x].value, negative_slope);
    return push(std::move(n));
}

GradTape::Id GradTape::scale_rows(Id x, std::vector<double> factors) {
    const Tensor2& xin = nodes_[x].value;
    if (static_cast<int>(factors.size()) != xin.rows)
        throw ValidationError("scale_rows: " + std::to_string(factors.size()) +
                              " factors for " + xin.shape_str());
    Node n;
    n.op = Op::scale_rows;
    n.a = x;
    n.value = xin;
    for (int i = 0; i < xin.rows; ++i)
        for (int j = 0; j < xin.cols; ++j) n.value.at(i, j) *= factors[i];
    n.factors = std::move(factors);
    return push(std::move(n));
}

GradTape::Id GradTape::pow_const(Id x, double e) {
    Node n;
    n.op = Op::pow_const;
    n.a = x;
    n.c = e;
    n.value = nodes_[x].value;
    for (auto& v : n.value.v) v = std::pow(v, e);
    return push(std::move(n));
}

GradTape::Id GradTape::concat_cols(Id a, Id b) {
    Node n;
    n.op = Op::concat_cols;
    n.a = a;
    n.b = b;
    n.value = gsemtmo::concat_cols(nodes_[a].value, nodes_[b].value);
    return push(std::move(n));
}

GradTape::Id GradTape::gather_rows(Id x, std::vector<int> index) {
    const Tensor2& xin = nodes_[x].value;
    Node n;
    n.op = Op::gather_rows;
    n.a = x;
    n.value = Tensor2(static_cast<int>(index.size()), xin.cols);
    for (std::size_t i = 0; i < index.size(); ++i) {
        const int r = index[i];
        if (r < 0 || r >= xin.rows)
            throw ValidationError("gather_rows: index " + std::to_string(r) +
                                  " out of range for " + xin.shape_str());
        for (int j = 0; j < xin.cols; ++j)
            n.value.at(static_cast<int>(i), j) = xin.at(r, j);
    }
    n.index = std::move(index);
    return push(std::move(n));
}

void GradTape::backward(Id loss) {
    if (loss < 0 || loss >= static_cast<Id>(nodes_.size()))
        throw ValidationError("backward: invalid node id");
    const Tensor2& lv = nodes_[loss].value;
    if (lv.rows != 1 || lv.cols != 1)
        throw ValidationError("backward: loss must be scalar, got " + lv.shape_str());

    for (auto& n : nodes_) n.grad = Tensor2(n.value.rows, n.value.cols);
    nodes_[loss].grad.v[0] = 1.0;

    for (Id id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        const Tensor2& g = n.grad;
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::matmul: {
                // dA += G B^T ; dB += A^T G
                Tensor2 da = matmul_transpose_b(g, nodes_[n.b].value);
                Tensor2 db = matmul_transpose_a(nodes_[n.a].value, g);
                Tensor2& ga = nodes_[n.a].grad;
                Tensor2& gb = nodes_[n.b].grad;
                for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += da.v[i];
                for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] += db.v[i];
                break;
            }
            case Op::add: {
                Tensor2& ga = nodes_[n.a].grad;
                Tensor2& gb = nodes_[n.b].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga.v[i] += g.v[i];
                    gb.v[i] += g.v[i];
                }
                break;
            }
            case Op::add_rowvec: {
                Tensor2& gm = nodes_[n.a].grad;
                Tensor2& grow = nodes_[n.b].grad;
                for (std::size_t i = 0; i < g.size(); ++i) gm.v[i] += g.v[i];
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) grow.v[j] += g.at(i, j);
                break;
            }
            case Op::sub: {
                Tensor2& ga = nodes_[n.a].grad;
                Tensor2& gb = nodes_[n.b].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga.v[i] += g.v[i];
                    gb.v[i] -= g.v[i];
                }
                break;
            }
            case Op::abs: {
                // Subgradient at 0 is 0.
                const Tensor2& x = nodes_[n.a].value;
                Tensor2& gx = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (x.v[i] > 0.0)
                        gx.v[i] += g.v[i];
                    else if (x.v[i] < 0.0)
                        gx.v[i] -= g.v[i];
                }
                break;
            }
            case Op::sum_all: {
                Tensor2& gx = nodes_[n.a].grad;
                const double s = g.v[0];
                for (auto& e : gx.v) e += s;
                break;
            }
            case Op::scale: {
                Tensor2& gx = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) gx.v[i] += g.v[i] * n.c;
                break;
            }
            case Op::leaky_relu: {
                // Derivative 1 at x == 0 (ties go to the linear branch).
                const Tensor2& x = nodes_[n.a].value;
                Tensor2& gx = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    gx.v[i] += g.v[i] * (x.v[i] >= 0.0 ? 1.0 : n.c);
                break;
            }
            case Op::scale_rows: {
                Tensor2& gx = nodes_[n.a].grad;
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) gx.at(i, j) += g.at(i, j) * n.factors[i];
                break;
            }
            case Op::pow_const: {
                const Tensor2& x = nodes_[n.a].value;
                Tensor2& gx = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (x.v[i] > 0.0)
                        gx.v[i] += g.v[i] * n.c * std::pow(x.v[i], n.c - 1.0);
                }
                break;
            }
            case Op::concat_cols: {
                Tensor2& ga = nodes_[n.a].grad;
                Tensor2& gb = nodes_[n.b].grad;
                for (int i = 0; i < g.rows; ++i) {
                    for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += g.at(i, j);
                    for (int j = 0; j < gb.cols; ++j) gb.at(i, j) += g.at(i, ga.cols + j);
                }
                break;
            }
            case Op::gather_rows: {
                Tensor2& gx = nodes_[n.a].grad;
                for (std::size_t i = 0; i < n.index.size(); ++i) {
                    const int r = n.index[i];
                    for (int j = 0; j < g.cols; ++j)
                        gx.at(r, j) += g.at(static_cast<int>(i), j);
                }
                break;
            }
        }
    }
}

GradTape::Id l1_loss(GradTape& tape, GradTape::Id pred, GradTape::Id target) {
    return tape.sum_all(tape.abs(tape.sub(pred, target)));
}

}  // namespace gsemtmo
