#pragma once

#include <string>
#include <vector>

namespace gsemtmo {

// Dense row-major matrix of doubles. Everything trainable in this project
// (layer activations, weights, gradients, optimizer moments) is one of these.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const;

    static Tensor2 zeros(int r, int c) { return Tensor2(r, c); }
    static Tensor2 full(int r, int c, double value);
    static Tensor2 identity(int n);
    static Tensor2 from_rows(int r, int c, std::initializer_list<double> values);
};

// Plain (untaped) matrix math; the eval/inference paths and the tape kernels
// share these.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_transpose_a(const Tensor2& a, const Tensor2& b);  // a^T * b
Tensor2 matmul_transpose_b(const Tensor2& a, const Tensor2& b);  // a * b^T
Tensor2 add(const Tensor2& a, const Tensor2& b);
Tensor2 sub(const Tensor2& a, const Tensor2& b);
Tensor2 add_rowvec(const Tensor2& m, const Tensor2& row);
Tensor2 leaky_relu(const Tensor2& x, double negative_slope);
Tensor2 concat_cols(const Tensor2& a, const Tensor2& b);
Tensor2 scale(const Tensor2& x, double c);
double sum(const Tensor2& x);
bool all_finite(const Tensor2& x);

}  // namespace gsemtmo
