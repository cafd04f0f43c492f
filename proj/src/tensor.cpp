#include "gsemtmo/tensor.hpp"

#include <cmath>
#include <cstdlib>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

std::string Tensor2::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Tensor2 Tensor2::full(int r, int c, double value) {
    Tensor2 t(r, c);
    for (auto& x : t.v) x = value;
    return t;
}

Tensor2 Tensor2::identity(int n) {
    Tensor2 t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor2 Tensor2::from_rows(int r, int c, std::initializer_list<double> values) {
    Tensor2 t(r, c);
    if (values.size() != t.size())
        throw ValidationError("from_rows: got " + std::to_string(values.size()) +
                              " values for shape " + t.shape_str());
    std::size_t i = 0;
    for (double x : values) t.v[i++] = x;
    return t;
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows)
        throw ValidationError("matmul: inner dimensions differ, " + a.shape_str() +
                              " x " + b.shape_str());
    Tensor2 out(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous in both b and out.
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.v[static_cast<std::size_t>(i) * a.cols];
        double* orow = &out.v[static_cast<std::size_t>(i) * out.cols];
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.v[static_cast<std::size_t>(k) * b.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor2 matmul_transpose_a(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows)
        throw ValidationError("matmul_transpose_a: row counts differ, " + a.shape_str() +
                              " vs " + b.shape_str());
    Tensor2 out(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = &a.v[static_cast<std::size_t>(k) * a.cols];
        const double* brow = &b.v[static_cast<std::size_t>(k) * b.cols];
        for (int i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* orow = &out.v[static_cast<std::size_t>(i) * out.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

Tensor2 matmul_transpose_b(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.cols)
        throw ValidationError("matmul_transpose_b: col counts differ, " + a.shape_str() +
                              " vs " + b.shape_str());
    Tensor2 out(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.v[static_cast<std::size_t>(i) * a.cols];
        double* orow = &out.v[static_cast<std::size_t>(i) * out.cols];
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = &b.v[static_cast<std::size_t>(j) * b.cols];
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

static void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
    if (!a.same_shape(b))
        throw ValidationError(std::string(op) + ": shapes differ, " + a.shape_str() +
                              " vs " + b.shape_str());
}

Tensor2 add(const Tensor2& a, const Tensor2& b) {
    require_same_shape(a, b, "add");
    Tensor2 out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += b.v[i];
    return out;
}

Tensor2 sub(const Tensor2& a, const Tensor2& b) {
    require_same_shape(a, b, "sub");
    Tensor2 out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= b.v[i];
    return out;
}

Tensor2 add_rowvec(const Tensor2& m, const Tensor2& row) {
    if (row.rows != 1 || row.cols != m.cols)
        throw ValidationError("add_rowvec: need 1x" + std::to_string(m.cols) +
                              " row, got " + row.shape_str());
    Tensor2 out = m;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) += row.v[j];
    return out;
}

Tensor2 leaky_relu(const Tensor2& x, double negative_slope) {
    Tensor2 out = x;
    for (auto& e : out.v)
        if (e < 0.0) e *= negative_slope;
    return out;
}

Tensor2 concat_cols(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows)
        throw ValidationError("concat_cols: row counts differ, " + a.shape_str() +
                              " vs " + b.shape_str());
    Tensor2 out(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < a.cols; ++j) out.at(i, j) = a.at(i, j);
        for (int j = 0; j < b.cols; ++j) out.at(i, a.cols + j) = b.at(i, j);
    }
    return out;
}

Tensor2 scale(const Tensor2& x, double c) {
    Tensor2 out = x;
    for (auto& e : out.v) e *= c;
    return out;
}

double sum(const Tensor2& x) {
    double acc = 0.0;
    for (double e : x.v) acc += e;
    return acc;
}

bool all_finite(const Tensor2& x) {
    for (double e : x.v)
        if (!std::isfinite(e)) return false;
    return true;
}

}  // namespace gsemtmo
