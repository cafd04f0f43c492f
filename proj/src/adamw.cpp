#include "gsemtmo/adamw.hpp"

#include <cmath>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

AdamwState AdamwState::like(const std::vector<Tensor2>& params) {
    AdamwState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const auto& p : params) {
        s.m.emplace_back(p.rows, p.cols);
        s.v.emplace_back(p.rows, p.cols);
    }
    return s;
}

void adamw_step(std::vector<Tensor2>& params, const std::vector<Tensor2>& grads,
                AdamwState& state, const AdamwConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ValidationError("adamw_step: parameter/gradient/state counts differ");
    if (cfg.lr <= 0.0) throw ValidationError("adamw_step: lr must be > 0");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor2& p = params[t];
        const Tensor2& g = grads[t];
        Tensor2& m = state.m[t];
        Tensor2& v = state.v[t];
        if (!p.same_shape(g) || !p.same_shape(m))
            throw ValidationError("adamw_step: shape mismatch at tensor " + std::to_string(t) +
                                  ", param " + p.shape_str() + " grad " + g.shape_str());
        for (std::size_t i = 0; i < p.size(); ++i) {
            m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * g.v[i];
            v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * g.v[i] * g.v[i];
            const double mhat = m.v[i] / bc1;
            const double vhat = v.v[i] / bc2;
            p.v[i] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p.v[i]);
        }
    }
}

}  // namespace gsemtmo
