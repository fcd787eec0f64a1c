#include "grf/adam.hpp"

#include <cmath>

#include "grf/error.hpp"

namespace grf {

void adam_step(std::vector<NamedTensor>& params, AdamState& state) {
    if (state.m.size() != params.size()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            state.m[p].assign(params[p].second->size(), 0.0);
            state.v[p].assign(params[p].second->size(), 0.0);
        }
    }
    ++state.t;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& [name, tensor] = params[p];
        tensor->ensure_grad();
        if (state.m[p].size() != tensor->size())
            throw ParamError("adam_step: moment buffer shape drifted for '" + name + "'");
        auto& m = state.m[p];
        auto& v = state.v[p];
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            double g = tensor->grad[i];
            if (!std::isfinite(g))
                throw NumericError("adam_step: non-finite gradient in parameter '" + name + "'");
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            tensor->data[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace grf
