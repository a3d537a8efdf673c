#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace plato {

// Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8).
template <class Real>
class Adam {
public:
    Adam() = default;
    Adam(std::size_t param_count, double learning_rate)
        : lr_(learning_rate), m_(param_count, Real{0}), v_(param_count, Real{0}) {}

    // Consumes one contiguous block per call, in a fixed order; the caller
    // iterates its parameter blocks the same way every step.
    void begin_step() {
        ++t_;
        cursor_ = 0;
        const double b1t = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double b2t = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        step_scale_ = lr_ / b1t;
        v_scale_ = 1.0 / b2t;
    }

    void update_block(std::span<Real> params, std::span<const Real> grads) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const std::size_t k = cursor_ + i;
            const Real g = grads[i];
            m_[k] = static_cast<Real>(beta1_) * m_[k] + static_cast<Real>(1.0 - beta1_) * g;
            v_[k] = static_cast<Real>(beta2_) * v_[k] + static_cast<Real>(1.0 - beta2_) * g * g;
            const double vhat = static_cast<double>(v_[k]) * v_scale_;
            params[i] -= static_cast<Real>(step_scale_ * static_cast<double>(m_[k]) /
                                           (std::sqrt(vhat) + eps_));
        }
        cursor_ += params.size();
    }

    std::size_t size() const { return m_.size(); }

private:
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    std::size_t cursor_ = 0;
    double step_scale_ = 0.0;
    double v_scale_ = 1.0;
    std::vector<Real> m_;
    std::vector<Real> v_;
};

}  // namespace plato
