#pragma once

#include <cstdint>
#include <vector>

#include "miniens/tensor/tensor.hpp"

namespace miniens::tensor {

struct AdamConfig {
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter list. Moment buffers are owned
// here; a parameter with an untouched grad buffer is treated as zero-grad.
class Adam {
public:
    explicit Adam(std::vector<Tensor> params, AdamConfig cfg = {});

    void step();
    void zero_grad();
    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig cfg_;
    std::int64_t t_ = 0;
};

}  // namespace miniens::tensor
