#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "miniens/rng.hpp"
#include "miniens/tensor/checkpoint.hpp"
#include "miniens/tensor/tensor.hpp"

namespace testutil {

// Relative error with an absolute floor: for a loss of order 1, central
// differences carry ~1e-11 of rounding noise, so gradients below ~1e-6
// cannot be resolved to any relative precision and compare as absolute.
inline double rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / denom;
}

// Central-difference gradient check. loss_fn must rebuild the graph on every
// call (deterministic forward). max_coords < 0 checks every coordinate;
// otherwise up to max_coords per parameter: the largest-|grad| one plus
// seeded-random picks.
struct FdReport {
    double worst_rel = 0.0;
    std::string worst_param;
    std::size_t coords_checked = 0;
};

inline FdReport check_grads_fd(std::vector<miniens::tensor::NamedParam>& params,
                               const std::function<miniens::tensor::Tensor()>& loss_fn, double h,
                               int max_coords, miniens::Rng& rng) {
    using miniens::tensor::Tensor;
    for (auto& p : params) p.tensor.zero_grad();
    Tensor loss = loss_fn();
    miniens::tensor::backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) {
        const auto g = p.tensor.grad();
        analytic.emplace_back(g.begin(), g.end());
    }

    FdReport rep;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto data = params[pi].tensor.mutable_data();
        std::vector<std::size_t> coords;
        if (max_coords < 0 || static_cast<std::size_t>(max_coords) >= data.size()) {
            for (std::size_t i = 0; i < data.size(); ++i) coords.push_back(i);
        } else {
            std::size_t argmax = 0;
            for (std::size_t i = 1; i < data.size(); ++i) {
                if (std::abs(analytic[pi][i]) > std::abs(analytic[pi][argmax])) argmax = i;
            }
            coords.push_back(argmax);
            while (coords.size() < static_cast<std::size_t>(max_coords)) {
                coords.push_back(static_cast<std::size_t>(rng.next_below(data.size())));
            }
        }
        for (const std::size_t c : coords) {
            const double saved = data[c];
            data[c] = saved + h;
            const double up = loss_fn().item();
            data[c] = saved - h;
            const double down = loss_fn().item();
            data[c] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double re = rel_err(analytic[pi][c], numeric);
            ++rep.coords_checked;
            if (re > rep.worst_rel) {
                rep.worst_rel = re;
                rep.worst_param = params[pi].name + "[" + std::to_string(c) + "]";
            }
        }
    }
    return rep;
}

// Scratch directory unique to one test.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("miniens-test-" + tag + "-" + std::to_string(++counter));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace testutil
