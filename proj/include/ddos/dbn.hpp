#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ddos/linalg.hpp"
#include "ddos/random.hpp"
#include "ddos/rbm.hpp"

namespace ddos {

/// Stack of RBMs. Layer 0 is Gaussian-Bernoulli, the rest Bernoulli-Bernoulli,
/// and each layer's hidden width equals the next layer's visible width.
struct DbnModel {
    std::vector<RbmParams> layers;

    void validate() const;
    std::size_t input_dim() const { return layers.front().num_visible(); }
    std::size_t code_dim() const { return layers.back().num_hidden(); }
    std::vector<std::size_t> layer_sizes() const;

    bool operator==(const DbnModel&) const = default;
};

/// `layer_sizes` = {input, hidden_1, ..., hidden_k}; needs at least two entries.
DbnModel new_dbn(std::span<const std::size_t> layer_sizes, Rng& rng);

struct PretrainResult {
    DbnModel model;
    std::vector<std::vector<double>> error_traces;  // one per layer
};

/// Greedy layer-wise CD-1. Layer k trains on the mean-field transform of the
/// data through layers 0..k-1; earlier layers are left untouched.
PretrainResult pretrain(DbnModel dbn, const Matrix& data, const CdConfig& config, Rng& rng);

/// Mean-field upward pass through every layer; entries lie in (0, 1).
Vector transform(const DbnModel& dbn, std::span<const double> v);

/// Row-wise transform.
Matrix transform_rows(const DbnModel& dbn, const Matrix& data);

}  // namespace ddos
