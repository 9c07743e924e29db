#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddos/linalg.hpp"
#include "ddos/random.hpp"

namespace ddos {

enum class UnitKind { BernoulliBernoulli, GaussianBernoulli };

/// One RBM layer. `w` is V x H, `b` is the visible bias, `a` the hidden bias.
///
/// Gaussian visible units have unit variance, so the first layer of a stack
/// expects standardized (zero mean, unit variance) inputs.
struct RbmParams {
    UnitKind kind = UnitKind::BernoulliBernoulli;
    Matrix w;
    Vector b;
    Vector a;

    std::size_t num_visible() const { return w.rows(); }
    std::size_t num_hidden() const { return w.cols(); }

    /// Throws InputError for empty layers or inconsistent shapes, NumericError
    /// for non-finite entries.
    void validate() const;

    static RbmParams zeros(UnitKind kind, std::size_t num_visible, std::size_t num_hidden);

    /// Weights drawn from N(0, 0.01^2), biases zero.
    static RbmParams random(UnitKind kind, std::size_t num_visible, std::size_t num_hidden, Rng& rng);

    bool operator==(const RbmParams&) const = default;
};

struct CdConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 100;
    std::size_t batch_size = 10;
    std::uint64_t rng_seed = 42;

    void validate() const;
};

double energy_bernoulli(const RbmParams& params, std::span<const double> v, std::span<const double> h);

/// Gaussian-Bernoulli energy with the normalizable +1/2 (v - b)^2 term.
double energy_gaussian(const RbmParams& params, std::span<const double> v, std::span<const double> h);

/// p(h_j = 1 | v) = sigmoid(a_j + sum_i w_ij v_i), for either kind.
Vector hidden_given_visible(const RbmParams& params, std::span<const double> v);

/// Bernoulli kind: p(v_i = 1 | h). Gaussian kind: the conditional mean b_i + sum_j w_ij h_j.
Vector visible_given_hidden(const RbmParams& params, std::span<const double> h);

/// Entry i is 1 iff the i-th uniform draw is below probs[i].
Vector sample_binary(std::span<const double> probs, Rng& rng);

struct Cd1Result {
    RbmParams params;
    double reconstruction_error = 0.0;
};

/// One contrastive-divergence update on a batch (rows are visible vectors).
///
/// Hidden states are sampled from p(h|v); the reconstruction uses visible
/// probabilities (or means) without sampling, and the negative-phase hidden
/// statistics are p(h|v'). The reported error is the mean squared difference
/// between the batch and its reconstruction.
Cd1Result cd1_step(const RbmParams& params, const Matrix& batch, double learning_rate, Rng& rng);

struct RbmTrainResult {
    RbmParams params;
    std::vector<double> error_trace;  // one entry per epoch
};

/// Shuffled minibatch CD-1 for `config.epochs` epochs.
RbmTrainResult train_rbm(RbmParams params, const Matrix& data, const CdConfig& config, Rng& rng);

/// Same as above with a generator seeded from `config.rng_seed`.
RbmTrainResult train_rbm(RbmParams params, const Matrix& data, const CdConfig& config);

/// Deterministic mean-field reconstruction error: v -> p(h|v) -> p(v|h).
double reconstruction_error(const RbmParams& params, const Matrix& data);

}  // namespace ddos
