#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddos/linalg.hpp"
#include "ddos/random.hpp"

namespace ddos {

/// Single-layer LSTM with an affine readout.
///
/// Every gate matrix is N x (N + D) and acts on the concatenation
/// [h_{t-1}, x_t]: the first N columns see the previous hidden output, the
/// last D columns see the input. The readout maps h_t to a D-dimensional
/// prediction y_t = W_y h_t + b_y.
struct LstmModel {
    std::size_t input_dim = 0;   // D
    std::size_t hidden_dim = 0;  // N
    Matrix w_f, w_i, w_c, w_o;
    Vector b_f, b_i, b_c, b_o;
    Matrix w_y;  // D x N
    Vector b_y;

    static constexpr std::size_t kNumBlocks = 10;

    /// All parameter storage in a fixed order:
    /// w_f, w_i, w_c, w_o, b_f, b_i, b_c, b_o, w_y, b_y.
    std::array<std::span<double>, kNumBlocks> blocks();
    std::array<std::span<const double>, kNumBlocks> blocks() const;

    std::size_t num_parameters() const;
    void validate() const;

    static LstmModel zeros(std::size_t input_dim, std::size_t hidden_dim);

    /// Weights ~ N(0, (0.1 / sqrt(N + D))^2); biases zero except b_f = 1.
    static LstmModel random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

    bool operator==(const LstmModel&) const = default;
};

/// Gradients share the parameter layout.
using LstmGradients = LstmModel;

struct LstmState {
    Vector h;
    Vector c;

    static LstmState zeros(std::size_t hidden_dim) { return {Vector(hidden_dim, 0.0), Vector(hidden_dim, 0.0)}; }
    bool operator==(const LstmState&) const = default;
};

struct GateValues {
    Vector f;
    Vector i;
    Vector c_tilde;
    Vector o;
};

struct CellStep {
    LstmState state;
    GateValues gates;
};

/// One step of the recurrence:
///   f = sigmoid(W_f [h, x] + b_f)      i = sigmoid(W_i [h, x] + b_i)
///   c~ = tanh(W_c [h, x] + b_c)        o = sigmoid(W_o [h, x] + b_o)
///   C = f * C_prev + i * c~            h = o * tanh(C)
CellStep cell_forward(const LstmModel& model, std::span<const double> x, const LstmState& prev);

struct ForwardCache {
    std::vector<Vector> inputs;
    std::vector<LstmState> states;  // states[0] is the initial state, states[t + 1] follows input t
    std::vector<GateValues> gates;
};

struct SequenceOutput {
    std::vector<Vector> predictions;
    ForwardCache cache;
};

SequenceOutput sequence_forward(const LstmModel& model, const std::vector<Vector>& xs, const LstmState& init);
SequenceOutput sequence_forward(const LstmModel& model, const std::vector<Vector>& xs);

/// Mean of squared differences over every step and dimension.
double loss_mse(const std::vector<Vector>& pred, const std::vector<Vector>& target);

/// Exact gradient of loss_mse(predictions, targets) with respect to every parameter.
LstmGradients backward_bptt(const LstmModel& model, const SequenceOutput& forward,
                            const std::vector<Vector>& targets);

/// Central-difference gradient of the sequence loss.
LstmGradients numeric_gradient(const LstmModel& model, const std::vector<Vector>& xs,
                               const std::vector<Vector>& targets, double eps);

/// max |a - n| / max(|a|, |n|, 1e-12) over all parameters.
double max_relative_error(const LstmGradients& analytic, const LstmGradients& numeric);

/// Compares backward_bptt against central differences; returns the max relative error.
double grad_check(const LstmModel& model, const std::vector<Vector>& xs, const std::vector<Vector>& targets,
                  double eps);

struct GradCheckCase {
    LstmModel model;
    std::vector<Vector> inputs;
    std::vector<Vector> targets;
};

/// Seeded instance with O(1) parameters and data, so every gradient entry
/// is well above finite-difference noise.
GradCheckCase random_grad_check_case(std::size_t input_dim, std::size_t hidden_dim, std::size_t steps, Rng& rng);

/// Scales `grads` in place so the global L2 norm is at most `max_norm`. Returns the pre-clip norm.
double clip_global_norm(LstmGradients& grads, double max_norm);

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 200;
    std::size_t sequence_length = 10;
    std::uint64_t rng_seed = 42;
    double gradient_clip = 5.0;

    void validate() const;
};

struct SequencePair {
    std::vector<Vector> inputs;
    std::vector<Vector> targets;
};

/// Sliding windows of length `length` over consecutive rows; each target
/// sequence is its input sequence shifted forward by one row.
std::vector<SequencePair> make_next_step_sequences(const Matrix& series, std::size_t length);

struct LstmTrainResult {
    LstmModel model;
    std::vector<double> loss_trace;  // mean sequence loss per epoch, before that epoch's update
};

/// Full-batch gradient descent with global-norm clipping. The batch
/// objective is the sum of the per-sequence losses.
LstmTrainResult train_lstm(LstmModel model, const std::vector<SequencePair>& sequences, const TrainConfig& config);

}  // namespace ddos
