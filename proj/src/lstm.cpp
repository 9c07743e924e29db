#include "ddos/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ddos/errors.hpp"

namespace ddos {

namespace {

// out = W [h, x] + bias, with W of shape N x (N + D).
void affine_concat(const Matrix& w, std::span<const double> bias, std::span<const double> h,
                   std::span<const double> x, std::span<double> out) {
    const std::size_t n = h.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        const auto wr = w.row(r);
        double s = bias[r];
        for (std::size_t k = 0; k < n; ++k) {
            s += wr[k] * h[k];
        }
        for (std::size_t k = 0; k < x.size(); ++k) {
            s += wr[n + k] * x[k];
        }
        out[r] = s;
    }
}

// grad_w += delta [h, x]^T ; grad_b += delta ; dz += W^T delta
void accumulate_gate(const Matrix& w, std::span<const double> delta, std::span<const double> h,
                     std::span<const double> x, Matrix& grad_w, std::span<double> grad_b, std::span<double> dz) {
    const std::size_t n = h.size();
    for (std::size_t r = 0; r < delta.size(); ++r) {
        const double d = delta[r];
        auto gr = grad_w.row(r);
        const auto wr = w.row(r);
        for (std::size_t k = 0; k < n; ++k) {
            gr[k] += d * h[k];
            dz[k] += d * wr[k];
        }
        for (std::size_t k = 0; k < x.size(); ++k) {
            gr[n + k] += d * x[k];
            dz[n + k] += d * wr[n + k];
        }
        grad_b[r] += d;
    }
}

void check_sequence(const LstmModel& model, const std::vector<Vector>& xs, std::string_view what) {
    if (xs.empty()) {
        throw InputError(std::string(what) + ": empty sequence");
    }
    for (const auto& x : xs) {
        require_size(x.size(), model.input_dim, what);
    }
}

}  // namespace

std::array<std::span<double>, LstmModel::kNumBlocks> LstmModel::blocks() {
    return {w_f.values(), w_i.values(), w_c.values(), w_o.values(), std::span<double>(b_f),
            std::span<double>(b_i), std::span<double>(b_c), std::span<double>(b_o), w_y.values(),
            std::span<double>(b_y)};
}

std::array<std::span<const double>, LstmModel::kNumBlocks> LstmModel::blocks() const {
    return {w_f.values(), w_i.values(), w_c.values(), w_o.values(), std::span<const double>(b_f),
            std::span<const double>(b_i), std::span<const double>(b_c), std::span<const double>(b_o),
            w_y.values(), std::span<const double>(b_y)};
}

std::size_t LstmModel::num_parameters() const {
    std::size_t n = 0;
    for (const auto& b : blocks()) {
        n += b.size();
    }
    return n;
}

void LstmModel::validate() const {
    if (input_dim == 0 || hidden_dim == 0) {
        throw InputError("LSTM dimensions must be positive");
    }
    const std::size_t n = hidden_dim;
    const std::size_t z = hidden_dim + input_dim;
    for (const Matrix* w : {&w_f, &w_i, &w_c, &w_o}) {
        if (w->rows() != n || w->cols() != z) {
            throw InputError("LSTM gate matrix has the wrong shape");
        }
    }
    for (const Vector* b : {&b_f, &b_i, &b_c, &b_o}) {
        require_size(b->size(), n, "LSTM gate bias");
    }
    if (w_y.rows() != input_dim || w_y.cols() != n) {
        throw InputError("LSTM readout matrix has the wrong shape");
    }
    require_size(b_y.size(), input_dim, "LSTM readout bias");
    for (const auto& b : blocks()) {
        require_finite(b, "LSTM parameters");
    }
}

LstmModel LstmModel::zeros(std::size_t input_dim, std::size_t hidden_dim) {
    const std::size_t z = input_dim + hidden_dim;
    LstmModel m;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_dim;
    m.w_f = m.w_i = m.w_c = m.w_o = Matrix(hidden_dim, z);
    m.b_f = m.b_i = m.b_c = m.b_o = Vector(hidden_dim, 0.0);
    m.w_y = Matrix(input_dim, hidden_dim);
    m.b_y = Vector(input_dim, 0.0);
    m.validate();
    return m;
}

LstmModel LstmModel::random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    LstmModel m = zeros(input_dim, hidden_dim);
    const double stddev = 0.1 / std::sqrt(static_cast<double>(input_dim + hidden_dim));
    for (Matrix* w : {&m.w_f, &m.w_i, &m.w_c, &m.w_o, &m.w_y}) {
        for (double& x : w->values()) {
            x = rng.normal(0.0, stddev);
        }
    }
    std::fill(m.b_f.begin(), m.b_f.end(), 1.0);
    return m;
}

CellStep cell_forward(const LstmModel& model, std::span<const double> x, const LstmState& prev) {
    const std::size_t n = model.hidden_dim;
    require_size(x.size(), model.input_dim, "cell_forward input");
    require_size(prev.h.size(), n, "cell_forward previous h");
    require_size(prev.c.size(), n, "cell_forward previous c");
    require_finite(x, "cell_forward input");

    CellStep step{LstmState::zeros(n), {Vector(n), Vector(n), Vector(n), Vector(n)}};
    GateValues& g = step.gates;
    affine_concat(model.w_f, model.b_f, prev.h, x, g.f);
    affine_concat(model.w_i, model.b_i, prev.h, x, g.i);
    affine_concat(model.w_c, model.b_c, prev.h, x, g.c_tilde);
    affine_concat(model.w_o, model.b_o, prev.h, x, g.o);
    for (std::size_t k = 0; k < n; ++k) {
        g.f[k] = sigmoid(g.f[k]);
        g.i[k] = sigmoid(g.i[k]);
        g.c_tilde[k] = std::tanh(g.c_tilde[k]);
        g.o[k] = sigmoid(g.o[k]);
        step.state.c[k] = g.f[k] * prev.c[k] + g.i[k] * g.c_tilde[k];
        step.state.h[k] = g.o[k] * std::tanh(step.state.c[k]);
    }
    require_finite(step.state.c, "cell_forward cell state");
    require_finite(step.state.h, "cell_forward hidden output");
    return step;
}

SequenceOutput sequence_forward(const LstmModel& model, const std::vector<Vector>& xs, const LstmState& init) {
    check_sequence(model, xs, "sequence_forward input");
    SequenceOutput out;
    out.cache.inputs = xs;
    out.cache.states.reserve(xs.size() + 1);
    out.cache.gates.reserve(xs.size());
    out.cache.states.push_back(init);
    out.predictions.reserve(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
        CellStep step;
        try {
            step = cell_forward(model, xs[t], out.cache.states.back());
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " at step " + std::to_string(t));
        }
        Vector y = model.b_y;
        for (std::size_t d = 0; d < y.size(); ++d) {
            const auto wd = model.w_y.row(d);
            for (std::size_t k = 0; k < model.hidden_dim; ++k) {
                y[d] += wd[k] * step.state.h[k];
            }
        }
        out.predictions.push_back(std::move(y));
        out.cache.states.push_back(std::move(step.state));
        out.cache.gates.push_back(std::move(step.gates));
    }
    return out;
}

SequenceOutput sequence_forward(const LstmModel& model, const std::vector<Vector>& xs) {
    return sequence_forward(model, xs, LstmState::zeros(model.hidden_dim));
}

double loss_mse(const std::vector<Vector>& pred, const std::vector<Vector>& target) {
    require_size(pred.size(), target.size(), "loss_mse sequence length");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        require_size(pred[t].size(), target[t].size(), "loss_mse step width");
        for (std::size_t d = 0; d < pred[t].size(); ++d) {
            const double diff = pred[t][d] - target[t][d];
            sum += diff * diff;
        }
        count += pred[t].size();
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

LstmGradients backward_bptt(const LstmModel& model, const SequenceOutput& forward,
                            const std::vector<Vector>& targets) {
    const std::size_t steps = forward.predictions.size();
    const std::size_t n = model.hidden_dim;
    const std::size_t dim = model.input_dim;
    require_size(targets.size(), steps, "backward_bptt targets");
    for (const auto& t : targets) {
        require_size(t.size(), dim, "backward_bptt target width");
    }

    LstmGradients g = LstmGradients::zeros(dim, n);
    const double scale = 2.0 / static_cast<double>(steps * dim);
    Vector dh_next(n, 0.0);
    Vector dc_next(n, 0.0);
    Vector dy(dim), dh(n), dc(n);
    Vector d_f(n), d_i(n), d_c(n), d_o(n);
    Vector dz(n + dim);

    for (std::size_t t = steps; t-- > 0;) {
        const LstmState& prev = forward.cache.states[t];
        const LstmState& cur = forward.cache.states[t + 1];
        const GateValues& gv = forward.cache.gates[t];
        const Vector& x = forward.cache.inputs[t];

        for (std::size_t d = 0; d < dim; ++d) {
            dy[d] = scale * (forward.predictions[t][d] - targets[t][d]);
        }
        dh = dh_next;
        for (std::size_t d = 0; d < dim; ++d) {
            auto gy = g.w_y.row(d);
            const auto wy = model.w_y.row(d);
            for (std::size_t k = 0; k < n; ++k) {
                gy[k] += dy[d] * cur.h[k];
                dh[k] += wy[k] * dy[d];
            }
            g.b_y[d] += dy[d];
        }

        for (std::size_t k = 0; k < n; ++k) {
            const double tc = std::tanh(cur.c[k]);
            dc[k] = dh[k] * gv.o[k] * (1.0 - tc * tc) + dc_next[k];
            d_o[k] = dh[k] * tc * gv.o[k] * (1.0 - gv.o[k]);
            d_f[k] = dc[k] * prev.c[k] * gv.f[k] * (1.0 - gv.f[k]);
            d_i[k] = dc[k] * gv.c_tilde[k] * gv.i[k] * (1.0 - gv.i[k]);
            d_c[k] = dc[k] * gv.i[k] * (1.0 - gv.c_tilde[k] * gv.c_tilde[k]);
            dc_next[k] = dc[k] * gv.f[k];
        }

        std::fill(dz.begin(), dz.end(), 0.0);
        accumulate_gate(model.w_f, d_f, prev.h, x, g.w_f, g.b_f, dz);
        accumulate_gate(model.w_i, d_i, prev.h, x, g.w_i, g.b_i, dz);
        accumulate_gate(model.w_c, d_c, prev.h, x, g.w_c, g.b_c, dz);
        accumulate_gate(model.w_o, d_o, prev.h, x, g.w_o, g.b_o, dz);
        std::copy(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(n), dh_next.begin());
    }

    for (const auto& b : g.blocks()) {
        require_finite(b, "backward_bptt gradient");
    }
    return g;
}

LstmGradients numeric_gradient(const LstmModel& model, const std::vector<Vector>& xs,
                               const std::vector<Vector>& targets, double eps) {
    if (!(eps > 0.0)) {
        throw InputError("finite-difference step must be positive");
    }
    LstmModel probe = model;
    LstmGradients g = LstmGradients::zeros(model.input_dim, model.hidden_dim);
    auto probe_blocks = probe.blocks();
    auto grad_blocks = g.blocks();
    for (std::size_t b = 0; b < LstmModel::kNumBlocks; ++b) {
        for (std::size_t k = 0; k < probe_blocks[b].size(); ++k) {
            double& p = probe_blocks[b][k];
            const double saved = p;
            p = saved + eps;
            const double up = loss_mse(sequence_forward(probe, xs).predictions, targets);
            p = saved - eps;
            const double down = loss_mse(sequence_forward(probe, xs).predictions, targets);
            p = saved;
            grad_blocks[b][k] = (up - down) / (2.0 * eps);
        }
    }
    return g;
}

double max_relative_error(const LstmGradients& analytic, const LstmGradients& numeric) {
    const auto ab = analytic.blocks();
    const auto nb = numeric.blocks();
    double worst = 0.0;
    for (std::size_t b = 0; b < LstmModel::kNumBlocks; ++b) {
        require_size(ab[b].size(), nb[b].size(), "gradient block");
        for (std::size_t k = 0; k < ab[b].size(); ++k) {
            const double a = ab[b][k];
            const double n = nb[b][k];
            const double denom = std::max({std::abs(a), std::abs(n), 1e-12});
            worst = std::max(worst, std::abs(a - n) / denom);
        }
    }
    return worst;
}

double grad_check(const LstmModel& model, const std::vector<Vector>& xs, const std::vector<Vector>& targets,
                  double eps) {
    const LstmGradients analytic = backward_bptt(model, sequence_forward(model, xs), targets);
    return max_relative_error(analytic, numeric_gradient(model, xs, targets, eps));
}

GradCheckCase random_grad_check_case(std::size_t input_dim, std::size_t hidden_dim, std::size_t steps, Rng& rng) {
    GradCheckCase c{LstmModel::zeros(input_dim, hidden_dim), {}, {}};
    for (auto block : c.model.blocks()) {
        for (double& p : block) {
            p = rng.uniform(-0.8, 0.8);
        }
    }
    for (std::size_t t = 0; t < steps; ++t) {
        Vector x(input_dim), y(input_dim);
        for (std::size_t d = 0; d < input_dim; ++d) {
            x[d] = rng.normal();
            y[d] = rng.normal();
        }
        c.inputs.push_back(std::move(x));
        c.targets.push_back(std::move(y));
    }
    return c;
}

double clip_global_norm(LstmGradients& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& b : std::as_const(grads).blocks()) {
        for (double x : b) {
            sq += x * x;
        }
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto b : grads.blocks()) {
            for (double& x : b) {
                x *= scale;
            }
        }
    }
    return norm;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InputError("LSTM learning rate must be non-negative");
    }
    if (sequence_length < 2) {
        throw InputError("LSTM sequence length must be at least 2");
    }
    if (!(gradient_clip > 0.0)) {
        throw InputError("gradient clip must be positive");
    }
}

std::vector<SequencePair> make_next_step_sequences(const Matrix& series, std::size_t length) {
    if (length == 0 || series.rows() < length + 1) {
        throw InputError("next-step sequences of length " + std::to_string(length) + " need at least " +
                         std::to_string(length + 1) + " rows, got " + std::to_string(series.rows()));
    }
    std::vector<SequencePair> out;
    for (std::size_t s = 0; s + length < series.rows(); ++s) {
        SequencePair p;
        for (std::size_t t = 0; t < length; ++t) {
            const auto in = series.row(s + t);
            const auto tg = series.row(s + t + 1);
            p.inputs.emplace_back(in.begin(), in.end());
            p.targets.emplace_back(tg.begin(), tg.end());
        }
        out.push_back(std::move(p));
    }
    return out;
}

LstmTrainResult train_lstm(LstmModel model, const std::vector<SequencePair>& sequences, const TrainConfig& config) {
    config.validate();
    model.validate();
    if (sequences.empty()) {
        throw InputError("train_lstm: no training sequences");
    }
    for (const auto& s : sequences) {
        check_sequence(model, s.inputs, "train_lstm input");
        check_sequence(model, s.targets, "train_lstm target");
        require_size(s.targets.size(), s.inputs.size(), "train_lstm target length");
    }

    LstmTrainResult result{std::move(model), {}};
    result.loss_trace.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        LstmGradients total = LstmGradients::zeros(result.model.input_dim, result.model.hidden_dim);
        double loss_sum = 0.0;
        for (std::size_t s = 0; s < sequences.size(); ++s) {
            try {
                const SequenceOutput fwd = sequence_forward(result.model, sequences[s].inputs);
                loss_sum += loss_mse(fwd.predictions, sequences[s].targets);
                const LstmGradients g = backward_bptt(result.model, fwd, sequences[s].targets);
                auto tb = total.blocks();
                const auto gb = g.blocks();
                for (std::size_t b = 0; b < LstmModel::kNumBlocks; ++b) {
                    for (std::size_t k = 0; k < tb[b].size(); ++k) {
                        tb[b][k] += gb[b][k];
                    }
                }
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", sequence " +
                                   std::to_string(s) + ")");
            }
        }
        result.loss_trace.push_back(loss_sum / static_cast<double>(sequences.size()));

        clip_global_norm(total, config.gradient_clip);
        auto pb = result.model.blocks();
        const auto gb = std::as_const(total).blocks();
        for (std::size_t b = 0; b < LstmModel::kNumBlocks; ++b) {
            for (std::size_t k = 0; k < pb[b].size(); ++k) {
                pb[b][k] -= config.learning_rate * gb[b][k];
            }
        }
        for (const auto& b : std::as_const(result.model).blocks()) {
            if (!all_finite(b)) {
                throw NumericError("train_lstm: non-finite parameter after epoch " + std::to_string(epoch));
            }
        }
    }
    return result;
}

}  // namespace ddos
