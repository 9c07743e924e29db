#include "ddos/rbm.hpp"

#include <numeric>
#include <string>

#include "ddos/errors.hpp"

namespace ddos {

namespace {

void require_kind(const RbmParams& params, UnitKind kind, std::string_view op) {
    if (params.kind != kind) {
        throw InputError(std::string(op) + ": wrong RBM kind");
    }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::swap(idx[i - 1], idx[rng.index(i)]);
    }
    return idx;
}

}  // namespace

void RbmParams::validate() const {
    if (num_visible() == 0 || num_hidden() == 0) {
        throw InputError("RBM layer needs at least one visible and one hidden unit");
    }
    require_size(b.size(), num_visible(), "visible bias");
    require_size(a.size(), num_hidden(), "hidden bias");
    require_finite(w.values(), "RBM weights");
    require_finite(b, "RBM visible bias");
    require_finite(a, "RBM hidden bias");
}

RbmParams RbmParams::zeros(UnitKind kind, std::size_t num_visible, std::size_t num_hidden) {
    RbmParams p{kind, Matrix(num_visible, num_hidden), Vector(num_visible, 0.0), Vector(num_hidden, 0.0)};
    p.validate();
    return p;
}

RbmParams RbmParams::random(UnitKind kind, std::size_t num_visible, std::size_t num_hidden, Rng& rng) {
    RbmParams p = zeros(kind, num_visible, num_hidden);
    for (double& x : p.w.values()) {
        x = rng.normal(0.0, 0.01);
    }
    return p;
}

void CdConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InputError("CD learning rate must be positive");
    }
    if (batch_size == 0) {
        throw InputError("CD batch size must be at least 1");
    }
}

double energy_bernoulli(const RbmParams& params, std::span<const double> v, std::span<const double> h) {
    require_kind(params, UnitKind::BernoulliBernoulli, "energy_bernoulli");
    require_size(v.size(), params.num_visible(), "visible vector");
    require_size(h.size(), params.num_hidden(), "hidden vector");
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto wi = params.w.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) {
            s += wi[j] * h[j];
        }
        e -= v[i] * s;
        e -= params.b[i] * v[i];
    }
    for (std::size_t j = 0; j < h.size(); ++j) {
        e -= params.a[j] * h[j];
    }
    return e;
}

double energy_gaussian(const RbmParams& params, std::span<const double> v, std::span<const double> h) {
    require_kind(params, UnitKind::GaussianBernoulli, "energy_gaussian");
    require_size(v.size(), params.num_visible(), "visible vector");
    require_size(h.size(), params.num_hidden(), "hidden vector");
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto wi = params.w.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) {
            s += wi[j] * h[j];
        }
        const double d = v[i] - params.b[i];
        e += 0.5 * d * d - v[i] * s;
    }
    for (std::size_t j = 0; j < h.size(); ++j) {
        e -= params.a[j] * h[j];
    }
    return e;
}

Vector hidden_given_visible(const RbmParams& params, std::span<const double> v) {
    require_size(v.size(), params.num_visible(), "visible vector");
    require_finite(v, "hidden_given_visible input");
    Vector act = params.a;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double vi = v[i];
        const auto wi = params.w.row(i);
        for (std::size_t j = 0; j < act.size(); ++j) {
            act[j] += wi[j] * vi;
        }
    }
    for (double& x : act) {
        x = sigmoid(x);
    }
    return act;
}

Vector visible_given_hidden(const RbmParams& params, std::span<const double> h) {
    require_size(h.size(), params.num_hidden(), "hidden vector");
    require_finite(h, "visible_given_hidden input");
    Vector out(params.num_visible());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto wi = params.w.row(i);
        double act = params.b[i];
        for (std::size_t j = 0; j < h.size(); ++j) {
            act += wi[j] * h[j];
        }
        out[i] = params.kind == UnitKind::BernoulliBernoulli ? sigmoid(act) : act;
    }
    return out;
}

Vector sample_binary(std::span<const double> probs, Rng& rng) {
    Vector out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InputError("sample_binary: probability " + std::to_string(p) + " outside [0, 1]");
        }
        out[i] = rng.uniform() < p ? 1.0 : 0.0;
    }
    return out;
}

Cd1Result cd1_step(const RbmParams& params, const Matrix& batch, double learning_rate, Rng& rng) {
    const std::size_t nv = params.num_visible();
    const std::size_t nh = params.num_hidden();
    if (batch.rows() == 0) {
        throw InputError("cd1_step: empty batch");
    }
    require_size(batch.cols(), nv, "cd1_step batch width");

    Matrix dw(nv, nh);
    Vector db(nv, 0.0);
    Vector da(nh, 0.0);
    double sq_err = 0.0;

    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const auto v0 = batch.row(r);
        const Vector ph0 = hidden_given_visible(params, v0);
        const Vector h0 = sample_binary(ph0, rng);
        const Vector v1 = visible_given_hidden(params, h0);
        const Vector ph1 = hidden_given_visible(params, v1);
        for (std::size_t i = 0; i < nv; ++i) {
            auto dwi = dw.row(i);
            for (std::size_t j = 0; j < nh; ++j) {
                dwi[j] += v0[i] * ph0[j] - v1[i] * ph1[j];
            }
            db[i] += v0[i] - v1[i];
            const double d = v0[i] - v1[i];
            sq_err += d * d;
        }
        for (std::size_t j = 0; j < nh; ++j) {
            da[j] += ph0[j] - ph1[j];
        }
    }

    const double scale = learning_rate / static_cast<double>(batch.rows());
    Cd1Result result{params, sq_err / static_cast<double>(batch.rows() * nv)};
    auto w = result.params.w.values();
    const auto g = dw.values();
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] += scale * g[k];
    }
    for (std::size_t i = 0; i < nv; ++i) {
        result.params.b[i] += scale * db[i];
    }
    for (std::size_t j = 0; j < nh; ++j) {
        result.params.a[j] += scale * da[j];
    }

    require_finite(result.params.w.values(), "cd1_step weights");
    require_finite(result.params.b, "cd1_step visible bias");
    require_finite(result.params.a, "cd1_step hidden bias");
    if (!std::isfinite(result.reconstruction_error)) {
        throw NumericError("cd1_step: non-finite reconstruction error");
    }
    return result;
}

RbmTrainResult train_rbm(RbmParams params, const Matrix& data, const CdConfig& config, Rng& rng) {
    config.validate();
    params.validate();
    if (data.rows() == 0) {
        throw InputError("train_rbm: empty data");
    }
    require_size(data.cols(), params.num_visible(), "train_rbm data width");

    RbmTrainResult result{std::move(params), {}};
    result.error_trace.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = shuffled_indices(data.rows(), rng);
        double err_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            Matrix batch;
            for (std::size_t k = start; k < end; ++k) {
                batch.append_row(data.row(order[k]));
            }
            try {
                Cd1Result step = cd1_step(result.params, batch, config.learning_rate, rng);
                result.params = std::move(step.params);
                err_sum += step.reconstruction_error * static_cast<double>(end - start);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index) + ")");
            }
        }
        result.error_trace.push_back(err_sum / static_cast<double>(data.rows()));
    }
    return result;
}

RbmTrainResult train_rbm(RbmParams params, const Matrix& data, const CdConfig& config) {
    Rng rng(config.rng_seed);
    return train_rbm(std::move(params), data, config, rng);
}

double reconstruction_error(const RbmParams& params, const Matrix& data) {
    if (data.rows() == 0) {
        throw InputError("reconstruction_error: empty data");
    }
    require_size(data.cols(), params.num_visible(), "reconstruction_error data width");
    double sq = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto v = data.row(r);
        const Vector recon = visible_given_hidden(params, hidden_given_visible(params, v));
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double d = v[i] - recon[i];
            sq += d * d;
        }
    }
    return sq / static_cast<double>(data.size());
}

}  // namespace ddos
