#include "ddos/dbn.hpp"

#include <string>

#include "ddos/errors.hpp"

namespace ddos {

void DbnModel::validate() const {
    if (layers.empty()) {
        throw InputError("DBN has no layers");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].validate();
        const UnitKind expected = k == 0 ? UnitKind::GaussianBernoulli : UnitKind::BernoulliBernoulli;
        if (layers[k].kind != expected) {
            throw InputError("DBN layer " + std::to_string(k) + " has the wrong unit kind");
        }
        if (k > 0 && layers[k - 1].num_hidden() != layers[k].num_visible()) {
            throw InputError("DBN layer " + std::to_string(k) + " input width does not match layer " +
                             std::to_string(k - 1) + " output width");
        }
    }
}

std::vector<std::size_t> DbnModel::layer_sizes() const {
    std::vector<std::size_t> sizes;
    if (layers.empty()) {
        return sizes;
    }
    sizes.push_back(input_dim());
    for (const auto& l : layers) {
        sizes.push_back(l.num_hidden());
    }
    return sizes;
}

DbnModel new_dbn(std::span<const std::size_t> layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 2) {
        throw InputError("DBN needs an input size and at least one hidden size");
    }
    DbnModel dbn;
    for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
        if (layer_sizes[k] == 0 || layer_sizes[k + 1] == 0) {
            throw InputError("DBN layer sizes must be positive");
        }
        const UnitKind kind = k == 0 ? UnitKind::GaussianBernoulli : UnitKind::BernoulliBernoulli;
        dbn.layers.push_back(RbmParams::random(kind, layer_sizes[k], layer_sizes[k + 1], rng));
    }
    return dbn;
}

PretrainResult pretrain(DbnModel dbn, const Matrix& data, const CdConfig& config, Rng& rng) {
    dbn.validate();
    require_size(data.cols(), dbn.input_dim(), "pretrain data width");

    PretrainResult result{std::move(dbn), {}};
    Matrix layer_input = data;
    for (std::size_t k = 0; k < result.model.layers.size(); ++k) {
        try {
            RbmTrainResult trained = train_rbm(result.model.layers[k], layer_input, config, rng);
            result.model.layers[k] = std::move(trained.params);
            result.error_traces.push_back(std::move(trained.error_trace));
        } catch (const NumericError& e) {
            throw NumericError("DBN layer " + std::to_string(k) + ": " + e.what());
        }
        if (k + 1 < result.model.layers.size()) {
            Matrix next;
            for (std::size_t r = 0; r < layer_input.rows(); ++r) {
                next.append_row(hidden_given_visible(result.model.layers[k], layer_input.row(r)));
            }
            layer_input = std::move(next);
        }
    }
    return result;
}

Vector transform(const DbnModel& dbn, std::span<const double> v) {
    if (dbn.layers.empty()) {
        throw InputError("transform: DBN has no layers");
    }
    require_size(v.size(), dbn.input_dim(), "transform input");
    Vector x(v.begin(), v.end());
    for (const auto& layer : dbn.layers) {
        x = hidden_given_visible(layer, x);
    }
    return x;
}

Matrix transform_rows(const DbnModel& dbn, const Matrix& data) {
    Matrix out;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        out.append_row(transform(dbn, data.row(r)));
    }
    return out;
}

}  // namespace ddos
