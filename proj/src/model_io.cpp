#include "ddos/model_io.hpp"

#include <fstream>
#include <sstream>

#include "ddos/errors.hpp"

namespace ddos {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) {
        throw InputError("model: matrix data has the wrong length");
    }
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.values().begin());
    return m;
}

std::string_view kind_name(UnitKind k) {
    return k == UnitKind::GaussianBernoulli ? "GaussianBernoulli" : "BernoulliBernoulli";
}

UnitKind kind_from(const std::string& s) {
    if (s == "GaussianBernoulli") return UnitKind::GaussianBernoulli;
    if (s == "BernoulliBernoulli") return UnitKind::BernoulliBernoulli;
    throw InputError("model: unknown RBM kind '" + s + "'");
}

json lstm_json(const LstmModel& m) {
    return {{"input_dim", m.input_dim},
            {"hidden_dim", m.hidden_dim},
            {"w_f", matrix_json(m.w_f)},
            {"w_i", matrix_json(m.w_i)},
            {"w_c", matrix_json(m.w_c)},
            {"w_o", matrix_json(m.w_o)},
            {"b_f", m.b_f},
            {"b_i", m.b_i},
            {"b_c", m.b_c},
            {"b_o", m.b_o},
            {"w_y", matrix_json(m.w_y)},
            {"b_y", m.b_y}};
}

LstmModel lstm_from(const json& j) {
    LstmModel m;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.w_f = matrix_from(j.at("w_f"));
    m.w_i = matrix_from(j.at("w_i"));
    m.w_c = matrix_from(j.at("w_c"));
    m.w_o = matrix_from(j.at("w_o"));
    m.b_f = j.at("b_f").get<Vector>();
    m.b_i = j.at("b_i").get<Vector>();
    m.b_c = j.at("b_c").get<Vector>();
    m.b_o = j.at("b_o").get<Vector>();
    m.w_y = matrix_from(j.at("w_y"));
    m.b_y = j.at("b_y").get<Vector>();
    return m;
}

}  // namespace

json model_to_json(const DetectorModel& model) {
    json layers = json::array();
    for (const auto& l : model.dbn.layers) {
        layers.push_back({{"kind", kind_name(l.kind)},
                          {"num_visible", l.num_visible()},
                          {"num_hidden", l.num_hidden()},
                          {"w", matrix_json(l.w)},
                          {"b", l.b},
                          {"a", l.a}});
    }
    return {{"schema_version", kModelSchemaVersion},
            {"config", config_to_json(model.config)},
            {"normalizer",
             {{"min", model.normalizer.min},
              {"max", model.normalizer.max},
              {"mean", model.normalizer.mean},
              {"stddev", model.normalizer.stddev}}},
            {"dbn", {{"layers", layers}}},
            {"lstm", lstm_json(model.lstm)},
            {"threshold", model.threshold},
            {"residual_stats", {{"mean", model.residual_stats.mean}, {"stddev", model.residual_stats.stddev}}}};
}

DetectorModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw InputError("model: missing schema_version");
    }
    const int version = j["schema_version"].get<int>();
    if (version != kModelSchemaVersion) {
        throw InputError("model: unsupported schema_version " + std::to_string(version) + " (expected " +
                         std::to_string(kModelSchemaVersion) + ")");
    }
    DetectorModel m;
    try {
        m.config = config_from_json(j.at("config"));
        const json& n = j.at("normalizer");
        m.normalizer.min = n.at("min").get<Vector>();
        m.normalizer.max = n.at("max").get<Vector>();
        m.normalizer.mean = n.at("mean").get<Vector>();
        m.normalizer.stddev = n.at("stddev").get<Vector>();
        for (const auto& l : j.at("dbn").at("layers")) {
            RbmParams p{kind_from(l.at("kind").get<std::string>()), matrix_from(l.at("w")), l.at("b").get<Vector>(),
                        l.at("a").get<Vector>()};
            if (p.num_visible() != l.at("num_visible").get<std::size_t>() ||
                p.num_hidden() != l.at("num_hidden").get<std::size_t>()) {
                throw InputError("model: RBM layer shape disagrees with its weights");
            }
            m.dbn.layers.push_back(std::move(p));
        }
        m.lstm = lstm_from(j.at("lstm"));
        m.threshold = j.at("threshold").get<double>();
        m.residual_stats.mean = j.at("residual_stats").at("mean").get<double>();
        m.residual_stats.stddev = j.at("residual_stats").at("stddev").get<double>();
    } catch (const json::exception& e) {
        throw InputError(std::string("model: ") + e.what());
    }
    try {
        m.validate();
    } catch (const NumericError& e) {
        throw InputError(std::string("model: ") + e.what());
    }
    return m;
}

std::string serialize_model(const DetectorModel& model) {
    return model_to_json(model).dump(2) + "\n";
}

void save_model(const std::filesystem::path& path, const DetectorModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write model file " + path.string());
    }
    out << serialize_model(model);
    if (!out) {
        throw InputError("failed writing model file " + path.string());
    }
}

DetectorModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read model file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace ddos
