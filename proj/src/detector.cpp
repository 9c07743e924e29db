#include "ddos/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "ddos/errors.hpp"

namespace ddos {

namespace {

constexpr std::string_view kReportHeader = "window_index,residual,alarm,scored";

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

void require_positive(double x, std::string_view name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw InputError("config: " + std::string(name) + " must be positive");
    }
}

void require_windows(std::size_t have, std::size_t lookback, std::string_view what) {
    if (have < lookback + 1) {
        throw InputError(std::string(what) + ": " + std::to_string(have) + " windows, need at least " +
                         std::to_string(lookback + 1) + " (lookback + 1)");
    }
}

}  // namespace

void RunConfig::validate() const {
    require_positive(window_len, "window_len");
    require_positive(k, "k");
    require_positive(rbm_lr, "rbm_lr");
    require_positive(lstm_lr, "lstm_lr");
    require_positive(gradient_clip, "gradient_clip");
    if (dbn_sizes.size() < 2 || std::find(dbn_sizes.begin(), dbn_sizes.end(), 0u) != dbn_sizes.end()) {
        throw InputError("config: dbn_sizes needs at least two positive sizes");
    }
    if (dbn_sizes.front() != kFeatureDim) {
        throw InputError("config: dbn_sizes must start with the feature dimension " + std::to_string(kFeatureDim));
    }
    if (lstm_hidden == 0 || lookback == 0 || rbm_epochs == 0 || rbm_batch_size == 0 || lstm_epochs == 0) {
        throw InputError("config: counts must be positive");
    }
    if (!(train_split > 0.0 && train_split < 1.0)) {
        throw InputError("config: train_split must lie in (0, 1)");
    }
}

nlohmann::json config_to_json(const RunConfig& c) {
    return {{"window_len", c.window_len},   {"dbn_sizes", c.dbn_sizes},
            {"lstm_hidden", c.lstm_hidden}, {"lookback", c.lookback},
            {"k", c.k},                     {"rbm_epochs", c.rbm_epochs},
            {"rbm_lr", c.rbm_lr},           {"rbm_batch_size", c.rbm_batch_size},
            {"lstm_epochs", c.lstm_epochs}, {"lstm_lr", c.lstm_lr},
            {"gradient_clip", c.gradient_clip}, {"seed", c.seed},
            {"train_split", c.train_split}};
}

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw InputError("config must be a JSON object");
    }
    RunConfig c;
    const nlohmann::json known = config_to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw InputError("config: unknown field '" + key + "'");
        }
    }
    try {
        c.window_len = j.value("window_len", c.window_len);
        c.dbn_sizes = j.value("dbn_sizes", c.dbn_sizes);
        c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
        c.lookback = j.value("lookback", c.lookback);
        c.k = j.value("k", c.k);
        c.rbm_epochs = j.value("rbm_epochs", c.rbm_epochs);
        c.rbm_lr = j.value("rbm_lr", c.rbm_lr);
        c.rbm_batch_size = j.value("rbm_batch_size", c.rbm_batch_size);
        c.lstm_epochs = j.value("lstm_epochs", c.lstm_epochs);
        c.lstm_lr = j.value("lstm_lr", c.lstm_lr);
        c.gradient_clip = j.value("gradient_clip", c.gradient_clip);
        c.seed = j.value("seed", c.seed);
        c.train_split = j.value("train_split", c.train_split);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

void DetectorModel::validate() const {
    config.validate();
    dbn.validate();
    lstm.validate();
    if (normalizer.dim() != kFeatureDim || normalizer.max.size() != kFeatureDim ||
        normalizer.mean.size() != kFeatureDim || normalizer.stddev.size() != kFeatureDim) {
        throw InputError("model: normalizer dimension mismatch");
    }
    if (dbn.input_dim() != normalizer.dim()) {
        throw InputError("model: DBN input does not match the feature dimension");
    }
    if (dbn.layer_sizes() != config.dbn_sizes) {
        throw InputError("model: DBN layer sizes disagree with the config");
    }
    if (lstm.input_dim != dbn.code_dim() || lstm.hidden_dim != config.lstm_hidden) {
        throw InputError("model: LSTM dimensions do not chain with the DBN");
    }
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
        throw InputError("model: threshold must be non-negative");
    }
}

std::pair<std::vector<PacketRecord>, std::vector<PacketRecord>> split_by_time(
    const std::vector<PacketRecord>& records, double fraction, double window_len) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InputError("split fraction must lie in (0, 1)");
    }
    if (records.empty()) {
        return {};
    }
    double last = 0.0;
    for (const auto& r : records) {
        last = std::max(last, r.timestamp);
    }
    const auto windows = static_cast<std::size_t>(std::floor(last / window_len)) + 1;
    const auto boundary_window = static_cast<std::size_t>(std::floor(static_cast<double>(windows) * fraction));
    const double boundary = static_cast<double>(boundary_window) * window_len;
    std::pair<std::vector<PacketRecord>, std::vector<PacketRecord>> out;
    for (const auto& r : records) {
        if (r.timestamp < boundary) {
            out.first.push_back(r);
        } else {
            PacketRecord shifted = r;
            shifted.timestamp = std::max(0.0, r.timestamp - boundary);
            out.second.push_back(shifted);
        }
    }
    return out;
}

Matrix encode(const DetectorModel& model, const std::vector<PacketRecord>& packets) {
    const Matrix features = featurize(packets, model.window_len());
    return transform_rows(model.dbn, standardize_rows(model.normalizer, features));
}

double rms_residual(std::span<const double> predicted, std::span<const double> actual) {
    require_size(predicted.size(), actual.size(), "residual");
    double sq = 0.0;
    for (std::size_t d = 0; d < actual.size(); ++d) {
        const double diff = predicted[d] - actual[d];
        sq += diff * diff;
    }
    return std::sqrt(sq / static_cast<double>(actual.size()));
}

std::vector<WindowScore> score_codes(const DetectorModel& model, const Matrix& codes) {
    const std::size_t lookback = model.lookback();
    require_windows(codes.rows(), lookback, "score");
    std::vector<WindowScore> scores;
    scores.reserve(codes.rows() - lookback);
    std::vector<Vector> history(lookback);
    for (std::size_t t = lookback; t < codes.rows(); ++t) {
        for (std::size_t s = 0; s < lookback; ++s) {
            const auto row = codes.row(t - lookback + s);
            history[s].assign(row.begin(), row.end());
        }
        const SequenceOutput out = sequence_forward(model.lstm, history);
        scores.push_back({t, rms_residual(out.predictions.back(), codes.row(t))});
    }
    return scores;
}

std::vector<WindowScore> score(const DetectorModel& model, const std::vector<PacketRecord>& packets) {
    return score_codes(model, encode(model, packets));
}

ResidualStats residual_stats(std::span<const double> residuals) {
    if (residuals.empty()) {
        throw InputError("no residuals to calibrate on");
    }
    const double n = static_cast<double>(residuals.size());
    double mean = 0.0;
    for (double r : residuals) {
        mean += r;
    }
    mean /= n;
    double var = 0.0;
    for (double r : residuals) {
        var += (r - mean) * (r - mean);
    }
    return {mean, std::sqrt(var / n)};
}

double calibrate_threshold(std::span<const double> residuals, double k) {
    const ResidualStats s = residual_stats(residuals);
    return s.mean + k * std::max(s.stddev, 1e-9);
}

FitResult fit(const std::vector<PacketRecord>& train_packets, const std::vector<PacketRecord>& valid_packets,
              const RunConfig& config) {
    config.validate();
    const Matrix train_features = featurize(train_packets, config.window_len);
    const Matrix valid_features = featurize(valid_packets, config.window_len);
    require_windows(train_features.rows(), config.lookback, "training traffic");
    require_windows(valid_features.rows(), config.lookback, "validation traffic");

    FitResult result;
    DetectorModel& model = result.model;
    model.config = config;
    model.normalizer = fit_normalizer(train_features);
    const Matrix train_input = standardize_rows(model.normalizer, train_features);

    Rng rng(config.seed);
    CdConfig cd{config.rbm_lr, config.rbm_epochs, config.rbm_batch_size, config.seed};
    PretrainResult pre = pretrain(new_dbn(config.dbn_sizes, rng), train_input, cd, rng);
    model.dbn = std::move(pre.model);
    result.rbm_error_traces = std::move(pre.error_traces);

    const Matrix codes = transform_rows(model.dbn, train_input);
    Vector var(codes.cols(), 0.0);
    for (std::size_t d = 0; d < codes.cols(); ++d) {
        double mean = 0.0;
        for (std::size_t r = 0; r < codes.rows(); ++r) {
            mean += codes(r, d);
        }
        mean /= static_cast<double>(codes.rows());
        for (std::size_t r = 0; r < codes.rows(); ++r) {
            var[d] += (codes(r, d) - mean) * (codes(r, d) - mean);
        }
        var[d] /= static_cast<double>(codes.rows());
    }
    double mean_var = 0.0;
    for (double v : var) {
        mean_var += v;
    }
    result.code_stddev = std::sqrt(mean_var / static_cast<double>(var.size()));

    TrainConfig tc{config.lstm_lr, config.lstm_epochs, config.lookback, config.seed, config.gradient_clip};
    LstmTrainResult trained = train_lstm(LstmModel::random(model.dbn.code_dim(), config.lstm_hidden, rng),
                                         make_next_step_sequences(codes, config.lookback), tc);
    model.lstm = std::move(trained.model);
    result.lstm_loss_trace = std::move(trained.loss_trace);

    const Matrix valid_codes = transform_rows(model.dbn, standardize_rows(model.normalizer, valid_features));
    for (const auto& s : score_codes(model, valid_codes)) {
        result.validation_residuals.push_back(s.residual);
    }
    model.residual_stats = residual_stats(result.validation_residuals);
    model.threshold = calibrate_threshold(result.validation_residuals, config.k);
    return result;
}

std::size_t DetectionReport::alarm_count() const {
    return static_cast<std::size_t>(
        std::count_if(windows.begin(), windows.end(), [](const WindowVerdict& w) { return w.alarm; }));
}

std::size_t DetectionReport::scored_count() const {
    return static_cast<std::size_t>(
        std::count_if(windows.begin(), windows.end(), [](const WindowVerdict& w) { return w.scored; }));
}

DetectionReport apply_threshold(const std::vector<WindowScore>& scores, double threshold) {
    DetectionReport report;
    report.threshold = threshold;
    report.windows.reserve(scores.size());
    for (const auto& s : scores) {
        report.windows.push_back({s.index, s.residual, s.residual > threshold});
    }
    return report;
}

DetectionReport detect(const DetectorModel& model, const std::vector<PacketRecord>& packets) {
    const std::vector<WindowScore> scores = score(model, packets);
    DetectionReport report;
    report.threshold = model.threshold;
    report.windows.reserve(scores.size() + model.lookback());
    for (std::size_t t = 0; t < model.lookback(); ++t) report.windows.push_back({t, 0.0, false, false});
    const DetectionReport scored = apply_threshold(scores, model.threshold);
    report.windows.insert(report.windows.end(), scored.windows.begin(), scored.windows.end());
    report.lookback = model.lookback();
    report.window_len = model.window_len();
    return report;
}

void write_report(std::ostream& out, const DetectionReport& report) {
    out << kReportHeader << '\n';
    for (const auto& w : report.windows) {
        out << w.index << ',' << format_double(w.residual) << ',' << (w.alarm ? 1 : 0) << ','
            << (w.scored ? 1 : 0) << '\n';
    }
}

DetectionReport parse_report(std::istream& in) {
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kReportHeader) {
        throw InputError("line 1: expected header '" + std::string(kReportHeader) + "'");
    }
    DetectionReport report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        const auto c3 = c2 == std::string::npos ? std::string::npos : line.find(',', c2 + 1);
        WindowVerdict w;
        const char* b = line.data();
        bool ok = c3 != std::string::npos && line.find(',', c3 + 1) == std::string::npos;
        if (ok) {
            const auto r1 = std::from_chars(b, b + c1, w.index);
            const auto r2 = std::from_chars(b + c1 + 1, b + c2, w.residual);
            const std::string_view alarm(b + c2 + 1, c3 - c2 - 1);
            const std::string_view scored(b + c3 + 1, line.size() - c3 - 1);
            ok = r1.ec == std::errc() && r1.ptr == b + c1 && r2.ec == std::errc() && r2.ptr == b + c2 &&
                 (alarm == "0" || alarm == "1") && (scored == "0" || scored == "1") &&
                 !(scored == "0" && alarm == "1");
            w.alarm = alarm == "1";
            w.scored = scored == "1";
        }
        if (!ok) {
            throw InputError("line " + std::to_string(line_no) + ": malformed report row");
        }
        report.windows.push_back(w);
    }
    return report;
}

Metrics evaluate(const DetectionReport& report, const std::vector<bool>& labels) {
    Metrics m;
    for (const auto& w : report.windows) {
        if (!w.scored) {
            continue;
        }
        if (w.index >= labels.size()) {
            throw InputError("no label for window " + std::to_string(w.index) + " (" +
                             std::to_string(labels.size()) + " labels)");
        }
        const bool attack = labels[w.index];
        if (w.alarm && attack) {
            ++m.true_positives;
        } else if (w.alarm) {
            ++m.false_positives;
        } else if (attack) {
            ++m.false_negatives;
        } else {
            ++m.true_negatives;
        }
    }
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(m.true_positives, m.true_positives + m.false_positives);
    m.recall = ratio(m.true_positives, m.true_positives + m.false_negatives);
    m.false_positive_rate = ratio(m.false_positives, m.false_positives + m.true_negatives);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"true_positives", m.true_positives},
            {"false_positives", m.false_positives},
            {"true_negatives", m.true_negatives},
            {"false_negatives", m.false_negatives},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"false_positive_rate", m.false_positive_rate}};
}

}  // namespace ddos
