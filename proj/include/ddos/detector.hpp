#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "ddos/dbn.hpp"
#include "ddos/lstm.hpp"
#include "ddos/traffic.hpp"

namespace ddos {

/// Every pipeline tunable. Overridable from a JSON object with the same field names.
struct RunConfig {
    double window_len = 1.0;
    std::vector<std::size_t> dbn_sizes = {8, 16, 8};
    std::size_t lstm_hidden = 32;
    std::size_t lookback = 10;
    double k = 3.0;
    std::size_t rbm_epochs = 100;
    double rbm_lr = 0.05;
    std::size_t rbm_batch_size = 10;
    std::size_t lstm_epochs = 200;
    double lstm_lr = 0.01;
    double gradient_clip = 5.0;
    std::uint64_t seed = 42;
    double train_split = 0.8;

    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

nlohmann::json config_to_json(const RunConfig& c);

/// Starts from the defaults and overrides every field present in `j`.
RunConfig config_from_json(const nlohmann::json& j);

struct ResidualStats {
    double mean = 0.0;
    double stddev = 0.0;  // population

    bool operator==(const ResidualStats&) const = default;
};

struct DetectorModel {
    RunConfig config;
    Normalizer normalizer;
    DbnModel dbn;
    LstmModel lstm;
    double threshold = 0.0;
    ResidualStats residual_stats;

    std::size_t lookback() const { return config.lookback; }
    double window_len() const { return config.window_len; }

    /// Dimension chaining and parameter sanity; throws InputError.
    void validate() const;

    bool operator==(const DetectorModel&) const = default;
};

struct FitResult {
    DetectorModel model;
    std::vector<std::vector<double>> rbm_error_traces;
    std::vector<double> lstm_loss_trace;
    std::vector<double> validation_residuals;
    double code_stddev = 0.0;  // mean per-dimension stddev of the training codes
};

/// Trains on attack-free traffic: features, normalizer, DBN pretraining,
/// LSTM next-code prediction, then threshold calibration on `valid_packets`.
FitResult fit(const std::vector<PacketRecord>& train_packets, const std::vector<PacketRecord>& valid_packets,
              const RunConfig& config);

/// Splits one capture at a window boundary into training and validation
/// parts. Validation timestamps are shifted so its first window is 0.
std::pair<std::vector<PacketRecord>, std::vector<PacketRecord>> split_by_time(
    const std::vector<PacketRecord>& records, double fraction, double window_len);

/// DBN codes for every window of the traffic (rows indexed by window).
Matrix encode(const DetectorModel& model, const std::vector<PacketRecord>& packets);

struct WindowScore {
    std::size_t index = 0;
    double residual = 0.0;

    bool operator==(const WindowScore&) const = default;
};

/// RMS distance between a prediction and the observed code: ||p - c|| / sqrt(dim).
double rms_residual(std::span<const double> predicted, std::span<const double> actual);

/// Residuals for windows L..n-1, each predicted from the L preceding codes.
std::vector<WindowScore> score_codes(const DetectorModel& model, const Matrix& codes);
std::vector<WindowScore> score(const DetectorModel& model, const std::vector<PacketRecord>& packets);

/// Mean and population standard deviation. Throws InputError on an empty list.
ResidualStats residual_stats(std::span<const double> residuals);

/// mean + k * max(stddev, 1e-9).
double calibrate_threshold(std::span<const double> residuals, double k);

struct WindowVerdict {
    std::size_t index = 0;
    double residual = 0.0;
    bool alarm = false;
    bool scored = true;  // false for the first `lookback` windows, which lack history

    bool operator==(const WindowVerdict&) const = default;
};

/// One row per window. Rows before `lookback` are unscored: residual 0, no alarm.
struct DetectionReport {
    std::vector<WindowVerdict> windows;
    double threshold = 0.0;
    std::size_t lookback = 0;
    double window_len = 0.0;

    std::size_t alarm_count() const;
    std::size_t scored_count() const;
};

DetectionReport apply_threshold(const std::vector<WindowScore>& scores, double threshold);
DetectionReport detect(const DetectorModel& model, const std::vector<PacketRecord>& packets);

void write_report(std::ostream& out, const DetectionReport& report);
DetectionReport parse_report(std::istream& in);

struct Metrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double false_positive_rate = 0.0;

    bool operator==(const Metrics&) const = default;
};

/// Confusion counts over the report's windows. Undefined ratios are 0.
Metrics evaluate(const DetectionReport& report, const std::vector<bool>& labels);

nlohmann::json metrics_to_json(const Metrics& m);

}  // namespace ddos
