#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ddos/detector.hpp"
#include "ddos/errors.hpp"
#include "ddos/model_io.hpp"
#include "oracles.hpp"

using namespace ddos;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.dbn_sizes = {8, 6, 4};
    c.lstm_hidden = 5;
    c.lookback = 4;
    c.rbm_epochs = 5;
    c.lstm_epochs = 5;
    c.seed = 3;
    return c;
}

std::vector<PacketRecord> quiet_traffic(double duration, std::uint64_t seed) {
    Scenario s = preset_scenario("quiet");
    s.duration = duration;
    Rng rng(seed);
    return generate_traffic(s, rng).records;
}

DetectionReport report_from(const std::vector<bool>& alarms, std::size_t first_index = 0) {
    DetectionReport r;
    for (std::size_t k = 0; k < alarms.size(); ++k) r.windows.push_back({first_index + k, alarms[k] ? 1.0 : 0.0, alarms[k]});
    r.threshold = 0.5;
    return r;
}

}  // namespace

TEST_CASE("rms residual") {
    const Vector a = {0.1, 0.2, 0.3, 0.4};
    CHECK(rms_residual(a, a) == 0.0);
    const Vector b = {0.2, 0.3, 0.4, 0.5};
    CHECK(rms_residual(a, b) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(rms_residual(a, Vector{1.0}), InputError);
}

TEST_CASE("threshold calibration") {
    const Vector flat = {1, 1, 1, 1};
    CHECK(calibrate_threshold(flat, 3.0) == 1.0 + 3e-9);
    const ResidualStats s = residual_stats(flat);
    CHECK(s.mean == 1.0);
    CHECK(s.stddev == 0.0);

    const Vector two = {0, 2};
    CHECK(calibrate_threshold(two, 1.0) == doctest::Approx(2.0));

    Rng rng(1);
    Vector r(57);
    for (double& x : r) x = std::abs(rng.normal(0.3, 0.1));
    double mean = 0.0, sd = 0.0;
    oracle::mean_std(r, mean, sd);
    CHECK(std::abs(calibrate_threshold(r, 3.0) - (mean + 3.0 * sd)) <= 1e-12);
    CHECK(calibrate_threshold(r, 3.0) >= mean);

    // Scaling residuals scales the threshold.
    Vector scaled(r);
    for (double& x : scaled) x *= 4.0;
    CHECK(calibrate_threshold(scaled, 3.0) == doctest::Approx(4.0 * calibrate_threshold(r, 3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(calibrate_threshold(Vector{}, 3.0), InputError);
}

TEST_CASE("apply_threshold") {
    const std::vector<WindowScore> scores = {{10, 0.1}, {11, 0.5}, {12, 0.9}};
    const DetectionReport none = apply_threshold(scores, 1.0);
    CHECK(none.alarm_count() == 0);
    const DetectionReport zero = apply_threshold(scores, 0.0);
    CHECK(zero.alarm_count() == 3);
    const DetectionReport mid = apply_threshold(scores, 0.5);
    REQUIRE(mid.windows.size() == 3);
    CHECK_FALSE(mid.windows[1].alarm);
    CHECK(mid.windows[2].alarm);
    for (const auto& w : mid.windows) CHECK(w.alarm == (w.residual > mid.threshold));

    std::size_t prev = scores.size() + 1;
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        const std::size_t n = apply_threshold(scores, t).alarm_count();
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("evaluate metrics") {
    std::vector<bool> alarms, labels;
    for (int k = 0; k < 8; ++k) alarms.push_back(true), labels.push_back(true);
    for (int k = 0; k < 2; ++k) alarms.push_back(true), labels.push_back(false);
    for (int k = 0; k < 2; ++k) alarms.push_back(false), labels.push_back(true);
    for (int k = 0; k < 88; ++k) alarms.push_back(false), labels.push_back(false);
    const Metrics m = evaluate(report_from(alarms), labels);
    CHECK(m.true_positives == 8);
    CHECK(m.false_positives == 2);
    CHECK(m.false_negatives == 2);
    CHECK(m.true_negatives == 88);
    CHECK(m.precision == doctest::Approx(0.8));
    CHECK(m.recall == doctest::Approx(0.8));
    CHECK(m.f1 == doctest::Approx(0.8));
    CHECK(m.false_positive_rate == doctest::Approx(2.0 / 90.0));

    const std::vector<bool> truth = {false, true, true, false};
    const Metrics perfect = evaluate(report_from(truth), truth);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const Metrics silent = evaluate(report_from({false, false, false, false}), truth);
    CHECK(silent.recall == 0.0);
    CHECK(silent.precision == 0.0);
    CHECK(silent.f1 == 0.0);

    // Unscored rows are skipped.
    DetectionReport warmup = report_from({true, false}, 2);
    warmup.windows.insert(warmup.windows.begin(), {{0, 0.0, false, false}, {1, 0.0, false, false}});
    const Metrics skipped = evaluate(warmup, truth);
    CHECK(skipped.true_positives + skipped.false_positives + skipped.true_negatives + skipped.false_negatives == 2);
    CHECK(skipped.false_negatives == 0);

    // Only the report's windows are counted; earlier labels are ignored.
    const Metrics offset = evaluate(report_from({true, false}, 2), truth);
    CHECK(offset.true_positives + offset.false_positives + offset.true_negatives + offset.false_negatives == 2);
    CHECK(offset.true_positives == 1);
    CHECK(offset.true_negatives == 1);

    CHECK_THROWS_AS(evaluate(report_from({true, true, true, true, true}), truth), InputError);
}

TEST_CASE("report CSV round trip") {
    DetectionReport r = apply_threshold({{10, 0.125}, {11, 0.3333333333333333}, {12, 2.5e-7}}, 0.2);
    r.windows.insert(r.windows.begin(), {9, 0.0, false, false});
    std::stringstream ss;
    write_report(ss, r);
    std::string header;
    std::getline(std::istringstream(ss.str()), header);
    CHECK(header == "window_index,residual,alarm,scored");
    const DetectionReport back = parse_report(ss);
    CHECK(back.windows == r.windows);

    std::istringstream bad("window_index,residual,alarm,scored\n10,0.5,2,1\n");
    CHECK_THROWS_AS(parse_report(bad), InputError);
    std::istringstream three("window_index,residual,alarm,scored\n10,0.5,1\n");
    CHECK_THROWS_AS(parse_report(three), InputError);
    std::istringstream unscored_alarm("window_index,residual,alarm,scored\n10,0,1,0\n");
    CHECK_THROWS_AS(parse_report(unscored_alarm), InputError);
    std::istringstream wrong("index,score\n");
    CHECK_THROWS_AS(parse_report(wrong), InputError);
}

TEST_CASE("config JSON") {
    const RunConfig defaults;
    CHECK(config_from_json(nlohmann::json::object()) == defaults);
    CHECK(config_from_json(config_to_json(defaults)) == defaults);
    const RunConfig c = config_from_json(nlohmann::json::parse(R"({"k": 2.5, "lookback": 7, "dbn_sizes": [8, 4]})"));
    CHECK(c.k == 2.5);
    CHECK(c.lookback == 7);
    CHECK(c.dbn_sizes == std::vector<std::size_t>{8, 4});
    CHECK(c.lstm_hidden == defaults.lstm_hidden);

    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"kk": 1})")), InputError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"train_split": 1.0})")), InputError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"window_len": 0})")), InputError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"dbn_sizes": [5, 4]})")), InputError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"lookback": "ten"})")), InputError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse("[1]")), InputError);
}

TEST_CASE("split_by_time") {
    const auto packets = quiet_traffic(100.0, 1);
    const auto [train, valid] = split_by_time(packets, 0.8, 1.0);
    CHECK(train.size() + valid.size() == packets.size());
    for (const auto& p : train) CHECK(p.timestamp < 80.0);
    for (const auto& p : valid) {
        CHECK(p.timestamp >= 0.0);
        CHECK(p.timestamp < 20.0);
    }
    CHECK_THROWS_AS(split_by_time(packets, 0.0, 1.0), InputError);
}

TEST_CASE("fit and detect on a small configuration") {
    const auto packets = quiet_traffic(120.0, 2);
    const auto [train, valid] = split_by_time(packets, 0.8, 1.0);
    const RunConfig cfg = small_config();
    const FitResult fitted = fit(train, valid, cfg);
    const DetectorModel& m = fitted.model;
    CHECK_NOTHROW(m.validate());
    CHECK(m.config == cfg);
    CHECK(m.dbn.layer_sizes() == cfg.dbn_sizes);
    CHECK(m.lstm.input_dim == 4);
    CHECK(m.lstm.hidden_dim == 5);
    CHECK(m.threshold >= m.residual_stats.mean);
    CHECK(fitted.validation_residuals.size() == 24 - cfg.lookback);
    REQUIRE(fitted.rbm_error_traces.size() == 2);
    CHECK(fitted.lstm_loss_trace.size() == cfg.lstm_epochs);

    double mean = 0.0, sd = 0.0;
    oracle::mean_std(fitted.validation_residuals, mean, sd);
    CHECK(m.residual_stats.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.threshold == doctest::Approx(mean + cfg.k * sd).epsilon(1e-12));

    const FitResult again = fit(train, valid, cfg);
    CHECK(serialize_model(again.model) == serialize_model(m));

    const auto test = quiet_traffic(30.0, 9);
    const std::vector<WindowScore> scores = score(m, test);
    REQUIRE(scores.size() == 30 - cfg.lookback);
    for (std::size_t k = 0; k < scores.size(); ++k) {
        CHECK(scores[k].index == cfg.lookback + k);
        CHECK(scores[k].residual >= 0.0);
    }
    const DetectionReport rep = detect(m, test);
    REQUIRE(rep.windows.size() == 30);
    CHECK(rep.threshold == m.threshold);
    for (std::size_t t = 0; t < rep.windows.size(); ++t) {
        const WindowVerdict& w = rep.windows[t];
        CHECK(w.index == t);
        CHECK(w.alarm == (w.residual > m.threshold));
        CHECK(w.scored == (t >= cfg.lookback));
        if (!w.scored) CHECK(w.residual == 0.0);
        else CHECK(w.residual == scores[t - cfg.lookback].residual);
    }

    // Residual definition against a manual prediction from the preceding codes.
    const Matrix codes = encode(m, test);
    std::vector<Vector> hist;
    for (std::size_t t = 0; t < cfg.lookback; ++t) hist.emplace_back(codes.row(t).begin(), codes.row(t).end());
    const Vector pred = sequence_forward(m.lstm, hist).predictions.back();
    double sq = 0.0;
    for (std::size_t d = 0; d < codes.cols(); ++d) sq += (pred[d] - codes(cfg.lookback, d)) * (pred[d] - codes(cfg.lookback, d));
    CHECK(scores[0].residual == doctest::Approx(std::sqrt(sq / static_cast<double>(codes.cols()))).epsilon(1e-12));
}

TEST_CASE("fit and score reject short traffic") {
    const RunConfig cfg = small_config();
    const auto longer = quiet_traffic(60.0, 3);
    const auto shorter = quiet_traffic(4.0, 4);
    CHECK_THROWS_AS(fit(shorter, longer, cfg), InputError);
    CHECK_THROWS_AS(fit(longer, shorter, cfg), InputError);
    const FitResult fitted = fit(longer, longer, cfg);
    CHECK_THROWS_AS(score(fitted.model, shorter), InputError);
    CHECK_THROWS_AS(score(fitted.model, {}), InputError);
}

TEST_CASE("DetectorModel validation") {
    const auto packets = quiet_traffic(60.0, 5);
    DetectorModel m = fit(packets, packets, small_config()).model;
    DetectorModel bad = m;
    bad.threshold = -1.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = m;
    bad.lstm = LstmModel::zeros(3, 5);
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = m;
    bad.normalizer.mean.pop_back();
    CHECK_THROWS_AS(bad.validate(), InputError);
}
