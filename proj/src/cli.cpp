#include "ddos/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddos/detector.hpp"
#include "ddos/errors.hpp"
#include "ddos/lstm.hpp"
#include "ddos/model_io.hpp"
#include "ddos/traffic.hpp"

namespace ddos {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read " + path);
    }
    return in;
}

// Output is staged in memory so a failed command never leaves a half-written file.
void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << contents;
    out.flush();
    if (!out) {
        throw InputError("failed writing " + path);
    }
}

json read_json(const std::string& path) {
    std::ifstream in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + " is not valid JSON: " + e.what());
    }
}

std::vector<PacketRecord> read_packets(const std::string& path) {
    std::ifstream in = open_in(path);
    try {
        return parse_packets(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    RunConfig config = path.empty() ? RunConfig{} : config_from_json(read_json(path));
    if (seed) {
        config.seed = *seed;
    }
    config.validate();
    return config;
}

Scenario load_scenario(const std::string& arg) {
    if (std::filesystem::exists(arg)) {
        try {
            return scenario_from_json(read_json(arg));
        } catch (const json::exception& e) {
            throw InputError("scenario " + arg + ": " + e.what());
        }
    }
    return preset_scenario(arg);
}

struct Options {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
    std::string scenario;
    std::string labels_out;
    std::string traffic;
    std::string model;
    std::string report;
    std::string labels;
    bool sabotage = false;
};

int cmd_gen(const Options& o, std::ostream& out) {
    const Scenario scenario = load_scenario(o.scenario);
    const RunConfig config = load_config(o.config, o.seed);
    Rng rng(config.seed);
    const GeneratedTraffic traffic = generate_traffic(scenario, rng, config.window_len);
    std::ostringstream packets, labels;
    write_packets(packets, traffic.records);
    write_labels(labels, traffic.labels);
    write_file(o.out, packets.str());
    write_file(o.labels_out, labels.str());
    out << traffic.records.size() << " packets, " << traffic.labels.size() << " windows\n";
    return kExitOk;
}

int cmd_featurize(const Options& o, std::ostream& out) {
    const RunConfig config = load_config(o.config, o.seed);
    const Matrix features = featurize(read_packets(o.traffic), config.window_len);
    std::ostringstream csv;
    write_features(csv, features);
    write_file(o.out, csv.str());
    out << features.rows() << " windows\n";
    return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
    const RunConfig config = load_config(o.config, o.seed);
    const auto [train, valid] = split_by_time(read_packets(o.traffic), config.train_split, config.window_len);
    const FitResult fitted = fit(train, valid, config);
    save_model(o.out, fitted.model);

    json rbm_final = json::array();
    for (const auto& trace : fitted.rbm_error_traces) {
        rbm_final.push_back(trace.empty() ? 0.0 : trace.back());
    }
    const json summary = {
        {"model", o.out},
        {"rbm_final_errors", rbm_final},
        {"lstm_final_loss", fitted.lstm_loss_trace.empty() ? 0.0 : fitted.lstm_loss_trace.back()},
        {"code_stddev", fitted.code_stddev},
        {"validation_windows", fitted.validation_residuals.size()},
        {"residual_mean", fitted.model.residual_stats.mean},
        {"residual_stddev", fitted.model.residual_stats.stddev},
        {"threshold", fitted.model.threshold},
    };
    out << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_detect(const Options& o, std::ostream& out) {
    const DetectorModel model = load_model(o.model);
    const DetectionReport report = detect(model, read_packets(o.traffic));
    std::ostringstream csv;
    write_report(csv, report);
    write_file(o.out, csv.str());
    out << "alarms " << report.alarm_count() << " of " << report.scored_count() << " scored windows\n";
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
    std::ifstream report_in = open_in(o.report);
    std::ifstream labels_in = open_in(o.labels);
    const DetectionReport report = parse_report(report_in);
    const std::vector<bool> labels = parse_labels(labels_in);
    out << metrics_to_json(evaluate(report, labels)).dump(2) << "\n";
    return kExitOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
    constexpr double kEps = 1e-5;
    constexpr double kTolerance = 1e-5;
    Rng rng(o.seed.value_or(42));
    const GradCheckCase c = random_grad_check_case(2, 3, 5, rng);
    LstmGradients analytic = backward_bptt(c.model, sequence_forward(c.model, c.inputs), c.targets);
    if (o.sabotage) {
        analytic.w_f(0, 0) += 1.0;
    }
    const double err = max_relative_error(analytic, numeric_gradient(c.model, c.inputs, c.targets, kEps));
    out << "max relative error " << std::setprecision(6) << std::scientific << err << "\n";
    return err < kTolerance ? kExitOk : kExitUsage;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"DDoS detection with a DBN encoder and an LSTM next-window predictor", "ddosdet"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* sub, bool needs_out) {
        sub->add_option("--seed", o.seed, "RNG seed (overrides the config)");
        sub->add_option("--config", o.config, "JSON file overriding run configuration defaults");
        auto* opt = sub->add_option("--out", o.out, "output path");
        if (needs_out) {
            opt->required();
        }
    };

    auto* gen = app.add_subcommand("gen", "generate synthetic traffic and per-window labels");
    common(gen, true);
    gen->add_option("--scenario", o.scenario, "scenario JSON file or preset name (quiet, syn10, mixed)")->required();
    gen->add_option("--labels", o.labels_out, "labels CSV output path")->required();

    auto* feat = app.add_subcommand("featurize", "write the per-window feature matrix");
    common(feat, true);
    feat->add_option("--traffic", o.traffic, "packet CSV")->required();

    auto* train = app.add_subcommand("train", "fit a detector on attack-free traffic");
    common(train, true);
    train->add_option("--traffic", o.traffic, "packet CSV")->required();

    auto* det = app.add_subcommand("detect", "score traffic with a trained model");
    common(det, true);
    det->add_option("--model", o.model, "model JSON")->required();
    det->add_option("--traffic", o.traffic, "packet CSV")->required();

    auto* ev = app.add_subcommand("eval", "compare a report with ground-truth labels");
    common(ev, false);
    ev->add_option("--report", o.report, "report CSV")->required();
    ev->add_option("--labels", o.labels, "labels CSV")->required();

    auto* gc = app.add_subcommand("gradcheck", "verify LSTM gradients against finite differences");
    common(gc, false);
    gc->add_flag("--sabotage", o.sabotage, "corrupt one analytic gradient entry (testing only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream cli_out, cli_err;
        const int code = app.exit(e, cli_out, cli_err);
        out << cli_out.str();
        err << cli_err.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(o, out);
        if (feat->parsed()) return cmd_featurize(o, out);
        if (train->parsed()) return cmd_train(o, out);
        if (det->parsed()) return cmd_detect(o, out);
        if (ev->parsed()) return cmd_eval(o, out);
        return cmd_gradcheck(o, out);
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace ddos
