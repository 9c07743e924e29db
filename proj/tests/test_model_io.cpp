#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "ddos/errors.hpp"
#include "ddos/model_io.hpp"

using namespace ddos;

namespace {

DetectorModel trained_model() {
    RunConfig c;
    c.dbn_sizes = {8, 5, 3};
    c.lstm_hidden = 4;
    c.lookback = 3;
    c.rbm_epochs = 4;
    c.lstm_epochs = 4;
    Scenario s = preset_scenario("quiet");
    s.duration = 60.0;
    Rng rng(7);
    const auto packets = generate_traffic(s, rng).records;
    return fit(packets, packets, c).model;
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("save and load reproduce every parameter bit for bit") {
    const DetectorModel m = trained_model();
    const auto path = std::filesystem::temp_directory_path() / "ddos_model_io_roundtrip.json";
    save_model(path, m);
    const DetectorModel back = load_model(path);
    std::filesystem::remove(path);

    CHECK(back == m);
    for (std::size_t l = 0; l < m.dbn.layers.size(); ++l) {
        CHECK(bit_equal(back.dbn.layers[l].w.values(), m.dbn.layers[l].w.values()));
        CHECK(bit_equal(back.dbn.layers[l].a, m.dbn.layers[l].a));
        CHECK(bit_equal(back.dbn.layers[l].b, m.dbn.layers[l].b));
    }
    const auto ours = m.lstm.blocks();
    const auto theirs = back.lstm.blocks();
    for (std::size_t b = 0; b < ours.size(); ++b) CHECK(bit_equal(ours[b], theirs[b]));
    CHECK(bit_equal(back.normalizer.stddev, m.normalizer.stddev));
    CHECK(std::memcmp(&back.threshold, &m.threshold, sizeof(double)) == 0);
    CHECK(serialize_model(back) == serialize_model(m));
}

TEST_CASE("awkward doubles survive the JSON round trip") {
    DetectorModel m = trained_model();
    m.dbn.layers[0].w(0, 0) = 0.1 + 0.2;
    m.dbn.layers[0].w(0, 1) = 5e-324;
    m.dbn.layers[0].w(1, 0) = -1.7976931348623157e308;
    m.lstm.b_y[0] = 1.0 / 3.0;
    const DetectorModel back = model_from_json(nlohmann::json::parse(serialize_model(m)));
    CHECK(back == m);
}

TEST_CASE("schema version is checked first") {
    const DetectorModel m = trained_model();
    nlohmann::json j = model_to_json(m);
    CHECK(j.at("schema_version") == kModelSchemaVersion);

    nlohmann::json future = j;
    future["schema_version"] = 2;
    // Garbage elsewhere must not mask the version error.
    future["lstm"] = "not a model";
    try {
        (void)model_from_json(future);
        FAIL("expected an InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
    }

    nlohmann::json missing = j;
    missing.erase("schema_version");
    CHECK_THROWS_AS(model_from_json(missing), InputError);
}

TEST_CASE("malformed model documents are input errors") {
    const nlohmann::json j = model_to_json(trained_model());

    nlohmann::json short_weights = j;
    short_weights["dbn"]["layers"][0]["w"]["data"].erase(0);
    CHECK_THROWS_AS(model_from_json(short_weights), InputError);

    nlohmann::json wrong_shape = j;
    wrong_shape["dbn"]["layers"][1]["num_hidden"] = 99;
    CHECK_THROWS_AS(model_from_json(wrong_shape), InputError);

    nlohmann::json bad_kind = j;
    bad_kind["dbn"]["layers"][0]["kind"] = "Softmax";
    CHECK_THROWS_AS(model_from_json(bad_kind), InputError);

    nlohmann::json no_lstm = j;
    no_lstm.erase("lstm");
    CHECK_THROWS_AS(model_from_json(no_lstm), InputError);

    nlohmann::json negative = j;
    negative["threshold"] = -0.5;
    CHECK_THROWS_AS(model_from_json(negative), InputError);

    CHECK_THROWS_AS(load_model("/nonexistent/dir/model.json"), InputError);
}
