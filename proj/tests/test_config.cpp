#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcgseg/config.hpp"
#include "pcgseg/errors.hpp"

#include <json.hpp>

#include <filesystem>

using namespace pcgseg;

TEST_CASE("defaults are valid and well formed") {
    RunConfig cfg;
    cfg.validate();
    CHECK(cfg.sample_rate_hz == 1600);
    CHECK(cfg.win_ms == 80.0);
    CHECK(cfg.shift_ms == 20.0);
    CHECK(cfg.window_frames == 7);
    CHECK(cfg.hidden_dim == 80);
    CHECK(cfg.features.dim() == 18);
    const auto d = cfg.model_dims();
    CHECK(d.input_dim == 18);
    CHECK(d.attn_dim == 160); // attn_dim 0 means 2H
    CHECK(d.seq_len == 7);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.train.lr_phase1 == 0.002);
    CHECK(cfg.train.epochs_phase1 == 30);
    CHECK(cfg.train.lr_phase2 == 0.0002);
    CHECK(cfg.train.epochs_phase2 == 70);
    CHECK(cfg.decode.theta_pos == 0.5);
    CHECK(cfg.decode.theta_neg == -0.5);
    CHECK(cfg.decode.min_dur_ms == 40.0);
}

TEST_CASE("dump then parse is the identity") {
    RunConfig cfg;
    cfg.seed = 1234;
    cfg.hidden_dim = 40;
    cfg.head = HeadActivation::Relu;
    cfg.use_attention = false;
    cfg.train.noise_snr_db.reset();
    cfg.features.components = {FeatureComponent::MFCC, FeatureComponent::HOE,
                               FeatureComponent::PSD};
    const auto text = dump_config(cfg);
    const auto back = parse_config(text);
    CHECK(back.seed == 1234);
    CHECK(back.hidden_dim == 40);
    CHECK(back.head == HeadActivation::Relu);
    CHECK(back.use_attention == false);
    CHECK(!back.train.noise_snr_db.has_value());
    CHECK(back.features.components == cfg.features.components);
    CHECK(dump_config(back) == text);
}

TEST_CASE("partial configs inherit defaults") {
    const auto cfg = parse_config(R"({"model": {"hidden_dim": 16}})");
    CHECK(cfg.hidden_dim == 16);
    CHECK(cfg.sample_rate_hz == 1600);
    CHECK(cfg.train.batch_size == 32);
}

TEST_CASE("unknown keys rejected at every level") {
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"hiden_dim": 16}})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"lr": 0.1}})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"features": {"nmfcc": 4}})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"decode": {"theta": 0.5}})"), DataError);
}

TEST_CASE("malformed and invalid configs rejected") {
    CHECK_THROWS_AS(parse_config("{not json"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"window_frames": 6})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"head": "softmax"}})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"features": {"mel_hi_hz": 5000.0}})"), DataError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"batch_size": 0}})"), DataError);
}

TEST_CASE("noise snr null round trip") {
    const auto cfg = parse_config(R"({"train": {"noise_snr_db": null}})");
    CHECK(!cfg.train.noise_snr_db.has_value());
    const auto j = nlohmann::json::parse(dump_config(cfg));
    CHECK(j["train"]["noise_snr_db"].is_null());

    const auto cfg2 = parse_config(R"({"train": {"noise_snr_db": 10.0}})");
    CHECK(cfg2.train.noise_snr_db == 10.0);
}

TEST_CASE("config file round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pcgseg_cfg_test";
    fs::create_directories(dir);
    const auto path = (dir / "run.json").string();
    RunConfig cfg;
    cfg.seed = 77;
    save_config_file(path, cfg);
    const auto back = load_config_file(path);
    CHECK(back.seed == 77);
    CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()), DataError);
}
