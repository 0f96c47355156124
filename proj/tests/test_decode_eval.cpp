#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcgseg/decode_eval.hpp"
#include "pcgseg/errors.hpp"

#include <json.hpp>

using namespace pcgseg;

namespace {

dsp::FrameGrid grid_1600() {
    dsp::FrameGrid g;
    g.frame_len_samples = 128;
    g.frame_shift_samples = 32; // 20 ms at 1600 Hz
    g.n_frames = 100;
    g.sample_rate_hz = 1600;
    return g;
}

std::vector<int> iota_frames(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

} // namespace

TEST_CASE("target encoding is a bijection on the three labels") {
    CHECK(target_from_label(WindowLabel::S1) == 1.0);
    CHECK(target_from_label(WindowLabel::S2) == -1.0);
    CHECK(target_from_label(WindowLabel::None) == 0.0);
    for (auto l : {WindowLabel::S1, WindowLabel::S2, WindowLabel::None})
        CHECK(label_from_target(target_from_label(l)) == l);
}

TEST_CASE("frame labels from annotations") {
    PcgRecording rec;
    rec.sample_rate_hz = 1600;
    rec.samples.assign(3328, 0.0);
    rec.annotations = {
        {0, 160, HeartState::S1},
        {160, 640, HeartState::Systole},
        {640, 768, HeartState::S2},
        {768, 1600, HeartState::Diastole},
    };
    dsp::FrameGrid g = grid_1600();
    g.n_frames = 100;
    const auto labels = frame_labels(rec, g);
    REQUIRE(labels.size() == 100);
    // frame 0 center = 64 -> S1; frame 3 center = 160 -> Systole (half-open)
    CHECK(labels[0] == WindowLabel::S1);
    CHECK(labels[1] == WindowLabel::S1); // center 96
    CHECK(labels[3] == WindowLabel::None); // center 160, systole
    CHECK(labels[19] == WindowLabel::S2);  // center 672
    CHECK(labels[30] == WindowLabel::None); // diastole
    CHECK(labels[99] == WindowLabel::None); // past all annotations
}

TEST_CASE("window construction") {
    FeatureSequence seq;
    seq.grid = grid_1600();
    seq.feature_names = {"a", "b"};
    for (int t = 0; t < 20; ++t)
        seq.frames.push_back({static_cast<double>(t), -static_cast<double>(t)});
    std::vector<WindowLabel> labels(20, WindowLabel::None);
    labels[10] = WindowLabel::S1;

    const auto windows = make_windows(seq, labels, 7, 1, "rec");
    // centers 3..16 inclusive
    REQUIRE(windows.size() == 14);
    CHECK(windows.front().center_frame == 3);
    CHECK(windows.back().center_frame == 16);
    for (const auto& w : windows) {
        REQUIRE(w.features.size() == 14);
        // first row of the window is frame center-3
        CHECK(w.features[0] == static_cast<double>(w.center_frame - 3));
        CHECK(w.recording_id == "rec");
        CHECK(w.target == target_from_label(w.label));
    }
    CHECK(windows[7].label == WindowLabel::S1); // center 10

    SUBCASE("stride") {
        const auto s3 = make_windows(seq, labels, 7, 3, "rec");
        REQUIRE(s3.size() == 5);
        CHECK(s3[1].center_frame == 6);
    }
    SUBCASE("even k rejected") {
        CHECK_THROWS_AS(make_windows(seq, labels, 6, 1, "rec"), DataError);
    }
    SUBCASE("label length mismatch rejected") {
        std::vector<WindowLabel> bad(19, WindowLabel::None);
        CHECK_THROWS_AS(make_windows(seq, bad, 7, 1, "rec"), DataError);
    }
}

TEST_CASE("threshold decoding") {
    const auto g = grid_1600();
    DecodeConfig cfg; // 0.5 / -0.5 / 40 ms

    SUBCASE("plain thresholds") {
        const std::vector<double> eta = {0.9, 0.6, 0.1, -0.6, -0.9, 0.2};
        const auto [labels, events] = decode(eta, iota_frames(6), cfg, g);
        // 20 ms per frame; runs of length 2 = 40 ms survive
        CHECK(labels[0] == WindowLabel::S1);
        CHECK(labels[1] == WindowLabel::S1);
        CHECK(labels[2] == WindowLabel::None);
        CHECK(labels[3] == WindowLabel::S2);
        CHECK(labels[4] == WindowLabel::S2);
        CHECK(labels[5] == WindowLabel::None);
        REQUIRE(events.size() == 2);
        CHECK(events[0].state == WindowLabel::S1);
        CHECK(events[1].state == WindowLabel::S2);
    }
    SUBCASE("sub-minimum runs are erased") {
        DecodeConfig strict = cfg;
        strict.min_dur_ms = 50.0; // needs 3 frames at 20 ms
        const std::vector<double> eta = {0.9, 0.9, 0.0, 0.9, 0.9, 0.9};
        const auto [labels, events] = decode(eta, iota_frames(6), strict, g);
        CHECK(labels[0] == WindowLabel::None);
        CHECK(labels[1] == WindowLabel::None);
        CHECK(labels[3] == WindowLabel::S1);
        REQUIRE(events.size() == 1);
    }
    SUBCASE("thresholds are inclusive") {
        DecodeConfig loose = cfg;
        loose.min_dur_ms = 0.0;
        const std::vector<double> eta = {0.5, -0.5, 0.49, -0.49};
        const auto [labels, events] = decode(eta, iota_frames(4), loose, g);
        (void)events;
        CHECK(labels[0] == WindowLabel::S1);
        CHECK(labels[1] == WindowLabel::S2);
        CHECK(labels[2] == WindowLabel::None);
        CHECK(labels[3] == WindowLabel::None);
    }
    SUBCASE("non-contiguous center frames do not merge") {
        const std::vector<double> eta = {0.9, 0.9};
        const auto [labels, events] = decode(eta, {0, 5}, cfg, g);
        (void)labels;
        // two separate length-1 runs of 20 ms each: both below 40 ms
        CHECK(events.empty());
    }
}

TEST_CASE("confusion counts with the s1/s2 double-penalty rule") {
    using L = WindowLabel;
    const std::vector<L> truth = {L::S1, L::S1, L::S2, L::None, L::None, L::S2};
    const std::vector<L> pred  = {L::S1, L::S2, L::S2, L::S1,   L::None, L::None};
    const auto c = confusion(pred, truth);
    // idx0 TP; idx1 S1->S2 confusion: FP+FN; idx2 TP; idx3 FP; idx4 TN; idx5 FN
    CHECK(c.tp == 2);
    CHECK(c.fp == 2);
    CHECK(c.fn == 2);
    CHECK(c.tn == 1);
    CHECK_THROWS_AS(confusion(pred, std::vector<L>(5, L::None)), DataError);
}

TEST_CASE("metric formulas and zero-denominator handling") {
    ConfusionCounts c;
    c.tp = 8;
    c.fp = 2;
    c.fn = 4;
    c.tn = 6;
    const auto m = metrics(c);
    CHECK(*m.ppv == doctest::Approx(0.8));
    CHECK(*m.se == doctest::Approx(8.0 / 12.0));
    CHECK(*m.spe == doctest::Approx(0.75));
    CHECK(*m.acc == doctest::Approx(14.0 / 20.0));
    CHECK(*m.f1 == doctest::Approx(2.0 * 0.8 * (8.0 / 12.0) / (0.8 + 8.0 / 12.0)));

    SUBCASE("absent on zero denominators") {
        ConfusionCounts z;
        z.tn = 5;
        const auto mz = metrics(z);
        CHECK(!mz.ppv.has_value());
        CHECK(!mz.se.has_value());
        CHECK(mz.spe.has_value());
        CHECK(*mz.acc == doctest::Approx(1.0));
        CHECK(!mz.f1.has_value());
    }
    SUBCASE("json export marks absent metrics null") {
        ConfusionCounts z;
        z.tn = 5;
        const auto j = nlohmann::json::parse(metrics_to_json(metrics(z)));
        CHECK(j["ppv"].is_null());
        CHECK(j["acc"].get<double>() == doctest::Approx(1.0));
        CHECK(j["counts"]["tn"].get<int>() == 5);
    }
}

TEST_CASE("event-level matching with a tolerance collar") {
    using L = WindowLabel;
    std::vector<Event> truth = {
        {1000, 1160, L::S1}, {1480, 1608, L::S2}, {2600, 2760, L::S1}};
    std::vector<Event> pred = {
        {1040, 1200, L::S1},  // onset off by 25 ms -> match at 60 ms
        {1800, 1900, L::S2},  // 200 ms away -> no match
        {2600, 2760, L::S2}}; // right onset, wrong state -> no match
    const auto c = event_confusion(pred, truth, 60.0, 1600);
    CHECK(c.tp == 1);
    CHECK(c.fp == 2);
    CHECK(c.fn == 2);

    SUBCASE("greedy matching uses each truth event once") {
        std::vector<Event> dup = {{1000, 1100, L::S1}, {1010, 1110, L::S1}};
        const auto c2 = event_confusion(dup, {{1000, 1160, L::S1}}, 60.0, 1600);
        CHECK(c2.tp == 1);
        CHECK(c2.fp == 1);
        CHECK(c2.fn == 0);
    }
}
