#include "pcgseg/decode_eval.hpp"

#include "pcgseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace pcgseg {

const char* to_string(WindowLabel l) {
    switch (l) {
        case WindowLabel::S1: return "S1";
        case WindowLabel::S2: return "S2";
        case WindowLabel::None: return "None";
    }
    return "None";
}

double target_from_label(WindowLabel l) {
    switch (l) {
        case WindowLabel::S1: return 1.0;
        case WindowLabel::S2: return -1.0;
        case WindowLabel::None: return 0.0;
    }
    return 0.0;
}

WindowLabel label_from_target(double target) {
    if (target == 1.0) return WindowLabel::S1;
    if (target == -1.0) return WindowLabel::S2;
    if (target == 0.0) return WindowLabel::None;
    throw DataError("label_from_target: target must be one of {+1, -1, 0}");
}

std::vector<WindowLabel> frame_labels(const PcgRecording& recording,
                                      const dsp::FrameGrid& grid) {
    validate_recording(recording);
    std::vector<WindowLabel> labels(static_cast<std::size_t>(grid.n_frames),
                                    WindowLabel::None);
    std::size_t ai = 0;
    for (int t = 0; t < grid.n_frames; ++t) {
        const auto center = static_cast<std::int64_t>(grid.center_sample(t));
        while (ai < recording.annotations.size() &&
               recording.annotations[ai].end_sample <= center)
            ++ai;
        if (ai < recording.annotations.size()) {
            const auto& a = recording.annotations[ai];
            if (center >= a.start_sample && center < a.end_sample) {
                if (a.state == HeartState::S1)
                    labels[static_cast<std::size_t>(t)] = WindowLabel::S1;
                else if (a.state == HeartState::S2)
                    labels[static_cast<std::size_t>(t)] = WindowLabel::S2;
                // Systole/Diastole/None all score as None
            }
        }
    }
    return labels;
}

std::vector<WindowExample> make_windows(const FeatureSequence& features,
                                        const std::vector<WindowLabel>& labels,
                                        int k, int stride,
                                        const std::string& recording_id) {
    if (k < 1 || k % 2 == 0) throw DataError("make_windows: K must be odd");
    if (stride < 1) throw DataError("make_windows: stride must be >= 1");
    const int n = features.n_frames();
    if (static_cast<int>(labels.size()) != n)
        throw DataError("make_windows: label count does not match frames");
    if (n < k) throw DataError("make_windows: sequence shorter than window");
    const int half = k / 2;
    const auto dim = static_cast<std::size_t>(features.dim());

    std::vector<WindowExample> out;
    for (int c = half; c + half < n; c += stride) {
        WindowExample w;
        w.center_frame = c;
        w.recording_id = recording_id;
        w.label = labels[static_cast<std::size_t>(c)];
        w.target = target_from_label(w.label);
        w.features.reserve(static_cast<std::size_t>(k) * dim);
        for (int t = c - half; t <= c + half; ++t) {
            const auto& row = features.frames[static_cast<std::size_t>(t)];
            w.features.insert(w.features.end(), row.begin(), row.end());
        }
        out.push_back(std::move(w));
    }
    return out;
}

std::pair<std::vector<WindowLabel>, std::vector<Event>>
decode(const std::vector<double>& eta, const std::vector<int>& center_frames,
       const DecodeConfig& cfg, const dsp::FrameGrid& grid) {
    if (!(cfg.theta_neg < 0.0 && 0.0 < cfg.theta_pos))
        throw DataError("decode: need theta_neg < 0 < theta_pos");
    if (eta.size() != center_frames.size())
        throw DataError("decode: eta/center size mismatch");

    std::vector<WindowLabel> labels(eta.size(), WindowLabel::None);
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (eta[i] >= cfg.theta_pos)
            labels[i] = WindowLabel::S1;
        else if (eta[i] <= cfg.theta_neg)
            labels[i] = WindowLabel::S2;
    }

    // merge runs into events, with the min-duration clean-up
    const auto min_dur_samples =
        static_cast<std::int64_t>(std::lround(cfg.min_dur_ms * grid.sample_rate_hz / 1000.0));
    std::vector<Event> events;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i] == WindowLabel::None) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < labels.size() && labels[j + 1] == labels[i] &&
               center_frames[j + 1] == center_frames[j] + 1)
            ++j;
        Event ev;
        ev.state = labels[i];
        ev.start_sample = grid.center_sample(center_frames[i]) - grid.frame_shift_samples / 2;
        ev.end_sample = grid.center_sample(center_frames[j]) + grid.frame_shift_samples / 2;
        if (ev.end_sample - ev.start_sample < min_dur_samples) {
            for (std::size_t t = i; t <= j; ++t) labels[t] = WindowLabel::None;
        } else {
            events.push_back(ev);
        }
        i = j + 1;
    }
    return {std::move(labels), std::move(events)};
}

ConfusionCounts confusion(const std::vector<WindowLabel>& pred,
                          const std::vector<WindowLabel>& truth) {
    if (pred.size() != truth.size())
        throw DataError("confusion: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool true_event = truth[i] != WindowLabel::None;
        const bool pred_event = pred[i] != WindowLabel::None;
        if (true_event && pred[i] == truth[i])
            ++c.tp;
        else {
            if (true_event) ++c.fn;
            if (pred_event) ++c.fp;
            if (!true_event && !pred_event) ++c.tn;
        }
    }
    return c;
}

MetricReport metrics(const ConfusionCounts& c) {
    MetricReport r;
    r.counts = c;
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto fn = static_cast<double>(c.fn);
    const auto tn = static_cast<double>(c.tn);
    if (tp + fp > 0) r.ppv = tp / (tp + fp);
    if (tp + fn > 0) r.se = tp / (tp + fn);
    if (tn + fp > 0) r.spe = tn / (tn + fp);
    if (tp + fp + tn + fn > 0) r.acc = (tp + tn) / (tp + fp + tn + fn);
    if (r.ppv && r.se && *r.ppv + *r.se > 0)
        r.f1 = 2.0 * (*r.ppv) * (*r.se) / (*r.ppv + *r.se);
    return r;
}

std::string metrics_to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
        else
            j[key] = nullptr;
    };
    put("ppv", r.ppv);
    put("se", r.se);
    put("spe", r.spe);
    put("acc", r.acc);
    put("f1", r.f1);
    j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp},
                   {"fn", r.counts.fn}, {"tn", r.counts.tn}};
    return j.dump(2);
}

ConfusionCounts event_confusion(const std::vector<Event>& pred,
                                const std::vector<Event>& truth,
                                double tolerance_ms, int sample_rate_hz) {
    const auto tol = static_cast<std::int64_t>(
        std::lround(tolerance_ms * sample_rate_hz / 1000.0));
    std::vector<bool> matched(truth.size(), false);
    ConfusionCounts c;
    for (const auto& p : pred) {
        bool hit = false;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (matched[i] || truth[i].state != p.state) continue;
            if (std::llabs(truth[i].start_sample - p.start_sample) <= tol) {
                matched[i] = true;
                hit = true;
                break;
            }
        }
        if (hit)
            ++c.tp;
        else
            ++c.fp;
    }
    for (bool m : matched)
        if (!m) ++c.fn;
    return c;
}

} // namespace pcgseg
