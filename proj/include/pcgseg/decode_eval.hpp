#pragma once

#include "pcgseg/dsp.hpp"
#include "pcgseg/features.hpp"
#include "pcgseg/signal_io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcgseg {

enum class WindowLabel { S1, S2, None };

const char* to_string(WindowLabel l);
double target_from_label(WindowLabel l); // S1 -> +1, S2 -> -1, None -> 0
WindowLabel label_from_target(double target);

struct WindowExample {
    std::vector<double> features; // K x D row-major
    double target = 0.0;
    WindowLabel label = WindowLabel::None;
    int center_frame = 0;
    std::string recording_id;
};

// Per-frame label: the state of the annotation containing the frame's
// center sample (half-open intervals); Systole/Diastole/unannotated
// map to None.
std::vector<WindowLabel> frame_labels(const PcgRecording& recording,
                                      const dsp::FrameGrid& grid);

// Sliding centered windows, stride `stride` (default 1); edge windows
// that would run past the sequence are dropped. K must be odd.
std::vector<WindowExample> make_windows(const FeatureSequence& features,
                                        const std::vector<WindowLabel>& labels,
                                        int k, int stride = 1,
                                        const std::string& recording_id = "");

struct DecodeConfig {
    double theta_pos = 0.5;
    double theta_neg = -0.5;
    double min_dur_ms = 40.0;
};

struct Event {
    std::int64_t start_sample = 0;
    std::int64_t end_sample = 0;
    WindowLabel state = WindowLabel::None;
};

// Threshold the prediction series, merge runs into events, relabel
// events shorter than min_dur_ms as None.
std::pair<std::vector<WindowLabel>, std::vector<Event>>
decode(const std::vector<double>& eta, const std::vector<int>& center_frames,
       const DecodeConfig& cfg, const dsp::FrameGrid& grid);

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Window-level confusion per the literal count definitions: an S1<->S2
// confusion increments both FP and FN.
ConfusionCounts confusion(const std::vector<WindowLabel>& pred,
                          const std::vector<WindowLabel>& truth);

struct MetricReport {
    std::optional<double> ppv, se, spe, acc, f1; // absent on zero denominator
    ConfusionCounts counts;
};

MetricReport metrics(const ConfusionCounts& counts);

std::string metrics_to_json(const MetricReport& report);

// Event-level secondary scoring: a predicted event matches a truth event
// of the same state when their onsets are within the tolerance collar.
ConfusionCounts event_confusion(const std::vector<Event>& pred,
                                const std::vector<Event>& truth,
                                double tolerance_ms, int sample_rate_hz);

} // namespace pcgseg
