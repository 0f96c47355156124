#pragma once

#include "pcgseg/config.hpp"
#include "pcgseg/decode_eval.hpp"
#include "pcgseg/features.hpp"
#include "pcgseg/signal_io.hpp"
#include "pcgseg/training.hpp"

#include <string>
#include <vector>

namespace pcgseg {

// Recordings loaded from a directory of WAV files with same-stem
// annotation CSVs, sorted by id.
std::vector<PcgRecording> load_recording_dir(const std::string& dir);

// Feature windows for one recording at the configured rate/framing.
// When stats is null the features stay unnormalized.
std::vector<WindowExample> recording_windows(const PcgRecording& rec,
                                             const RunConfig& cfg,
                                             const NormStats* stats,
                                             int stride = 1);

struct PreparedDataset {
    std::vector<WindowExample> train, val, test;
    NormStats stats; // fitted on the training split
};

// Split by whole recording, optionally noise-augment the training
// recordings, extract, fit normalization on the training split, window.
PreparedDataset prepare_dataset(const std::vector<PcgRecording>& recordings,
                                const RunConfig& cfg);

struct EvalResult {
    MetricReport window_report;       // primary
    MetricReport event_report;        // secondary, tolerance collar
    std::vector<double> etas;         // per window, test order
};

EvalResult evaluate(const std::vector<WindowExample>& windows,
                    const ModelParams& params, const ModelConfig& mcfg,
                    const DecodeConfig& dcfg, const dsp::FrameGrid& grid,
                    double event_tolerance_ms = 60.0);

dsp::FrameGrid grid_for(const RunConfig& cfg, std::size_t n_samples);

void save_norm_stats(const std::string& path, const NormStats& stats);
NormStats load_norm_stats(const std::string& path);

} // namespace pcgseg
