#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pcgseg {

enum class HeartState { S1, Systole, S2, Diastole, None };

const char* to_string(HeartState s);
HeartState heart_state_from_string(const std::string& token);

struct StateInterval {
    std::int64_t start_sample = 0;
    std::int64_t end_sample = 0; // exclusive
    HeartState state = HeartState::None;
};

// A mono recording with amplitudes in [-1, 1] and sorted, non-overlapping
// annotation intervals.
struct PcgRecording {
    std::string id;
    std::vector<double> samples;
    int sample_rate_hz = 0;
    std::vector<StateInterval> annotations;
};

struct SynthConfig {
    double bpm = 60.0;                  // physiological span [24, 315]
    double duration_s = 20.0;
    double s1_center_hz = 120.0;
    double s2_center_hz = 180.0;
    double s1_dur_ms = 100.0;
    double s2_dur_ms = 80.0;
    std::optional<double> noise_snr_db; // absent = clean
    std::uint64_t rng_seed = 0;
    int sample_rate_hz = 1600;
};

// RIFF/PCM mono 16-bit little-endian loader; samples scaled by 1/32768.
PcgRecording load_wav(const std::string& path);
void save_wav(const std::string& path, const PcgRecording& rec);

// CSV `start_sample,end_sample,state`; validates and sorts the intervals.
PcgRecording load_annotations(const std::string& path, PcgRecording recording);
void save_annotations(const std::string& path, const PcgRecording& rec);

// Deterministic synthetic PCG: one damped-sinusoid S1 and S2 event per
// cycle, systole at 30% of the cycle, optional additive white noise.
PcgRecording synth_pcg(const SynthConfig& cfg);

// Whole-recording split; deterministic for a fixed seed.
struct DatasetSplit {
    std::vector<PcgRecording> train, val, test;
};
DatasetSplit split_dataset(std::vector<PcgRecording> recordings,
                           double train_ratio, double val_ratio, double test_ratio,
                           std::uint64_t seed);

// Resample the audio and rescale annotation boundaries accordingly.
PcgRecording resample_recording(const PcgRecording& rec, int to_hz);

void validate_recording(const PcgRecording& rec);

} // namespace pcgseg
