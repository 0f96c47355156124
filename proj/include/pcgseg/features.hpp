#pragma once

#include "pcgseg/dsp.hpp"
#include "pcgseg/signal_io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcgseg {

enum class FeatureComponent { MFCC, DELTA, DELTA2, HOE, HIE, WE, PSD };

const char* to_string(FeatureComponent c);
FeatureComponent feature_component_from_string(const std::string& token);

struct FeatureSpec {
    std::vector<FeatureComponent> components = {
        FeatureComponent::MFCC, FeatureComponent::DELTA, FeatureComponent::DELTA2};
    int n_mfcc = 6;
    double mel_lo_hz = 30.0;
    double mel_hi_hz = 300.0;
    int delta_width = 2;
    std::string wavelet_id = "rbio3.9";
    int wavelet_level = 3;
    double psd_lo_hz = 40.0;
    double psd_hi_hz = 60.0;
    double hoe_cutoff_hz = 8.0;
    int hoe_order = 1;

    void validate(int sample_rate_hz) const;
    int dim() const;
};

// Time-major per-frame feature matrix.
struct FeatureSequence {
    std::vector<std::vector<double>> frames; // n_frames x dim
    dsp::FrameGrid grid;
    std::vector<std::string> feature_names;

    int n_frames() const { return static_cast<int>(frames.size()); }
    int dim() const { return static_cast<int>(feature_names.size()); }
};

double mel_from_hz(double hz);
double hz_from_mel(double mel);

// Triangular Mel filterbank, rows n_bands x (fft_len/2+1), peak 1.
std::vector<std::vector<double>> mel_filterbank(int n_bands, double lo_hz, double hi_hz,
                                                int fft_len, int sample_rate_hz);

// Orthonormal DCT-II of log filterbank energies (floor 1e-10), keeping
// coefficients 0..n_coeffs-1.
std::vector<std::vector<double>> mfcc(const std::vector<std::vector<double>>& frame_power_spectra,
                                      const std::vector<std::vector<double>>& filterbank,
                                      int n_coeffs);

// Regression delta with replicate padding at the edges.
std::vector<std::vector<double>> delta(const std::vector<std::vector<double>>& coeffs,
                                       int width);

std::vector<double> homomorphic_envelope_feature(const std::vector<double>& samples,
                                                 const dsp::FrameGrid& grid,
                                                 double cutoff_hz = 8.0, int order = 1);
std::vector<double> hilbert_envelope_feature(const std::vector<double>& samples,
                                             const dsp::FrameGrid& grid);
std::vector<double> wavelet_envelope_feature(const std::vector<double>& samples,
                                             const dsp::FrameGrid& grid,
                                             const std::string& wavelet_id, int level);
std::vector<double> psd_feature(const std::vector<double>& samples,
                                const dsp::FrameGrid& grid,
                                double band_lo_hz, double band_hi_hz);

FeatureSequence extract(const PcgRecording& recording, const FeatureSpec& spec,
                        double win_ms, double shift_ms);

// Per-column z-score. When stats are absent they are fitted on the input;
// near-constant columns (std < 1e-8) are centered only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};
std::pair<FeatureSequence, NormStats> normalize(FeatureSequence features,
                                                const std::optional<NormStats>& stats);

// CSV (header = feature names) plus sidecar JSON with the frame grid.
void save_features(const std::string& csv_path, const std::string& json_path,
                   const FeatureSequence& seq);
FeatureSequence load_features(const std::string& csv_path, const std::string& json_path);

} // namespace pcgseg
