#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace pcgseg::dsp {

// ---------------------------------------------------------------- framing

struct FrameGrid {
    int frame_len_samples = 0;
    int frame_shift_samples = 0;
    int n_frames = 0;
    int sample_rate_hz = 0;

    // center sample of frame t in the source signal
    int center_sample(int t) const {
        return t * frame_shift_samples + frame_len_samples / 2;
    }
};

// Hamming-weighted overlapping frames. Frame t covers
// [t*shift, t*shift+len). Throws DataError when the signal is shorter
// than one window or shift exceeds the window.
std::pair<FrameGrid, std::vector<std::vector<double>>>
frame_signal(const std::vector<double>& samples, int sample_rate_hz,
             double win_ms, double shift_ms);

std::vector<double> hamming_window(int length);

// ---------------------------------------------------------------- FFT

// In-place radix-2 FFT; length must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& buf, bool inverse);

// Arbitrary-length FFT via Bluestein's algorithm (exact length, no padding).
std::vector<std::complex<double>> fft_any(const std::vector<std::complex<double>>& in,
                                          bool inverse);

std::size_t next_pow2(std::size_t n);

// |FFT|^2 of the zero-padded frame; returns bins 0..L/2 where L is the
// padded (power-of-two) length.
std::vector<double> power_spectrum(const std::vector<double>& frame);

// ---------------------------------------------------------------- resampling

// Kaiser-windowed sinc resampling. Identity when the rates are equal.
std::vector<double> resample(const std::vector<double>& samples,
                             int from_hz, int to_hz, double kaiser_beta = 8.6);

// ---------------------------------------------------------------- envelopes

// Magnitude of the analytic signal (FFT method, exact input length).
std::vector<double> analytic_envelope(const std::vector<double>& samples);

// Forward-backward Butterworth low-pass, symmetric reflection padding.
// DC gain 1, zero phase.
std::vector<double> lowpass_zero_phase(const std::vector<double>& samples,
                                       int sample_rate_hz, double cutoff_hz,
                                       int order);

// ---------------------------------------------------------------- wavelets

// Analysis filter pair for one of the bundled wavelets:
// "haar", "db4", "rbio3.9".
struct WaveletFilters {
    std::vector<double> lo;
    std::vector<double> hi;
};
const WaveletFilters& wavelet_filters(const std::string& wavelet_id);

// Detail coefficients at the requested decomposition level (level >= 1).
// Cascaded analysis filter bank with downsampling by two and symmetric
// reflection at the boundaries.
std::vector<double> dwt_detail(const std::vector<double>& samples,
                               const std::string& wavelet_id, int level);

} // namespace pcgseg::dsp
