#include "pcgseg/features.hpp"

#include "pcgseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace pcgseg {

namespace {
constexpr double kLogFloor = 1e-10;
}

const char* to_string(FeatureComponent c) {
    switch (c) {
        case FeatureComponent::MFCC: return "MFCC";
        case FeatureComponent::DELTA: return "DELTA";
        case FeatureComponent::DELTA2: return "DELTA2";
        case FeatureComponent::HOE: return "HOE";
        case FeatureComponent::HIE: return "HIE";
        case FeatureComponent::WE: return "WE";
        case FeatureComponent::PSD: return "PSD";
    }
    return "?";
}

FeatureComponent feature_component_from_string(const std::string& token) {
    if (token == "MFCC") return FeatureComponent::MFCC;
    if (token == "DELTA") return FeatureComponent::DELTA;
    if (token == "DELTA2") return FeatureComponent::DELTA2;
    if (token == "HOE") return FeatureComponent::HOE;
    if (token == "HIE") return FeatureComponent::HIE;
    if (token == "WE") return FeatureComponent::WE;
    if (token == "PSD") return FeatureComponent::PSD;
    throw DataError("unknown feature component: " + token);
}

void FeatureSpec::validate(int sample_rate_hz) const {
    if (components.empty()) throw DataError("feature spec: no components");
    for (std::size_t i = 0; i < components.size(); ++i)
        for (std::size_t j = i + 1; j < components.size(); ++j)
            if (components[i] == components[j])
                throw DataError("feature spec: duplicate component");
    if (n_mfcc < 1) throw DataError("feature spec: n_mfcc must be >= 1");
    if (!(mel_lo_hz < mel_hi_hz && mel_hi_hz < sample_rate_hz / 2.0))
        throw DataError("feature spec: need mel_lo < mel_hi < Nyquist");
    if (delta_width < 1) throw DataError("feature spec: delta width must be >= 1");
}

int FeatureSpec::dim() const {
    int d = 0;
    for (auto c : components) {
        switch (c) {
            case FeatureComponent::MFCC:
            case FeatureComponent::DELTA:
            case FeatureComponent::DELTA2: d += n_mfcc; break;
            default: d += 1; break;
        }
    }
    return d;
}

double mel_from_hz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double hz_from_mel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(int n_bands, double lo_hz, double hi_hz,
                                                int fft_len, int sample_rate_hz) {
    if (n_bands < 1) throw DataError("mel_filterbank: n_bands must be >= 1");
    if (!(lo_hz < hi_hz && hi_hz <= sample_rate_hz / 2.0))
        throw DataError("mel_filterbank: need lo < hi <= Nyquist");
    const int n_bins = fft_len / 2 + 1;
    const double mel_lo = mel_from_hz(lo_hz);
    const double mel_hi = mel_from_hz(hi_hz);
    std::vector<double> points(static_cast<std::size_t>(n_bands) + 2);
    for (int p = 0; p < n_bands + 2; ++p)
        points[static_cast<std::size_t>(p)] =
            hz_from_mel(mel_lo + (mel_hi - mel_lo) * p / (n_bands + 1));

    std::vector<std::vector<double>> fb(static_cast<std::size_t>(n_bands),
                                        std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
    const double bin_hz = static_cast<double>(sample_rate_hz) / fft_len;
    for (int b = 0; b < n_bands; ++b) {
        const double fl = points[static_cast<std::size_t>(b)];
        const double fc = points[static_cast<std::size_t>(b) + 1];
        const double fh = points[static_cast<std::size_t>(b) + 2];
        int support = 0;
        for (int k = 0; k < n_bins; ++k) {
            const double f = k * bin_hz;
            double w = 0.0;
            if (f > fl && f < fc)
                w = (f - fl) / (fc - fl);
            else if (f >= fc && f < fh)
                w = (fh - f) / (fh - fc);
            if (w > 0.0) ++support;
            fb[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] = w;
        }
        if (support < 1)
            throw DataError("mel_filterbank: band narrower than the FFT resolution");
    }
    return fb;
}

std::vector<std::vector<double>> mfcc(const std::vector<std::vector<double>>& frame_power_spectra,
                                      const std::vector<std::vector<double>>& filterbank,
                                      int n_coeffs) {
    const auto n_bands = static_cast<int>(filterbank.size());
    if (n_coeffs < 1 || n_coeffs > n_bands)
        throw DataError("mfcc: n_coeffs must lie in [1, n_bands]");
    std::vector<std::vector<double>> out;
    out.reserve(frame_power_spectra.size());
    for (const auto& ps : frame_power_spectra) {
        std::vector<double> loge(static_cast<std::size_t>(n_bands));
        for (int b = 0; b < n_bands; ++b) {
            const auto& row = filterbank[static_cast<std::size_t>(b)];
            if (row.size() != ps.size())
                throw DataError("mfcc: spectrum length does not match filterbank");
            double e = 0.0;
            for (std::size_t k = 0; k < ps.size(); ++k) e += row[k] * ps[k];
            loge[static_cast<std::size_t>(b)] = std::log(std::max(e, kLogFloor));
        }
        std::vector<double> c(static_cast<std::size_t>(n_coeffs), 0.0);
        for (int j = 0; j < n_coeffs; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n_bands; ++i)
                acc += loge[static_cast<std::size_t>(i)] *
                       std::cos(std::numbers::pi * j * (2.0 * i + 1.0) / (2.0 * n_bands));
            const double alpha = j == 0 ? std::sqrt(1.0 / n_bands) : std::sqrt(2.0 / n_bands);
            c[static_cast<std::size_t>(j)] = alpha * acc;
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::vector<double>> delta(const std::vector<std::vector<double>>& coeffs,
                                       int width) {
    if (width < 1) throw DataError("delta: width must be >= 1");
    if (coeffs.empty()) throw DataError("delta: empty sequence");
    const auto n = static_cast<int>(coeffs.size());
    const auto dim = coeffs[0].size();
    double denom = 0.0;
    for (int w = 1; w <= width; ++w) denom += 2.0 * w * w;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n),
                                         std::vector<double>(dim, 0.0));
    auto clamp_t = [n](int t) { return std::clamp(t, 0, n - 1); };
    for (int t = 0; t < n; ++t)
        for (std::size_t d = 0; d < dim; ++d) {
            double acc = 0.0;
            for (int w = 1; w <= width; ++w)
                acc += w * (coeffs[static_cast<std::size_t>(clamp_t(t + w))][d] -
                            coeffs[static_cast<std::size_t>(clamp_t(t - w))][d]);
            out[static_cast<std::size_t>(t)][d] = acc / denom;
        }
    return out;
}

namespace {

std::vector<double> frame_means(const std::vector<double>& signal,
                                const dsp::FrameGrid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.n_frames));
    for (int t = 0; t < grid.n_frames; ++t) {
        const std::size_t off =
            static_cast<std::size_t>(t) * static_cast<std::size_t>(grid.frame_shift_samples);
        double acc = 0.0;
        for (int i = 0; i < grid.frame_len_samples; ++i)
            acc += signal[off + static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(t)] = acc / grid.frame_len_samples;
    }
    return out;
}

} // namespace

std::vector<double> homomorphic_envelope_feature(const std::vector<double>& samples,
                                                 const dsp::FrameGrid& grid,
                                                 double cutoff_hz, int order) {
    auto env = dsp::analytic_envelope(samples);
    for (double& v : env) v = std::log(v + kLogFloor);
    auto smooth = dsp::lowpass_zero_phase(env, grid.sample_rate_hz, cutoff_hz, order);
    std::vector<double> out(static_cast<std::size_t>(grid.n_frames));
    const auto n = static_cast<int>(smooth.size());
    for (int t = 0; t < grid.n_frames; ++t) {
        const int c = std::clamp(grid.center_sample(t), 0, n - 1);
        out[static_cast<std::size_t>(t)] = std::exp(smooth[static_cast<std::size_t>(c)]);
    }
    return out;
}

std::vector<double> hilbert_envelope_feature(const std::vector<double>& samples,
                                             const dsp::FrameGrid& grid) {
    const auto env = dsp::analytic_envelope(samples);
    return frame_means(env, grid);
}

std::vector<double> wavelet_envelope_feature(const std::vector<double>& samples,
                                             const dsp::FrameGrid& grid,
                                             const std::string& wavelet_id, int level) {
    const auto detail = dsp::dwt_detail(samples, wavelet_id, level);
    const std::size_t factor = static_cast<std::size_t>(1) << level;
    std::vector<double> up(samples.size());
    for (std::size_t i = 0; i < up.size(); ++i) {
        const std::size_t k = std::min(i / factor, detail.size() - 1);
        up[i] = std::abs(detail[k]);
    }
    return frame_means(up, grid);
}

std::vector<double> psd_feature(const std::vector<double>& samples,
                                const dsp::FrameGrid& grid,
                                double band_lo_hz, double band_hi_hz) {
    if (!(band_lo_hz < band_hi_hz && band_hi_hz <= grid.sample_rate_hz / 2.0))
        throw DataError("psd_feature: band must lie within Nyquist");
    const auto [g, frames] =
        dsp::frame_signal(samples, grid.sample_rate_hz,
                          1000.0 * grid.frame_len_samples / grid.sample_rate_hz,
                          1000.0 * grid.frame_shift_samples / grid.sample_rate_hz);
    std::vector<double> out(static_cast<std::size_t>(g.n_frames));
    for (int t = 0; t < g.n_frames; ++t) {
        const auto ps = dsp::power_spectrum(frames[static_cast<std::size_t>(t)]);
        const std::size_t fft_len = (ps.size() - 1) * 2;
        const double bin_hz = static_cast<double>(grid.sample_rate_hz) / static_cast<double>(fft_len);
        double acc = 0.0;
        int count = 0;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            if (f >= band_lo_hz && f <= band_hi_hz) {
                acc += ps[k];
                ++count;
            }
        }
        out[static_cast<std::size_t>(t)] = count > 0 ? acc / count : 0.0;
    }
    return out;
}

FeatureSequence extract(const PcgRecording& recording, const FeatureSpec& spec,
                        double win_ms, double shift_ms) {
    spec.validate(recording.sample_rate_hz);
    auto [grid, frames] =
        dsp::frame_signal(recording.samples, recording.sample_rate_hz, win_ms, shift_ms);

    std::vector<std::vector<double>> mfcc_track, delta_track, delta2_track;
    // the cepstral track is computed whenever any of MFCC/DELTA/DELTA2 is
    // requested; delta-only specs still derive from the full chain
    bool need_mfcc = false;
    for (auto c : spec.components)
        if (c == FeatureComponent::MFCC || c == FeatureComponent::DELTA ||
            c == FeatureComponent::DELTA2)
            need_mfcc = true;
    if (need_mfcc) {
        std::vector<std::vector<double>> spectra;
        spectra.reserve(frames.size());
        for (const auto& f : frames) spectra.push_back(dsp::power_spectrum(f));
        const auto fft_len = static_cast<int>((spectra[0].size() - 1) * 2);
        const auto fb = mel_filterbank(spec.n_mfcc, spec.mel_lo_hz, spec.mel_hi_hz,
                                       fft_len, recording.sample_rate_hz);
        mfcc_track = mfcc(spectra, fb, spec.n_mfcc);
        delta_track = delta(mfcc_track, spec.delta_width);
        delta2_track = delta(delta_track, spec.delta_width);
    }

    FeatureSequence seq;
    seq.grid = grid;
    std::vector<std::vector<const std::vector<double>*>> wide_columns; // per component
    std::vector<std::vector<double>> scalar_columns;

    // assemble column blocks in spec order
    struct Block {
        bool wide = false;
        const std::vector<std::vector<double>>* track = nullptr;
        std::vector<double> column;
    };
    std::vector<Block> blocks;
    for (auto c : spec.components) {
        Block b;
        switch (c) {
            case FeatureComponent::MFCC:
                b.wide = true;
                b.track = &mfcc_track;
                for (int j = 0; j < spec.n_mfcc; ++j)
                    seq.feature_names.push_back("mfcc" + std::to_string(j));
                break;
            case FeatureComponent::DELTA:
                b.wide = true;
                b.track = &delta_track;
                for (int j = 0; j < spec.n_mfcc; ++j)
                    seq.feature_names.push_back("d" + std::to_string(j));
                break;
            case FeatureComponent::DELTA2:
                b.wide = true;
                b.track = &delta2_track;
                for (int j = 0; j < spec.n_mfcc; ++j)
                    seq.feature_names.push_back("dd" + std::to_string(j));
                break;
            case FeatureComponent::HOE:
                b.column = homomorphic_envelope_feature(recording.samples, grid,
                                                        spec.hoe_cutoff_hz, spec.hoe_order);
                seq.feature_names.push_back("hoe");
                break;
            case FeatureComponent::HIE:
                b.column = hilbert_envelope_feature(recording.samples, grid);
                seq.feature_names.push_back("hie");
                break;
            case FeatureComponent::WE:
                b.column = wavelet_envelope_feature(recording.samples, grid,
                                                    spec.wavelet_id, spec.wavelet_level);
                seq.feature_names.push_back("we");
                break;
            case FeatureComponent::PSD:
                b.column = psd_feature(recording.samples, grid, spec.psd_lo_hz, spec.psd_hi_hz);
                seq.feature_names.push_back("psd");
                break;
        }
        blocks.push_back(std::move(b));
    }

    seq.frames.assign(static_cast<std::size_t>(grid.n_frames),
                      std::vector<double>());
    for (int t = 0; t < grid.n_frames; ++t) {
        auto& row = seq.frames[static_cast<std::size_t>(t)];
        row.reserve(static_cast<std::size_t>(spec.dim()));
        for (const auto& b : blocks) {
            if (b.wide) {
                const auto& src = (*b.track)[static_cast<std::size_t>(t)];
                row.insert(row.end(), src.begin(), src.end());
            } else {
                row.push_back(b.column[static_cast<std::size_t>(t)]);
            }
        }
        for (double v : row)
            if (!std::isfinite(v)) throw NumericError("extract: non-finite feature value");
    }
    return seq;
}

std::pair<FeatureSequence, NormStats> normalize(FeatureSequence features,
                                                const std::optional<NormStats>& stats) {
    const auto dim = static_cast<std::size_t>(features.dim());
    const auto n = features.frames.size();
    NormStats st;
    if (stats) {
        if (stats->mean.size() != dim || stats->stddev.size() != dim)
            throw DataError("normalize: stats dimension mismatch");
        st = *stats;
    } else {
        if (n == 0) throw DataError("normalize: empty sequence");
        st.mean.assign(dim, 0.0);
        st.stddev.assign(dim, 0.0);
        for (const auto& row : features.frames)
            for (std::size_t d = 0; d < dim; ++d) st.mean[d] += row[d];
        for (std::size_t d = 0; d < dim; ++d) st.mean[d] /= static_cast<double>(n);
        for (const auto& row : features.frames)
            for (std::size_t d = 0; d < dim; ++d) {
                const double c = row[d] - st.mean[d];
                st.stddev[d] += c * c;
            }
        for (std::size_t d = 0; d < dim; ++d)
            st.stddev[d] = std::sqrt(st.stddev[d] / static_cast<double>(n));
    }
    for (auto& row : features.frames)
        for (std::size_t d = 0; d < dim; ++d) {
            row[d] -= st.mean[d];
            if (st.stddev[d] >= 1e-8) row[d] /= st.stddev[d];
        }
    return {std::move(features), std::move(st)};
}

// ---------------------------------------------------------------- dumps

void save_features(const std::string& csv_path, const std::string& json_path,
                   const FeatureSequence& seq) {
    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot write " + csv_path);
    for (std::size_t d = 0; d < seq.feature_names.size(); ++d)
        csv << (d ? "," : "") << seq.feature_names[d];
    csv << '\n';
    char buf[32];
    for (const auto& row : seq.frames) {
        for (std::size_t d = 0; d < row.size(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", row[d]);
            csv << (d ? "," : "") << buf;
        }
        csv << '\n';
    }

    nlohmann::ordered_json meta;
    meta["frame_len_samples"] = seq.grid.frame_len_samples;
    meta["frame_shift_samples"] = seq.grid.frame_shift_samples;
    meta["n_frames"] = seq.grid.n_frames;
    meta["sample_rate_hz"] = seq.grid.sample_rate_hz;
    std::ofstream js(json_path);
    if (!js) throw DataError("cannot write " + json_path);
    js << meta.dump(2) << '\n';
}

FeatureSequence load_features(const std::string& csv_path, const std::string& json_path) {
    std::ifstream js(json_path);
    if (!js) throw DataError("cannot open " + json_path);
    nlohmann::json meta = nlohmann::json::parse(js);
    FeatureSequence seq;
    seq.grid.frame_len_samples = meta.at("frame_len_samples").get<int>();
    seq.grid.frame_shift_samples = meta.at("frame_shift_samples").get<int>();
    seq.grid.n_frames = meta.at("n_frames").get<int>();
    seq.grid.sample_rate_hz = meta.at("sample_rate_hz").get<int>();

    std::ifstream csv(csv_path);
    if (!csv) throw DataError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(csv, line)) throw DataError(csv_path + ": empty file");
    {
        std::istringstream hdr(line);
        std::string name;
        while (std::getline(hdr, name, ',')) seq.feature_names.push_back(name);
    }
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != seq.feature_names.size())
            throw DataError(csv_path + ": row width mismatch");
        seq.frames.push_back(std::move(vals));
    }
    return seq;
}

} // namespace pcgseg
