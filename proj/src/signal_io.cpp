#include "pcgseg/signal_io.hpp"

#include "pcgseg/dsp.hpp"
#include "pcgseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace pcgseg {

const char* to_string(HeartState s) {
    switch (s) {
        case HeartState::S1: return "S1";
        case HeartState::Systole: return "Systole";
        case HeartState::S2: return "S2";
        case HeartState::Diastole: return "Diastole";
        case HeartState::None: return "None";
    }
    return "None";
}

HeartState heart_state_from_string(const std::string& token) {
    if (token == "S1") return HeartState::S1;
    if (token == "Systole") return HeartState::Systole;
    if (token == "S2") return HeartState::S2;
    if (token == "Diastole") return HeartState::Diastole;
    if (token == "None") return HeartState::None;
    throw DataError("unknown heart state token: " + token);
}

void validate_recording(const PcgRecording& rec) {
    if (rec.sample_rate_hz <= 0)
        throw DataError(rec.id + ": sample rate must be positive");
    for (double s : rec.samples)
        if (!(s >= -1.0 && s <= 1.0))
            throw DataError(rec.id + ": sample outside [-1, 1]");
    const auto n = static_cast<std::int64_t>(rec.samples.size());
    std::int64_t prev_end = 0;
    for (std::size_t i = 0; i < rec.annotations.size(); ++i) {
        const auto& a = rec.annotations[i];
        if (a.start_sample < 0 || a.start_sample >= a.end_sample)
            throw DataError(rec.id + ": annotation start >= end");
        if (a.end_sample > n)
            throw DataError(rec.id + ": annotation past end of signal");
        if (i > 0 && a.start_sample < prev_end)
            throw DataError(rec.id + ": overlapping annotations");
        prev_end = a.end_sample;
    }
}

// ---------------------------------------------------------------- WAV

namespace {

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.write(b, 2);
}

std::string stem_of(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    const auto base = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

} // namespace

PcgRecording load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file: " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0)
        throw DataError(path + ": not a RIFF file");
    read_u32(in); // riff size
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0)
        throw DataError(path + ": not a WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::vector<char> data;
    while (in.read(tag, 4)) {
        const std::uint32_t size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_u16(in);
            channels = read_u16(in);
            rate = read_u32(in);
            read_u32(in); // byte rate
            read_u16(in); // block align
            bits = read_u16(in);
            if (size > 16) in.seekg(size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            in.read(data.data(), size);
            break;
        } else {
            in.seekg(size + (size & 1), std::ios::cur);
        }
    }
    if (!have_fmt) throw DataError(path + ": missing fmt chunk");
    if (channels != 1)
        throw DataError(path + ": multi-channel audio not supported");
    if (format != 1 || bits != 16)
        throw DataError(path + ": unsupported encoding (need 16-bit PCM)");

    PcgRecording rec;
    rec.id = stem_of(path);
    rec.sample_rate_hz = static_cast<int>(rate);
    rec.samples.resize(data.size() / 2);
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const auto lo = static_cast<unsigned char>(data[2 * i]);
        const auto hi = static_cast<unsigned char>(data[2 * i + 1]);
        const auto v = static_cast<std::int16_t>(lo | (hi << 8));
        rec.samples[i] = static_cast<double>(v) / 32768.0;
    }
    validate_recording(rec);
    return rec;
}

void save_wav(const std::string& path, const PcgRecording& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write WAV file: " + path);
    const auto n = static_cast<std::uint32_t>(rec.samples.size());
    out.write("RIFF", 4);
    write_u32(out, 36 + 2 * n);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);
    write_u16(out, 1);
    write_u32(out, static_cast<std::uint32_t>(rec.sample_rate_hz));
    write_u32(out, static_cast<std::uint32_t>(rec.sample_rate_hz) * 2);
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, 2 * n);
    for (double s : rec.samples) {
        const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
        const auto v = static_cast<std::int16_t>(std::lround(clamped * 32768.0));
        write_u16(out, static_cast<std::uint16_t>(v));
    }
}

// ---------------------------------------------------------------- annotations

PcgRecording load_annotations(const std::string& path, PcgRecording recording) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file: " + path);
    std::string line;
    std::vector<StateInterval> anns;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == "start_sample,end_sample,state") continue;
        }
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw DataError(path + ": malformed row: " + line);
        StateInterval iv;
        try {
            iv.start_sample = std::stoll(a);
            iv.end_sample = std::stoll(b);
        } catch (const std::exception&) {
            throw DataError(path + ": malformed indices in row: " + line);
        }
        iv.state = heart_state_from_string(c);
        if (iv.start_sample >= iv.end_sample)
            throw DataError(path + ": start >= end in row: " + line);
        anns.push_back(iv);
    }
    std::sort(anns.begin(), anns.end(),
              [](const StateInterval& x, const StateInterval& y) {
                  return x.start_sample < y.start_sample;
              });
    recording.annotations = std::move(anns);
    validate_recording(recording);
    return recording;
}

void save_annotations(const std::string& path, const PcgRecording& rec) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write annotation file: " + path);
    out << "start_sample,end_sample,state\n";
    for (const auto& a : rec.annotations)
        out << a.start_sample << ',' << a.end_sample << ',' << to_string(a.state) << '\n';
}

// ---------------------------------------------------------------- synthesis

PcgRecording synth_pcg(const SynthConfig& cfg) {
    if (!(cfg.bpm >= 24.0 && cfg.bpm <= 315.0))
        throw DataError("synth_pcg: bpm outside [24, 315]");
    if (!(cfg.duration_s > 0.0))
        throw DataError("synth_pcg: duration must be positive");

    const int fs = cfg.sample_rate_hz;
    const double cycle_s = 60.0 / cfg.bpm;
    const double s1_dur_s = cfg.s1_dur_ms / 1000.0;
    const double s2_dur_s = cfg.s2_dur_ms / 1000.0;
    const double systole_frac = 0.30;
    if (s1_dur_s > systole_frac * cycle_s || systole_frac * cycle_s + s2_dur_s > cycle_s)
        throw DataError("synth_pcg: event durations exceed cycle length");

    PcgRecording rec;
    rec.sample_rate_hz = fs;
    const auto n = static_cast<std::int64_t>(std::llround(cfg.duration_s * fs));
    rec.samples.assign(static_cast<std::size_t>(n), 0.0);

    auto place_event = [&](double onset_s, double dur_s, double freq_hz, double amp,
                           HeartState state) -> bool {
        const auto on = static_cast<std::int64_t>(std::llround(onset_s * fs));
        const auto len = static_cast<std::int64_t>(std::llround(dur_s * fs));
        if (on < 0 || on + len > n || len <= 0) return false;
        const double tau = dur_s / 3.0;
        for (std::int64_t i = 0; i < len; ++i) {
            const double t = static_cast<double>(i) / fs;
            rec.samples[static_cast<std::size_t>(on + i)] +=
                amp * std::exp(-t / tau) * std::sin(2.0 * std::numbers::pi * freq_hz * t);
        }
        rec.annotations.push_back({on, on + len, state});
        return true;
    };

    for (int cyc = 0;; ++cyc) {
        const double t0 = cyc * cycle_s;
        if (t0 + s1_dur_s > cfg.duration_s + 1e-12) break;
        if (!place_event(t0, s1_dur_s, cfg.s1_center_hz, 0.6, HeartState::S1)) break;
        place_event(t0 + systole_frac * cycle_s, s2_dur_s, cfg.s2_center_hz, 0.45,
                    HeartState::S2);
    }

    if (cfg.noise_snr_db) {
        double p_sig = 0.0;
        for (double s : rec.samples) p_sig += s * s;
        p_sig /= static_cast<double>(n);
        if (p_sig > 0.0) {
            const double sigma = std::sqrt(p_sig / std::pow(10.0, *cfg.noise_snr_db / 10.0));
            std::mt19937_64 rng(cfg.rng_seed);
            std::normal_distribution<double> gauss(0.0, sigma);
            for (double& s : rec.samples) s = std::clamp(s + gauss(rng), -1.0, 1.0);
        }
    }

    std::sort(rec.annotations.begin(), rec.annotations.end(),
              [](const StateInterval& x, const StateInterval& y) {
                  return x.start_sample < y.start_sample;
              });
    validate_recording(rec);
    return rec;
}

// ---------------------------------------------------------------- split

DatasetSplit split_dataset(std::vector<PcgRecording> recordings,
                           double train_ratio, double val_ratio, double test_ratio,
                           std::uint64_t seed) {
    if (!(train_ratio > 0.0 && val_ratio > 0.0 && test_ratio > 0.0))
        throw DataError("split_dataset: ratios must be positive");
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw DataError("split_dataset: ratios must sum to 1");
    const auto n = recordings.size();
    if (n < 3)
        throw DataError("split_dataset: fewer recordings than partitions");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_ratio));
    auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_ratio));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 2);
    n_val = std::clamp<std::size_t>(n_val, 1, n - n_train - 1);

    DatasetSplit out;
    for (std::size_t i = 0; i < n; ++i) {
        auto& rec = recordings[order[i]];
        if (i < n_train)
            out.train.push_back(std::move(rec));
        else if (i < n_train + n_val)
            out.val.push_back(std::move(rec));
        else
            out.test.push_back(std::move(rec));
    }
    return out;
}

PcgRecording resample_recording(const PcgRecording& rec, int to_hz) {
    if (rec.sample_rate_hz == to_hz) return rec;
    PcgRecording out;
    out.id = rec.id;
    out.sample_rate_hz = to_hz;
    out.samples = dsp::resample(rec.samples, rec.sample_rate_hz, to_hz);
    for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
    const double scale = static_cast<double>(to_hz) / rec.sample_rate_hz;
    const auto n = static_cast<std::int64_t>(out.samples.size());
    std::int64_t prev_end = 0;
    for (const auto& a : rec.annotations) {
        StateInterval iv;
        iv.start_sample = std::max(prev_end, static_cast<std::int64_t>(std::llround(
                                                 static_cast<double>(a.start_sample) * scale)));
        iv.end_sample = std::min(n, static_cast<std::int64_t>(std::llround(
                                        static_cast<double>(a.end_sample) * scale)));
        iv.state = a.state;
        if (iv.start_sample < iv.end_sample) {
            out.annotations.push_back(iv);
            prev_end = iv.end_sample;
        }
    }
    validate_recording(out);
    return out;
}

} // namespace pcgseg
