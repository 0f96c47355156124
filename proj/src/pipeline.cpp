#include "pcgseg/pipeline.hpp"

#include "pcgseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

namespace pcgseg {

namespace fs = std::filesystem;

std::vector<PcgRecording> load_recording_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<fs::path> wavs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            wavs.push_back(entry.path());
    std::sort(wavs.begin(), wavs.end());
    if (wavs.empty()) throw DataError("no WAV files in " + dir);

    std::vector<PcgRecording> recs;
    for (const auto& w : wavs) {
        auto rec = load_wav(w.string());
        fs::path ann = w;
        ann.replace_extension(".csv");
        if (fs::exists(ann)) rec = load_annotations(ann.string(), std::move(rec));
        recs.push_back(std::move(rec));
    }
    return recs;
}

dsp::FrameGrid grid_for(const RunConfig& cfg, std::size_t n_samples) {
    dsp::FrameGrid g;
    g.sample_rate_hz = cfg.sample_rate_hz;
    g.frame_len_samples =
        static_cast<int>(std::lround(cfg.win_ms * cfg.sample_rate_hz / 1000.0));
    g.frame_shift_samples =
        static_cast<int>(std::lround(cfg.shift_ms * cfg.sample_rate_hz / 1000.0));
    g.n_frames = static_cast<int>((static_cast<long long>(n_samples) - g.frame_len_samples) /
                                  g.frame_shift_samples) + 1;
    return g;
}

std::vector<WindowExample> recording_windows(const PcgRecording& rec,
                                             const RunConfig& cfg,
                                             const NormStats* stats,
                                             int stride) {
    const auto resampled = resample_recording(rec, cfg.sample_rate_hz);
    auto seq = extract(resampled, cfg.features, cfg.win_ms, cfg.shift_ms);
    if (stats) seq = normalize(std::move(seq), *stats).first;
    const auto labels = frame_labels(resampled, seq.grid);
    return make_windows(seq, labels, cfg.window_frames, stride, rec.id);
}

PreparedDataset prepare_dataset(const std::vector<PcgRecording>& recordings,
                                const RunConfig& cfg) {
    cfg.validate();
    auto split = split_dataset(recordings, cfg.split_train, cfg.split_val,
                               cfg.split_test, cfg.seed);

    // noise augmentation happens on the raw training signals, before
    // feature extraction
    std::mt19937_64 noise_rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ull);
    std::vector<PcgRecording> train_recs;
    for (auto& rec : split.train) {
        PcgRecording r = std::move(rec);
        if (cfg.train.noise_snr_db) {
            r.samples = augment_noise(r.samples, cfg.train.noise_snr_db, noise_rng);
            for (double& s : r.samples) s = std::clamp(s, -1.0, 1.0);
        }
        train_recs.push_back(std::move(r));
    }

    // fit normalization on pooled training-split frames
    std::vector<FeatureSequence> train_seqs;
    FeatureSequence pooled;
    for (const auto& rec : train_recs) {
        const auto resampled = resample_recording(rec, cfg.sample_rate_hz);
        auto seq = extract(resampled, cfg.features, cfg.win_ms, cfg.shift_ms);
        pooled.feature_names = seq.feature_names;
        for (const auto& row : seq.frames) pooled.frames.push_back(row);
        train_seqs.push_back(std::move(seq));
    }
    const auto stats = normalize(std::move(pooled), std::nullopt).second;

    PreparedDataset out;
    out.stats = stats;
    for (std::size_t i = 0; i < train_recs.size(); ++i) {
        auto seq = normalize(std::move(train_seqs[i]), stats).first;
        const auto resampled = resample_recording(train_recs[i], cfg.sample_rate_hz);
        const auto labels = frame_labels(resampled, seq.grid);
        auto ws = make_windows(seq, labels, cfg.window_frames, cfg.train_stride,
                               train_recs[i].id);
        out.train.insert(out.train.end(), std::make_move_iterator(ws.begin()),
                         std::make_move_iterator(ws.end()));
    }
    for (const auto& rec : split.val) {
        auto ws = recording_windows(rec, cfg, &stats);
        out.val.insert(out.val.end(), std::make_move_iterator(ws.begin()),
                       std::make_move_iterator(ws.end()));
    }
    for (const auto& rec : split.test) {
        auto ws = recording_windows(rec, cfg, &stats);
        out.test.insert(out.test.end(), std::make_move_iterator(ws.begin()),
                        std::make_move_iterator(ws.end()));
    }
    return out;
}

EvalResult evaluate(const std::vector<WindowExample>& windows,
                    const ModelParams& params, const ModelConfig& mcfg,
                    const DecodeConfig& dcfg, const dsp::FrameGrid& grid,
                    double event_tolerance_ms) {
    if (windows.empty()) throw DataError("evaluate: empty window set");
    EvalResult res;
    res.etas.reserve(windows.size());
    for (const auto& w : windows)
        res.etas.push_back(model_forward(w.features, params, mcfg, nullptr));

    std::vector<WindowLabel> pred_all, truth_all;
    ConfusionCounts event_counts;

    // decode per recording so the run-merge never crosses recordings
    std::size_t i = 0;
    while (i < windows.size()) {
        std::size_t j = i;
        while (j + 1 < windows.size() &&
               windows[j + 1].recording_id == windows[i].recording_id)
            ++j;
        std::vector<double> eta(res.etas.begin() + static_cast<std::ptrdiff_t>(i),
                                res.etas.begin() + static_cast<std::ptrdiff_t>(j + 1));
        std::vector<int> centers;
        std::vector<WindowLabel> truth;
        for (std::size_t t = i; t <= j; ++t) {
            centers.push_back(windows[t].center_frame);
            truth.push_back(windows[t].label);
        }
        auto [pred, events] = decode(eta, centers, dcfg, grid);
        pred_all.insert(pred_all.end(), pred.begin(), pred.end());
        truth_all.insert(truth_all.end(), truth.begin(), truth.end());

        // truth events from label runs
        std::vector<Event> truth_events;
        std::size_t a = 0;
        while (a < truth.size()) {
            if (truth[a] == WindowLabel::None) {
                ++a;
                continue;
            }
            std::size_t b = a;
            while (b + 1 < truth.size() && truth[b + 1] == truth[a] &&
                   centers[b + 1] == centers[b] + 1)
                ++b;
            Event ev;
            ev.state = truth[a];
            ev.start_sample = grid.center_sample(centers[a]) - grid.frame_shift_samples / 2;
            ev.end_sample = grid.center_sample(centers[b]) + grid.frame_shift_samples / 2;
            truth_events.push_back(ev);
            a = b + 1;
        }
        const auto ec = event_confusion(events, truth_events, event_tolerance_ms,
                                        grid.sample_rate_hz);
        event_counts.tp += ec.tp;
        event_counts.fp += ec.fp;
        event_counts.fn += ec.fn;
        i = j + 1;
    }

    res.window_report = metrics(confusion(pred_all, truth_all));
    res.event_report = metrics(event_counts);
    return res;
}

void save_norm_stats(const std::string& path, const NormStats& stats) {
    nlohmann::ordered_json j;
    j["mean"] = stats.mean;
    j["stddev"] = stats.stddev;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump() << '\n';
}

NormStats load_norm_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    NormStats st;
    st.mean = j.at("mean").get<std::vector<double>>();
    st.stddev = j.at("stddev").get<std::vector<double>>();
    return st;
}

} // namespace pcgseg
