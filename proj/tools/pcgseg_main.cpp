// pcgseg: phonocardiogram heart-sound segmentation toolkit.
//
// Subcommands: dump-config, synth, extract, train, eval, segment, explain,
// feature-study. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numeric failure.

#include "pcgseg/config.hpp"
#include "pcgseg/errors.hpp"
#include "pcgseg/interpret.hpp"
#include "pcgseg/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace pcgseg;

namespace {

// ------------------------------------------------------------ shared flags

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> window_frames;
    std::string features;   // comma-separated component list
    std::optional<double> snr_db;
    std::string head;       // "linear" or "relu"
    std::optional<int> hidden_single;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_hidden = true) {
    cmd->add_option("--config", o.config_path, "Run-config JSON file");
    cmd->add_option("--seed", o.seed, "Override the run seed");
    cmd->add_option("--window-frames", o.window_frames, "Frames per window (odd)");
    cmd->add_option("--features", o.features,
                    "Comma-separated feature components, e.g. MFCC,DELTA,DELTA2");
    cmd->add_option("--snr-db", o.snr_db, "Training noise-augmentation SNR in dB");
    cmd->add_option("--head", o.head, "Output head activation: linear or relu")
        ->check(CLI::IsMember({"linear", "relu"}));
    if (with_hidden)
        cmd->add_option("--hidden-dim", o.hidden_single, "Hidden units per direction");
}

std::vector<FeatureComponent> parse_feature_list(const std::string& text) {
    std::vector<FeatureComponent> out;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(feature_component_from_string(tok));
    if (out.empty()) throw DataError("--features: empty component list");
    return out;
}

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config_file(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.window_frames) cfg.window_frames = *o.window_frames;
    if (!o.features.empty()) cfg.features.components = parse_feature_list(o.features);
    if (o.snr_db) cfg.train.noise_snr_db = *o.snr_db;
    if (!o.head.empty())
        cfg.head = o.head == "relu" ? HeadActivation::Relu : HeadActivation::Linear;
    if (o.hidden_single) cfg.hidden_dim = *o.hidden_single;
    cfg.train.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

int max_threads() {
    // Parallelism cap; the current implementation is single-threaded, so
    // any value >= 1 is honored trivially.
    if (const char* env = std::getenv("PCGSEG_THREADS")) {
        const int n = std::atoi(env);
        if (n < 1) throw DataError("PCGSEG_THREADS must be a positive integer");
        return n;
    }
    return 1;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// run directory layout produced by `train` and consumed by eval/segment/explain
struct RunArtifacts {
    RunConfig cfg;
    ModelParams params;
    ModelConfig mcfg;
    NormStats stats;
};

RunArtifacts load_run(const std::string& dir) {
    RunArtifacts a;
    a.cfg = load_config_file((fs::path(dir) / "config.json").string());
    auto [params, mcfg] = load_checkpoint((fs::path(dir) / "checkpoint.json").string());
    a.params = std::move(params);
    a.mcfg = mcfg;
    a.stats = load_norm_stats((fs::path(dir) / "norm.json").string());
    return a;
}

void save_eta_series(const fs::path& path, const std::vector<WindowExample>& windows,
                     const std::vector<double>& etas, const dsp::FrameGrid& grid,
                     const std::vector<WindowLabel>& decoded) {
    std::ostringstream out;
    out << "window_index,center_sample,eta,label\n";
    for (std::size_t i = 0; i < windows.size(); ++i)
        out << i << ',' << grid.center_sample(windows[i].center_frame) << ','
            << fmt(etas[i]) << ',' << to_string(decoded[i]) << '\n';
    write_text(path, out.str());
}

void save_events_csv(const fs::path& path, const std::vector<Event>& events) {
    std::ostringstream out;
    out << "start_sample,end_sample,state\n";
    for (const auto& e : events)
        out << e.start_sample << ',' << e.end_sample << ',' << to_string(e.state) << '\n';
    write_text(path, out.str());
}

// Minimal SVG line plot of the prediction series against the target series.
void save_svg_overlay(const fs::path& path, const std::vector<double>& etas,
                      const std::vector<double>& targets) {
    const int w = 1000, h = 240, pad = 10;
    const std::size_t n = etas.size();
    auto x_of = [&](std::size_t i) {
        return pad + static_cast<double>(i) * (w - 2 * pad) /
                         static_cast<double>(std::max<std::size_t>(n - 1, 1));
    };
    auto y_of = [&](double v) { return h / 2.0 - v * (h / 2.0 - pad); };
    auto polyline = [&](const std::vector<double>& ys, const char* color) {
        std::ostringstream p;
        p << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < n; ++i)
            p << x_of(i) << ',' << y_of(ys[i]) << ' ';
        p << "\"/>\n";
        return p.str();
    };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n<line x1=\"" << pad << "\" y1=\"" << h / 2.0 << "\" x2=\"" << w - pad
        << "\" y2=\"" << h / 2.0 << "\" stroke=\"#cccccc\"/>\n";
    if (!targets.empty()) svg << polyline(targets, "#888888");
    svg << polyline(etas, "#c0392b") << "</svg>\n";
    write_text(path, svg.str());
}

// ------------------------------------------------------------ subcommands

int cmd_dump_config(const CommonOpts& o, const std::string& out_path) {
    const auto cfg = resolve_config(o);
    const auto text = dump_config(cfg);
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    return 0;
}

int cmd_synth(const std::string& out_dir, int count, double duration_s, double bpm_lo,
              double bpm_hi, std::optional<double> snr_db, std::uint64_t seed) {
    if (count < 1) throw DataError("synth: --count must be >= 1");
    if (!(bpm_lo > 0.0 && bpm_lo <= bpm_hi)) throw DataError("synth: bad BPM range");
    fs::create_directories(out_dir);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> bpm_dist(bpm_lo, bpm_hi);
    for (int i = 0; i < count; ++i) {
        SynthConfig sc;
        sc.bpm = bpm_dist(rng);
        sc.duration_s = duration_s;
        sc.noise_snr_db = snr_db;
        sc.rng_seed = rng();
        auto rec = synth_pcg(sc);
        char name[32];
        std::snprintf(name, sizeof name, "rec%03d", i);
        rec.id = name;
        save_wav((fs::path(out_dir) / (rec.id + ".wav")).string(), rec);
        save_annotations((fs::path(out_dir) / (rec.id + ".csv")).string(), rec);
    }
    std::cout << "wrote " << count << " recordings to " << out_dir << "\n";
    return 0;
}

int cmd_extract(const CommonOpts& o, const std::string& in_dir, const std::string& out_dir) {
    const auto cfg = resolve_config(o);
    const auto recs = load_recording_dir(in_dir);
    fs::create_directories(out_dir);
    (void)max_threads();
    for (const auto& rec : recs) {
        auto r = rec.sample_rate_hz == cfg.sample_rate_hz
                     ? rec
                     : resample_recording(rec, cfg.sample_rate_hz);
        const auto seq = extract(r, cfg.features, cfg.win_ms, cfg.shift_ms);
        save_features((fs::path(out_dir) / (rec.id + ".features.csv")).string(),
                      (fs::path(out_dir) / (rec.id + ".features.json")).string(), seq);
    }
    std::cout << "extracted features for " << recs.size() << " recordings\n";
    return 0;
}

int run_one_training(const RunConfig& cfg, const std::vector<PcgRecording>& recs,
                     const fs::path& out_dir, bool quiet = false) {
    const auto ds = prepare_dataset(recs, cfg);
    const auto result = train(ds.train, ds.val, cfg.model_dims(), cfg.model_config(),
                              cfg.train, cfg.decode);
    fs::create_directories(out_dir);
    save_config_file((out_dir / "config.json").string(), cfg);
    save_checkpoint((out_dir / "checkpoint.json").string(), result.params,
                    cfg.model_config());
    save_norm_stats((out_dir / "norm.json").string(), ds.stats);
    save_history_csv((out_dir / "history.csv").string(), result.history);
    if (!quiet)
        std::cout << "best validation accuracy " << result.best_val_acc << " at epoch "
                  << result.best_epoch << "\n";
    if (result.diverged) {
        std::cerr << "training diverged; best-so-far checkpoint written\n";
        throw NumericError("training diverged");
    }
    return 0;
}

int cmd_train(const CommonOpts& o, const std::string& data_dir, const std::string& out_dir,
              const std::string& hidden_list) {
    auto cfg = resolve_config(o);
    const auto recs = load_recording_dir(data_dir);
    (void)max_threads();
    if (hidden_list.empty()) return run_one_training(cfg, recs, out_dir);

    // sweep mode: one run directory per hidden dimension
    std::istringstream ss(hidden_list);
    std::string tok;
    int rc = 0;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const int h = std::stoi(tok);
        if (h < 1) throw DataError("--hidden: dimensions must be positive");
        auto swept = cfg;
        swept.hidden_dim = h;
        swept.attn_dim = 0; // keep the 2H default in step with the sweep
        swept.validate();
        std::cout << "[sweep] hidden_dim=" << h << "\n";
        rc |= run_one_training(swept, recs, fs::path(out_dir) / ("h" + tok));
    }
    return rc;
}

int cmd_eval(const std::string& run_dir, const std::string& data_dir,
             const std::string& out_dir) {
    const auto art = load_run(run_dir);
    const auto recs = load_recording_dir(data_dir);
    if (recs.empty()) throw DataError("eval: no recordings in " + data_dir);
    (void)max_threads();

    std::vector<WindowExample> windows;
    std::size_t grid_samples = 0;
    std::ostringstream per_rec;
    per_rec << "recording,tp,fp,fn,tn,acc\n";
    for (const auto& rec : recs) {
        auto w = recording_windows(rec, art.cfg, &art.stats);
        const auto grid = grid_for(art.cfg, rec.samples.size());
        const auto r = evaluate(w, art.params, art.mcfg, art.cfg.decode, grid);
        const auto& c = r.window_report.counts;
        per_rec << rec.id << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
                << (r.window_report.acc ? fmt(*r.window_report.acc) : "") << '\n';
        grid_samples = std::max(grid_samples, rec.samples.size());
        windows.insert(windows.end(), w.begin(), w.end());
    }
    const auto grid = grid_for(art.cfg, grid_samples);
    const auto result = evaluate(windows, art.params, art.mcfg, art.cfg.decode, grid);

    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "metrics.json", metrics_to_json(result.window_report) + "\n");
    write_text(fs::path(out_dir) / "event_metrics.json",
               metrics_to_json(result.event_report) + "\n");
    write_text(fs::path(out_dir) / "per_recording.csv", per_rec.str());
    std::cout << metrics_to_json(result.window_report) << "\n";
    return 0;
}

int cmd_segment(const std::string& run_dir, const std::string& wav_path,
                const std::string& out_dir, const std::string& svg_path) {
    const auto art = load_run(run_dir);
    auto rec = load_wav(wav_path);
    // use the side-car annotation file when present (for overlay/labels)
    const auto ann = fs::path(wav_path).replace_extension(".csv");
    if (fs::exists(ann)) rec = load_annotations(ann.string(), std::move(rec));

    const auto windows = recording_windows(rec, art.cfg, &art.stats);
    if (windows.empty()) throw DataError("segment: recording too short for one window");
    const auto grid = grid_for(art.cfg, static_cast<std::size_t>(
        std::llround(static_cast<double>(rec.samples.size()) * art.cfg.sample_rate_hz /
                     rec.sample_rate_hz)));

    std::vector<double> etas(windows.size());
    std::vector<int> centers(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        etas[i] = model_forward(windows[i].features, art.params, art.mcfg, nullptr);
        centers[i] = windows[i].center_frame;
    }
    const auto [labels, events] = decode(etas, centers, art.cfg.decode, grid);

    fs::create_directories(out_dir);
    save_eta_series(fs::path(out_dir) / "eta.csv", windows, etas, grid, labels);
    save_events_csv(fs::path(out_dir) / "events.csv", events);
    if (!svg_path.empty()) {
        std::vector<double> targets;
        if (!rec.annotations.empty())
            for (const auto& w : windows) targets.push_back(w.target);
        save_svg_overlay(svg_path, etas, targets);
    }
    std::cout << events.size() << " events written to " << out_dir << "\n";
    return 0;
}

int cmd_explain(const std::string& run_dir, const std::string& wav_path,
                const std::string& out_dir) {
    const auto art = load_run(run_dir);
    auto rec = load_wav(wav_path);
    const auto ann = fs::path(wav_path).replace_extension(".csv");
    if (fs::exists(ann)) rec = load_annotations(ann.string(), std::move(rec));
    const auto windows = recording_windows(rec, art.cfg, &art.stats);
    if (windows.empty()) throw DataError("explain: recording too short for one window");
    fs::create_directories(out_dir);

    const int k = art.params.dims.seq_len;
    const auto d = static_cast<std::size_t>(art.params.dims.input_dim);

    // attention weights, one row per window
    {
        std::ostringstream out;
        out << "window_index";
        for (int t = 0; t < k; ++t) out << ",beta" << t;
        out << '\n';
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const auto beta = attention_weights(windows[i], art.params, art.mcfg);
            out << i;
            for (double b : beta) out << ',' << fmt(b);
            out << '\n';
        }
        write_text(fs::path(out_dir) / "attention.csv", out.str());
    }

    // occlusion importance per feature group, baseline = column means of
    // this recording's windows
    {
        std::vector<double> baseline(d, 0.0);
        for (const auto& w : windows)
            for (std::size_t t = 0; t < static_cast<std::size_t>(k); ++t)
                for (std::size_t j = 0; j < d; ++j) baseline[j] += w.features[t * d + j];
        for (double& b : baseline)
            b /= static_cast<double>(windows.size()) * static_cast<double>(k);

        // recover feature names from the configured spec ordering
        const auto seq_names = [&] {
            auto r = rec.sample_rate_hz == art.cfg.sample_rate_hz
                         ? rec
                         : resample_recording(rec, art.cfg.sample_rate_hz);
            return extract(r, art.cfg.features, art.cfg.win_ms, art.cfg.shift_ms)
                .feature_names;
        }();
        const auto groups = default_feature_groups(seq_names);
        std::ostringstream out;
        out << "group,mean_importance,mean_abs_importance\n";
        for (const auto& g : groups) {
            double mean = 0.0, mean_abs = 0.0;
            for (const auto& w : windows) {
                const double imp = occlusion_importance(w, art.params, art.mcfg, g, baseline);
                mean += imp;
                mean_abs += std::abs(imp);
            }
            mean /= static_cast<double>(windows.size());
            mean_abs /= static_cast<double>(windows.size());
            out << g.name << ',' << fmt(mean) << ',' << fmt(mean_abs) << '\n';
        }
        write_text(fs::path(out_dir) / "occlusion.csv", out.str());
    }

    // pooled embeddings and their 2-D PCA projection
    {
        const auto emb = export_embeddings(windows, art.params, art.mcfg);
        std::ostringstream out;
        out << "window_index";
        for (std::size_t j = 0; j < emb[0].size(); ++j) out << ",q" << j;
        out << '\n';
        for (std::size_t i = 0; i < emb.size(); ++i) {
            out << i;
            for (double v : emb[i]) out << ',' << fmt(v);
            out << '\n';
        }
        write_text(fs::path(out_dir) / "embeddings.csv", out.str());

        const auto proj = pca_2d(emb);
        std::ostringstream pca;
        pca << "x,y,label\n";
        for (std::size_t i = 0; i < proj.size(); ++i)
            pca << fmt(proj[i][0]) << ',' << fmt(proj[i][1]) << ','
                << to_string(windows[i].label) << '\n';
        write_text(fs::path(out_dir) / "pca.csv", pca.str());
    }
    std::cout << "explanations written to " << out_dir << "\n";
    return 0;
}

// Feature-combination study: one row per combination, averaged over seeds.
const std::vector<std::pair<std::string, std::vector<FeatureComponent>>>&
study_rows() {
    using F = FeatureComponent;
    static const std::vector<std::pair<std::string, std::vector<F>>> rows = {
        {"HoE", {F::HOE}},
        {"HiE", {F::HIE}},
        {"WE", {F::WE}},
        {"PSD", {F::PSD}},
        {"MFCC", {F::MFCC}},
        {"Delta", {F::DELTA}},
        {"Delta2", {F::DELTA2}},
        {"HoE+WE", {F::HOE, F::WE}},
        {"HiE+WE", {F::HIE, F::WE}},
        {"HoE+HiE+WE+PSD", {F::HOE, F::HIE, F::WE, F::PSD}},
        {"WE+PSD+MFCC", {F::WE, F::PSD, F::MFCC}},
        {"WE+HiE+MFCC+Delta", {F::WE, F::HIE, F::MFCC, F::DELTA}},
        {"WE+MFCC+Delta+PSD", {F::WE, F::MFCC, F::DELTA, F::PSD}},
        {"WE+HoE+HiE+PSD+MFCC+Delta+Delta2",
         {F::WE, F::HOE, F::HIE, F::PSD, F::MFCC, F::DELTA, F::DELTA2}},
        {"MFCC+Delta+Delta2", {F::MFCC, F::DELTA, F::DELTA2}},
    };
    return rows;
}

int cmd_feature_study(const CommonOpts& o, const std::string& data_dir,
                      const std::string& out_path, int n_seeds) {
    if (n_seeds < 1) throw DataError("feature-study: --seeds must be >= 1");
    auto base = resolve_config(o);
    const auto recs = load_recording_dir(data_dir);
    (void)max_threads();

    std::ostringstream out;
    out << "combination,seed,ppv,se,spe,acc,f1\n";
    auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };

    for (const auto& [name, comps] : study_rows()) {
        double acc_sum = 0.0;
        int acc_n = 0;
        for (int s = 0; s < n_seeds; ++s) {
            auto cfg = base;
            cfg.features.components = comps;
            cfg.seed = base.seed + static_cast<std::uint64_t>(s);
            cfg.train.seed = cfg.seed;
            cfg.validate();
            const auto ds = prepare_dataset(recs, cfg);
            const auto result = train(ds.train, ds.val, cfg.model_dims(),
                                      cfg.model_config(), cfg.train, cfg.decode);
            std::size_t max_len = 0;
            for (const auto& r : recs) max_len = std::max(max_len, r.samples.size());
            const auto grid = grid_for(cfg, max_len);
            const auto ev = evaluate(ds.test, result.params, cfg.model_config(),
                                     cfg.decode, grid);
            const auto& m = ev.window_report;
            out << name << ',' << s << ',' << cell(m.ppv) << ',' << cell(m.se) << ','
                << cell(m.spe) << ',' << cell(m.acc) << ',' << cell(m.f1) << '\n';
            if (m.acc) {
                acc_sum += *m.acc;
                ++acc_n;
            }
            std::cout << name << " seed " << s << " acc "
                      << (m.acc ? fmt(*m.acc) : "n/a") << "\n";
        }
        out << name << ",mean,,,,"
            << (acc_n > 0 ? fmt(acc_sum / acc_n) : std::string()) << ",\n";
    }
    write_text(out_path, out.str());
    std::cout << "study written to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PCG heart-sound segmentation toolkit"};
    app.require_subcommand(1);

    // dump-config
    CommonOpts dump_opts;
    std::string dump_out;
    auto* dump = app.add_subcommand("dump-config", "Print the resolved run configuration");
    add_common(dump, dump_opts);
    dump->add_option("--out", dump_out, "Write to a file instead of stdout");

    // synth
    std::string synth_out;
    int synth_count = 10;
    double synth_dur = 20.0, synth_bpm_lo = 50.0, synth_bpm_hi = 120.0;
    std::optional<double> synth_snr;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate synthetic PCG recordings");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--count", synth_count, "Number of recordings");
    synth->add_option("--duration", synth_dur, "Duration in seconds");
    synth->add_option("--bpm-lo", synth_bpm_lo, "Lower BPM bound");
    synth->add_option("--bpm-hi", synth_bpm_hi, "Upper BPM bound");
    synth->add_option("--snr-db", synth_snr, "Additive noise SNR in dB (omit for clean)");
    synth->add_option("--seed", synth_seed, "RNG seed");

    // extract
    CommonOpts ex_opts;
    std::string ex_in, ex_out;
    auto* ex = app.add_subcommand("extract", "Extract per-frame features");
    add_common(ex, ex_opts);
    ex->add_option("--in", ex_in, "Input recording directory")->required();
    ex->add_option("--out", ex_out, "Output directory")->required();

    // train
    CommonOpts tr_opts;
    std::string tr_data, tr_out, tr_hidden;
    auto* tr = app.add_subcommand("train", "Train a segmentation model");
    add_common(tr, tr_opts);
    tr->add_option("--data", tr_data, "Recording directory")->required();
    tr->add_option("--out", tr_out, "Run output directory")->required();
    tr->add_option("--hidden", tr_hidden,
                   "Comma-separated hidden sizes; sweep mode writes one run per size");

    // eval
    std::string ev_run, ev_data, ev_out;
    auto* ev = app.add_subcommand("eval", "Evaluate a trained run on a dataset");
    ev->add_option("--run", ev_run, "Run directory produced by train")->required();
    ev->add_option("--data", ev_data, "Recording directory")->required();
    ev->add_option("--out", ev_out, "Report output directory")->required();

    // segment
    std::string sg_run, sg_wav, sg_out, sg_svg;
    auto* sg = app.add_subcommand("segment", "Segment one recording");
    sg->add_option("--run", sg_run, "Run directory produced by train")->required();
    sg->add_option("--wav", sg_wav, "Input WAV file")->required();
    sg->add_option("--out", sg_out, "Output directory")->required();
    sg->add_option("--svg", sg_svg, "Optional SVG overlay path");

    // explain
    std::string xp_run, xp_wav, xp_out;
    auto* xp = app.add_subcommand("explain", "Interpretability exports for one recording");
    xp->add_option("--run", xp_run, "Run directory produced by train")->required();
    xp->add_option("--wav", xp_wav, "Input WAV file")->required();
    xp->add_option("--out", xp_out, "Output directory")->required();

    // feature-study
    CommonOpts fsopts;
    std::string fs_data, fs_out;
    int fs_seeds = 3;
    auto* fst = app.add_subcommand("feature-study",
                                   "Train/evaluate every standard feature combination");
    add_common(fst, fsopts);
    fst->add_option("--data", fs_data, "Recording directory")->required();
    fst->add_option("--out", fs_out, "Output CSV path")->required();
    fst->add_option("--seeds", fs_seeds, "Seeds per combination");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*dump) return cmd_dump_config(dump_opts, dump_out);
        if (*synth)
            return cmd_synth(synth_out, synth_count, synth_dur, synth_bpm_lo, synth_bpm_hi,
                             synth_snr, synth_seed);
        if (*ex) return cmd_extract(ex_opts, ex_in, ex_out);
        if (*tr) return cmd_train(tr_opts, tr_data, tr_out, tr_hidden);
        if (*ev) return cmd_eval(ev_run, ev_data, ev_out);
        if (*sg) return cmd_segment(sg_run, sg_wav, sg_out, sg_svg);
        if (*xp) return cmd_explain(xp_run, xp_wav, xp_out);
        if (*fst) return cmd_feature_study(fsopts, fs_data, fs_out, fs_seeds);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
