#include "pcgseg/config.hpp"

#include "pcgseg/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pcgseg {

using nlohmann::ordered_json;

ModelDims RunConfig::model_dims() const {
    ModelDims d;
    d.input_dim = features.dim();
    d.hidden_dim = hidden_dim;
    d.attn_dim = attn_dim > 0 ? attn_dim : 2 * hidden_dim;
    d.seq_len = window_frames;
    return d;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig c;
    c.head = head;
    c.use_attention = use_attention;
    return c;
}

void RunConfig::validate() const {
    if (sample_rate_hz <= 0) throw DataError("config: sample_rate_hz must be positive");
    if (!(win_ms > 0.0) || !(shift_ms > 0.0) || shift_ms > win_ms)
        throw DataError("config: need 0 < shift_ms <= win_ms");
    if (window_frames < 1 || window_frames % 2 == 0)
        throw DataError("config: window_frames must be odd and positive");
    if (train_stride < 1) throw DataError("config: train_stride must be >= 1");
    features.validate(sample_rate_hz);
    model_dims().validate();
    train.validate();
    if (!(decode.theta_neg < 0.0 && 0.0 < decode.theta_pos))
        throw DataError("config: need theta_neg < 0 < theta_pos");
}

namespace {

void check_keys(const ordered_json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw DataError("config: unknown key '" + key + "' in " + where);
}

} // namespace

std::string dump_config(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["sample_rate_hz"] = c.sample_rate_hz;
    j["win_ms"] = c.win_ms;
    j["shift_ms"] = c.shift_ms;
    j["window_frames"] = c.window_frames;
    j["train_stride"] = c.train_stride;

    ordered_json f;
    f["components"] = ordered_json::array();
    for (auto comp : c.features.components) f["components"].push_back(to_string(comp));
    f["n_mfcc"] = c.features.n_mfcc;
    f["mel_lo_hz"] = c.features.mel_lo_hz;
    f["mel_hi_hz"] = c.features.mel_hi_hz;
    f["delta_width"] = c.features.delta_width;
    f["wavelet_id"] = c.features.wavelet_id;
    f["wavelet_level"] = c.features.wavelet_level;
    f["psd_lo_hz"] = c.features.psd_lo_hz;
    f["psd_hi_hz"] = c.features.psd_hi_hz;
    f["hoe_cutoff_hz"] = c.features.hoe_cutoff_hz;
    f["hoe_order"] = c.features.hoe_order;
    j["features"] = f;

    ordered_json m;
    m["hidden_dim"] = c.hidden_dim;
    m["attn_dim"] = c.attn_dim;
    m["head"] = c.head == HeadActivation::Relu ? "relu" : "linear";
    m["use_attention"] = c.use_attention;
    j["model"] = m;

    ordered_json t;
    t["batch_size"] = c.train.batch_size;
    t["lr_phase1"] = c.train.lr_phase1;
    t["epochs_phase1"] = c.train.epochs_phase1;
    t["lr_phase2"] = c.train.lr_phase2;
    t["epochs_phase2"] = c.train.epochs_phase2;
    t["adam_beta1"] = c.train.adam_beta1;
    t["adam_beta2"] = c.train.adam_beta2;
    t["adam_eps"] = c.train.adam_eps;
    if (c.train.noise_snr_db)
        t["noise_snr_db"] = *c.train.noise_snr_db;
    else
        t["noise_snr_db"] = nullptr;
    t["grad_clip_norm"] = c.train.grad_clip_norm;
    j["train"] = t;

    ordered_json d;
    d["theta_pos"] = c.decode.theta_pos;
    d["theta_neg"] = c.decode.theta_neg;
    d["min_dur_ms"] = c.decode.min_dur_ms;
    j["decode"] = d;

    ordered_json s;
    s["train"] = c.split_train;
    s["val"] = c.split_val;
    s["test"] = c.split_test;
    j["split"] = s;

    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw DataError(std::string("config: JSON parse failure: ") + e.what());
    }
    RunConfig c;
    check_keys(j, {"seed", "sample_rate_hz", "win_ms", "shift_ms", "window_frames",
                   "train_stride", "features", "model", "train", "decode", "split"},
               "top level");
    auto get = [](const ordered_json& o, const char* key, auto& dst) {
        if (o.contains(key)) dst = o.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get(j, "seed", c.seed);
    get(j, "sample_rate_hz", c.sample_rate_hz);
    get(j, "win_ms", c.win_ms);
    get(j, "shift_ms", c.shift_ms);
    get(j, "window_frames", c.window_frames);
    get(j, "train_stride", c.train_stride);

    if (j.contains("features")) {
        const auto& f = j.at("features");
        check_keys(f, {"components", "n_mfcc", "mel_lo_hz", "mel_hi_hz", "delta_width",
                       "wavelet_id", "wavelet_level", "psd_lo_hz", "psd_hi_hz",
                       "hoe_cutoff_hz", "hoe_order"},
                   "features");
        if (f.contains("components")) {
            c.features.components.clear();
            for (const auto& comp : f.at("components"))
                c.features.components.push_back(
                    feature_component_from_string(comp.get<std::string>()));
        }
        get(f, "n_mfcc", c.features.n_mfcc);
        get(f, "mel_lo_hz", c.features.mel_lo_hz);
        get(f, "mel_hi_hz", c.features.mel_hi_hz);
        get(f, "delta_width", c.features.delta_width);
        get(f, "wavelet_id", c.features.wavelet_id);
        get(f, "wavelet_level", c.features.wavelet_level);
        get(f, "psd_lo_hz", c.features.psd_lo_hz);
        get(f, "psd_hi_hz", c.features.psd_hi_hz);
        get(f, "hoe_cutoff_hz", c.features.hoe_cutoff_hz);
        get(f, "hoe_order", c.features.hoe_order);
    }

    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, {"hidden_dim", "attn_dim", "head", "use_attention"}, "model");
        get(m, "hidden_dim", c.hidden_dim);
        get(m, "attn_dim", c.attn_dim);
        if (m.contains("head")) {
            const auto h = m.at("head").get<std::string>();
            if (h == "relu")
                c.head = HeadActivation::Relu;
            else if (h == "linear")
                c.head = HeadActivation::Linear;
            else
                throw DataError("config: head must be 'linear' or 'relu'");
        }
        get(m, "use_attention", c.use_attention);
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t, {"batch_size", "lr_phase1", "epochs_phase1", "lr_phase2",
                       "epochs_phase2", "adam_beta1", "adam_beta2", "adam_eps",
                       "noise_snr_db", "grad_clip_norm"},
                   "train");
        get(t, "batch_size", c.train.batch_size);
        get(t, "lr_phase1", c.train.lr_phase1);
        get(t, "epochs_phase1", c.train.epochs_phase1);
        get(t, "lr_phase2", c.train.lr_phase2);
        get(t, "epochs_phase2", c.train.epochs_phase2);
        get(t, "adam_beta1", c.train.adam_beta1);
        get(t, "adam_beta2", c.train.adam_beta2);
        get(t, "adam_eps", c.train.adam_eps);
        if (t.contains("noise_snr_db")) {
            if (t.at("noise_snr_db").is_null())
                c.train.noise_snr_db.reset();
            else
                c.train.noise_snr_db = t.at("noise_snr_db").get<double>();
        }
        get(t, "grad_clip_norm", c.train.grad_clip_norm);
    }

    if (j.contains("decode")) {
        const auto& d = j.at("decode");
        check_keys(d, {"theta_pos", "theta_neg", "min_dur_ms"}, "decode");
        get(d, "theta_pos", c.decode.theta_pos);
        get(d, "theta_neg", c.decode.theta_neg);
        get(d, "min_dur_ms", c.decode.min_dur_ms);
    }

    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, {"train", "val", "test"}, "split");
        get(s, "train", c.split_train);
        get(s, "val", c.split_val);
        get(s, "test", c.split_test);
    }

    c.validate();
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config_file(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write config: " + path);
    out << dump_config(cfg);
}

} // namespace pcgseg
