#pragma once

#include "pcgseg/decode_eval.hpp"
#include "pcgseg/features.hpp"
#include "pcgseg/model.hpp"
#include "pcgseg/training.hpp"

#include <cstdint>
#include <string>

namespace pcgseg {

// Everything one run needs, serialized as a single JSON document.
// Unknown keys are rejected on load.
struct RunConfig {
    std::uint64_t seed = 0;
    int sample_rate_hz = 1600;
    double win_ms = 80.0;
    double shift_ms = 20.0;
    int window_frames = 7; // K
    int train_stride = 1;  // window stride for the training split only

    FeatureSpec features;
    int hidden_dim = 80;
    int attn_dim = 0; // 0 means 2*hidden_dim
    HeadActivation head = HeadActivation::Linear;
    bool use_attention = true;

    TrainConfig train;
    DecodeConfig decode;

    double split_train = 0.8;
    double split_val = 0.1;
    double split_test = 0.1;

    ModelDims model_dims() const;
    ModelConfig model_config() const;
    void validate() const;
};

std::string dump_config(const RunConfig& cfg); // canonical JSON text
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
void save_config_file(const std::string& path, const RunConfig& cfg);

} // namespace pcgseg
