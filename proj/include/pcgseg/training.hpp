#pragma once

#include "pcgseg/decode_eval.hpp"
#include "pcgseg/model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pcgseg {

struct TrainConfig {
    int batch_size = 32;
    double lr_phase1 = 0.002;
    int epochs_phase1 = 30;
    double lr_phase2 = 0.0002;
    int epochs_phase2 = 70;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::optional<double> noise_snr_db = 15.0; // used at dataset-build time
    double grad_clip_norm = 5.0;               // <= 0 disables clipping
    std::uint64_t seed = 0;

    void validate() const;
};

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

// Exact reverse-mode gradients of the batch-mean MSE through head,
// attention and both LSTM directions. Returns (loss, gradient) with the
// gradient in ModelParams flat layout.
std::pair<double, std::vector<double>>
backward(std::span<const WindowExample> batch, const ModelParams& params,
         const ModelConfig& config);

struct AdamState {
    std::vector<double> m, v;
};

void adam_step(ModelParams& params, std::span<const double> grads, AdamState& state,
               double lr, long long t, const TrainConfig& cfg);

// Additive white Gaussian noise at the requested SNR relative to the
// measured power of this signal. Zero-power inputs pass through.
std::vector<double> augment_noise(const std::vector<double>& samples,
                                  std::optional<double> snr_db, std::mt19937_64& rng);

struct EpochStats {
    int epoch = 0;
    int phase = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    ModelParams params; // from the best-validation-accuracy epoch
    std::vector<EpochStats> history;
    double best_val_acc = 0.0;
    int best_epoch = 0;
    bool diverged = false;
};

TrainResult train(const std::vector<WindowExample>& train_set,
                  const std::vector<WindowExample>& val_set,
                  const ModelDims& dims, const ModelConfig& mcfg,
                  const TrainConfig& tcfg,
                  const DecodeConfig& dcfg = {});

void save_history_csv(const std::string& path, const std::vector<EpochStats>& history);

// Window-level accuracy of threshold-decoded predictions.
double window_accuracy(const std::vector<WindowExample>& windows,
                       const ModelParams& params, const ModelConfig& mcfg,
                       const DecodeConfig& dcfg);

} // namespace pcgseg
