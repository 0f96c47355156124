#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pcgseg {

struct ModelDims {
    int input_dim = 18;   // D
    int hidden_dim = 80;  // H per direction
    int attn_dim = 160;   // defaults to 2H
    int seq_len = 7;      // K frames per window

    void validate() const;
};

enum class HeadActivation { Linear, Relu };

struct ModelConfig {
    HeadActivation head = HeadActivation::Linear;
    bool use_attention = true; // false = mean pooling over hidden states
};

// All trainable weights in one flat array. Layout (row-major matrices):
//   fwd{w_in 4HxD, w_rec 4HxH, bias 4H}, bwd{same},
//   attn_w AxK2H, attn_b A, ctx A, head_w 2H, head_b 1
// Gate row blocks are ordered i, f, g, o.
struct ModelParams {
    ModelDims dims;
    std::vector<double> flat;

    std::span<double> fwd_w_in();
    std::span<double> fwd_w_rec();
    std::span<double> fwd_bias();
    std::span<double> bwd_w_in();
    std::span<double> bwd_w_rec();
    std::span<double> bwd_bias();
    std::span<double> attn_w();
    std::span<double> attn_b();
    std::span<double> ctx();
    std::span<double> head_w();
    std::span<double> head_b();
    std::span<const double> fwd_w_in() const;
    std::span<const double> fwd_w_rec() const;
    std::span<const double> fwd_bias() const;
    std::span<const double> bwd_w_in() const;
    std::span<const double> bwd_w_rec() const;
    std::span<const double> bwd_bias() const;
    std::span<const double> attn_w() const;
    std::span<const double> attn_b() const;
    std::span<const double> ctx() const;
    std::span<const double> head_w() const;
    std::span<const double> head_b() const;
};

std::size_t param_count(const ModelDims& dims);
std::size_t count_params(const ModelParams& params);

// Glorot-uniform input/attention/head weights, orthogonal recurrent
// blocks per gate, forget-gate bias 1, context vector uniform in +-0.1.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

// Everything the backward pass needs from one forward evaluation.
struct ForwardTrace {
    // per direction, K x H each
    std::vector<double> fwd_i, fwd_f, fwd_g, fwd_o, fwd_c, fwd_h;
    std::vector<double> bwd_i, bwd_f, bwd_g, bwd_o, bwd_c, bwd_h;
    std::vector<double> hcat;   // K x 2H
    std::vector<double> attn_v; // K x A, tanh outputs
    std::vector<double> scores; // K
    std::vector<double> beta;   // K
    std::vector<double> q;      // 2H
    double pre_head = 0.0;
    double eta = 0.0;
};

// One LSTM cell step (shared by both directions).
void lstm_step(std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev,
               std::span<const double> w_in, std::span<const double> w_rec,
               std::span<const double> bias,
               int input_dim, int hidden_dim,
               std::span<double> h_out, std::span<double> c_out,
               std::span<double> gates_ifgo);

// features: K x D row-major flat
std::vector<double> bilstm_forward(std::span<const double> features,
                                   const ModelParams& params, ForwardTrace* trace);
void attention_forward(std::span<const double> hidden, const ModelParams& params,
                       bool use_attention, std::vector<double>& beta,
                       std::vector<double>& q, ForwardTrace* trace);
double head_forward(std::span<const double> q, const ModelParams& params,
                    HeadActivation activation, double* pre_activation);

double model_forward(std::span<const double> features, const ModelParams& params,
                     const ModelConfig& config, ForwardTrace* trace);

// Versioned JSON checkpoint; round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelConfig& config);
std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path);

} // namespace pcgseg
