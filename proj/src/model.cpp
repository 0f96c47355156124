#include "pcgseg/model.hpp"

#include "pcgseg/errors.hpp"
#include "pcgseg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace pcgseg {

void ModelDims::validate() const {
    if (input_dim < 1 || hidden_dim < 1 || attn_dim < 1 || seq_len < 1)
        throw DataError("model dims must all be positive");
}

namespace {

struct Offsets {
    std::size_t fwd_w_in, fwd_w_rec, fwd_bias;
    std::size_t bwd_w_in, bwd_w_rec, bwd_bias;
    std::size_t attn_w, attn_b, ctx, head_w, head_b, total;
};

Offsets offsets(const ModelDims& d) {
    const auto D = static_cast<std::size_t>(d.input_dim);
    const auto H = static_cast<std::size_t>(d.hidden_dim);
    const auto A = static_cast<std::size_t>(d.attn_dim);
    Offsets o{};
    std::size_t p = 0;
    o.fwd_w_in = p; p += 4 * H * D;
    o.fwd_w_rec = p; p += 4 * H * H;
    o.fwd_bias = p; p += 4 * H;
    o.bwd_w_in = p; p += 4 * H * D;
    o.bwd_w_rec = p; p += 4 * H * H;
    o.bwd_bias = p; p += 4 * H;
    o.attn_w = p; p += A * 2 * H;
    o.attn_b = p; p += A;
    o.ctx = p; p += A;
    o.head_w = p; p += 2 * H;
    o.head_b = p; p += 1;
    o.total = p;
    return o;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

#define PCGSEG_SPAN_ACCESSOR(name, next)                                        \
    std::span<double> ModelParams::name() {                                     \
        const auto o = offsets(dims);                                           \
        return {flat.data() + o.name, o.next - o.name};                         \
    }                                                                           \
    std::span<const double> ModelParams::name() const {                         \
        const auto o = offsets(dims);                                           \
        return {flat.data() + o.name, o.next - o.name};                         \
    }

PCGSEG_SPAN_ACCESSOR(fwd_w_in, fwd_w_rec)
PCGSEG_SPAN_ACCESSOR(fwd_w_rec, fwd_bias)
PCGSEG_SPAN_ACCESSOR(fwd_bias, bwd_w_in)
PCGSEG_SPAN_ACCESSOR(bwd_w_in, bwd_w_rec)
PCGSEG_SPAN_ACCESSOR(bwd_w_rec, bwd_bias)
PCGSEG_SPAN_ACCESSOR(bwd_bias, attn_w)
PCGSEG_SPAN_ACCESSOR(attn_w, attn_b)
PCGSEG_SPAN_ACCESSOR(attn_b, ctx)
PCGSEG_SPAN_ACCESSOR(ctx, head_w)
PCGSEG_SPAN_ACCESSOR(head_w, head_b)
PCGSEG_SPAN_ACCESSOR(head_b, total)

#undef PCGSEG_SPAN_ACCESSOR

std::size_t param_count(const ModelDims& dims) { return offsets(dims).total; }
std::size_t count_params(const ModelParams& params) { return params.flat.size(); }

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
    dims.validate();
    const auto H = static_cast<std::size_t>(dims.hidden_dim);
    ModelParams p;
    p.dims = dims;
    p.flat.assign(param_count(dims), 0.0);

    std::mt19937_64 rng(seed);
    auto uniform_fill = [&rng](std::span<double> dst, double limit) {
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& v : dst) v = dist(rng);
    };
    auto orthogonal_fill = [&rng, H](std::span<double> dst) {
        // four HxH gate blocks, each orthogonalized by Gram-Schmidt on
        // rows of a gaussian draw
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int block = 0; block < 4; ++block) {
            double* m = dst.data() + static_cast<std::size_t>(block) * H * H;
            for (std::size_t i = 0; i < H * H; ++i) m[i] = gauss(rng);
            for (std::size_t r = 0; r < H; ++r) {
                double* row = m + r * H;
                for (std::size_t s = 0; s < r; ++s) {
                    const double* prev = m + s * H;
                    const double proj = kern::active().dot(row, prev, H);
                    kern::active().axpy(-proj, prev, row, H);
                }
                const double norm = std::sqrt(kern::active().dot(row, row, H));
                for (std::size_t c = 0; c < H; ++c) row[c] /= norm;
            }
        }
    };

    const double in_limit = std::sqrt(6.0 / (dims.input_dim + dims.hidden_dim));
    uniform_fill(p.fwd_w_in(), in_limit);
    orthogonal_fill(p.fwd_w_rec());
    uniform_fill(p.bwd_w_in(), in_limit);
    orthogonal_fill(p.bwd_w_rec());
    // forget-gate bias 1, other biases 0
    for (std::size_t i = H; i < 2 * H; ++i) {
        p.fwd_bias()[i] = 1.0;
        p.bwd_bias()[i] = 1.0;
    }
    uniform_fill(p.attn_w(), std::sqrt(6.0 / (2.0 * dims.hidden_dim + dims.attn_dim)));
    uniform_fill(p.ctx(), 0.1);
    uniform_fill(p.head_w(), std::sqrt(6.0 / (2.0 * dims.hidden_dim + 1.0)));
    return p;
}

void lstm_step(std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev,
               std::span<const double> w_in, std::span<const double> w_rec,
               std::span<const double> bias,
               int input_dim, int hidden_dim,
               std::span<double> h_out, std::span<double> c_out,
               std::span<double> gates_ifgo) {
    const auto D = static_cast<std::size_t>(input_dim);
    const auto H = static_cast<std::size_t>(hidden_dim);
    const auto& k = kern::active();

    static thread_local std::vector<double> z, zr;
    z.resize(4 * H);
    zr.resize(4 * H);
    k.gemv(w_in.data(), x.data(), bias.data(), z.data(), 4 * H, D);
    k.gemv(w_rec.data(), h_prev.data(), nullptr, zr.data(), 4 * H, H);
    for (std::size_t i = 0; i < 4 * H; ++i) z[i] += zr[i];

    for (std::size_t j = 0; j < H; ++j) {
        if (!std::isfinite(z[j])) throw NumericError("lstm_step: non-finite activation");
        const double gi = sigmoid(z[j]);
        const double gf = sigmoid(z[H + j]);
        const double gg = std::tanh(z[2 * H + j]);
        const double go = sigmoid(z[3 * H + j]);
        const double c = gf * c_prev[j] + gi * gg;
        c_out[j] = c;
        h_out[j] = go * std::tanh(c);
        gates_ifgo[j] = gi;
        gates_ifgo[H + j] = gf;
        gates_ifgo[2 * H + j] = gg;
        gates_ifgo[3 * H + j] = go;
    }
}

namespace {

void run_direction(std::span<const double> features, const ModelParams& params,
                   bool backward_dir, ForwardTrace& tr) {
    const auto& d = params.dims;
    const auto D = static_cast<std::size_t>(d.input_dim);
    const auto H = static_cast<std::size_t>(d.hidden_dim);
    const auto K = static_cast<std::size_t>(d.seq_len);

    auto& gi = backward_dir ? tr.bwd_i : tr.fwd_i;
    auto& gf = backward_dir ? tr.bwd_f : tr.fwd_f;
    auto& gg = backward_dir ? tr.bwd_g : tr.fwd_g;
    auto& go = backward_dir ? tr.bwd_o : tr.fwd_o;
    auto& cs = backward_dir ? tr.bwd_c : tr.fwd_c;
    auto& hs = backward_dir ? tr.bwd_h : tr.fwd_h;
    gi.assign(K * H, 0.0);
    gf.assign(K * H, 0.0);
    gg.assign(K * H, 0.0);
    go.assign(K * H, 0.0);
    cs.assign(K * H, 0.0);
    hs.assign(K * H, 0.0);

    const auto w_in = backward_dir ? params.bwd_w_in() : params.fwd_w_in();
    const auto w_rec = backward_dir ? params.bwd_w_rec() : params.fwd_w_rec();
    const auto bias = backward_dir ? params.bwd_bias() : params.fwd_bias();

    std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0), gates(4 * H);
    for (std::size_t step = 0; step < K; ++step) {
        const std::size_t t = backward_dir ? K - 1 - step : step;
        lstm_step({features.data() + t * D, D}, h_prev, c_prev, w_in, w_rec, bias,
                  d.input_dim, d.hidden_dim,
                  {hs.data() + t * H, H}, {cs.data() + t * H, H}, gates);
        std::copy_n(gates.data(), H, gi.data() + t * H);
        std::copy_n(gates.data() + H, H, gf.data() + t * H);
        std::copy_n(gates.data() + 2 * H, H, gg.data() + t * H);
        std::copy_n(gates.data() + 3 * H, H, go.data() + t * H);
        std::copy_n(hs.data() + t * H, H, h_prev.data());
        std::copy_n(cs.data() + t * H, H, c_prev.data());
    }
}

} // namespace

std::vector<double> bilstm_forward(std::span<const double> features,
                                   const ModelParams& params, ForwardTrace* trace) {
    const auto& d = params.dims;
    const auto H = static_cast<std::size_t>(d.hidden_dim);
    const auto K = static_cast<std::size_t>(d.seq_len);
    if (features.size() != K * static_cast<std::size_t>(d.input_dim))
        throw DataError("bilstm_forward: feature size does not match dims");

    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    run_direction(features, params, false, tr);
    run_direction(features, params, true, tr);

    tr.hcat.assign(K * 2 * H, 0.0);
    for (std::size_t t = 0; t < K; ++t) {
        std::copy_n(tr.fwd_h.data() + t * H, H, tr.hcat.data() + t * 2 * H);
        std::copy_n(tr.bwd_h.data() + t * H, H, tr.hcat.data() + t * 2 * H + H);
    }
    return tr.hcat;
}

void attention_forward(std::span<const double> hidden, const ModelParams& params,
                       bool use_attention, std::vector<double>& beta,
                       std::vector<double>& q, ForwardTrace* trace) {
    const auto& d = params.dims;
    const auto H2 = 2 * static_cast<std::size_t>(d.hidden_dim);
    const auto A = static_cast<std::size_t>(d.attn_dim);
    const auto K = hidden.size() / H2;
    const auto& k = kern::active();

    beta.assign(K, 0.0);
    q.assign(H2, 0.0);
    std::vector<double> v(K * A), scores(K);

    if (use_attention) {
        for (std::size_t t = 0; t < K; ++t) {
            double* vt = v.data() + t * A;
            k.gemv(params.attn_w().data(), hidden.data() + t * H2,
                   params.attn_b().data(), vt, A, H2);
            for (std::size_t j = 0; j < A; ++j) vt[j] = std::tanh(vt[j]);
            scores[t] = k.dot(vt, params.ctx().data(), A);
        }
        // stable softmax
        const double mx = *std::max_element(scores.begin(), scores.end());
        double sum = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
            beta[t] = std::exp(scores[t] - mx);
            sum += beta[t];
        }
        for (std::size_t t = 0; t < K; ++t) beta[t] /= sum;
    } else {
        const double u = 1.0 / static_cast<double>(K);
        for (std::size_t t = 0; t < K; ++t) beta[t] = u;
    }
    for (std::size_t t = 0; t < K; ++t)
        k.axpy(beta[t], hidden.data() + t * H2, q.data(), H2);

    if (trace) {
        trace->attn_v = std::move(v);
        trace->scores = std::move(scores);
        trace->beta = beta;
        trace->q = q;
    }
}

double head_forward(std::span<const double> q, const ModelParams& params,
                    HeadActivation activation, double* pre_activation) {
    const double pre = kern::active().dot(q.data(), params.head_w().data(), q.size()) +
                       params.head_b()[0];
    if (pre_activation) *pre_activation = pre;
    return activation == HeadActivation::Relu ? std::max(0.0, pre) : pre;
}

double model_forward(std::span<const double> features, const ModelParams& params,
                     const ModelConfig& config, ForwardTrace* trace) {
    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    const auto hidden = bilstm_forward(features, params, &tr);
    std::vector<double> beta, q;
    attention_forward(hidden, params, config.use_attention, beta, q, &tr);
    tr.eta = head_forward(q, params, config.head, &tr.pre_head);
    return tr.eta;
}

// ---------------------------------------------------------------- checkpoint

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelConfig& config) {
    nlohmann::ordered_json j;
    j["format"] = "pcgseg-checkpoint";
    j["version"] = 1;
    j["dims"] = {{"input_dim", params.dims.input_dim},
                 {"hidden_dim", params.dims.hidden_dim},
                 {"attn_dim", params.dims.attn_dim},
                 {"seq_len", params.dims.seq_len}};
    j["config"] = {{"head", config.head == HeadActivation::Relu ? "relu" : "linear"},
                   {"use_attention", config.use_attention}};
    j["params"] = params.flat;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump() << '\n';
}

std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "pcgseg-checkpoint" || j.value("version", 0) != 1)
        throw DataError(path + ": not a version-1 checkpoint");
    ModelParams p;
    p.dims.input_dim = j.at("dims").at("input_dim").get<int>();
    p.dims.hidden_dim = j.at("dims").at("hidden_dim").get<int>();
    p.dims.attn_dim = j.at("dims").at("attn_dim").get<int>();
    p.dims.seq_len = j.at("dims").at("seq_len").get<int>();
    p.dims.validate();
    p.flat = j.at("params").get<std::vector<double>>();
    if (p.flat.size() != param_count(p.dims))
        throw DataError(path + ": parameter array size does not match dims");
    ModelConfig cfg;
    const std::string head = j.at("config").at("head").get<std::string>();
    if (head == "relu")
        cfg.head = HeadActivation::Relu;
    else if (head == "linear")
        cfg.head = HeadActivation::Linear;
    else
        throw DataError(path + ": unknown head activation " + head);
    cfg.use_attention = j.at("config").at("use_attention").get<bool>();
    return {std::move(p), cfg};
}

} // namespace pcgseg
