#include "pcgseg/training.hpp"

#include "pcgseg/errors.hpp"
#include "pcgseg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace pcgseg {

void TrainConfig::validate() const {
    if (batch_size < 1) throw DataError("train config: batch size must be >= 1");
    if (epochs_phase1 < 0 || epochs_phase2 < 0 || epochs_phase1 + epochs_phase2 < 1)
        throw DataError("train config: need at least one epoch");
    if (!(lr_phase1 > 0.0) || !(lr_phase2 > 0.0))
        throw DataError("train config: learning rates must be positive");
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw DataError("mse_loss: need equal non-empty lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(predictions.size());
}

namespace {

// Gradient views over a flat array in ModelParams layout.
struct GradViews {
    double* fwd_w_in;
    double* fwd_w_rec;
    double* fwd_bias;
    double* bwd_w_in;
    double* bwd_w_rec;
    double* bwd_bias;
    double* attn_w;
    double* attn_b;
    double* ctx;
    double* head_w;
    double* head_b;
};

GradViews grad_views(std::vector<double>& flat, const ModelDims& d) {
    const auto D = static_cast<std::size_t>(d.input_dim);
    const auto H = static_cast<std::size_t>(d.hidden_dim);
    const auto A = static_cast<std::size_t>(d.attn_dim);
    GradViews g{};
    double* p = flat.data();
    g.fwd_w_in = p; p += 4 * H * D;
    g.fwd_w_rec = p; p += 4 * H * H;
    g.fwd_bias = p; p += 4 * H;
    g.bwd_w_in = p; p += 4 * H * D;
    g.bwd_w_rec = p; p += 4 * H * H;
    g.bwd_bias = p; p += 4 * H;
    g.attn_w = p; p += A * 2 * H;
    g.attn_b = p; p += A;
    g.ctx = p; p += A;
    g.head_w = p; p += 2 * H;
    g.head_b = p;
    return g;
}

struct BackpropWork {
    std::vector<double> dhcat;          // K x 2H
    std::vector<double> dbeta, dscore;  // K
    std::vector<double> du;             // A
    std::vector<double> dh, dc, dz;     // H, H, 4H
    std::vector<double> dh_rec, dc_rec; // H
    std::vector<double> tanh_c;         // H
};

// Accumulates d(eta)/d(params) * d_eta into grad for one window.
void window_backward(const WindowExample& w, const ModelParams& params,
                     const ModelConfig& config, const ForwardTrace& tr,
                     double d_eta, GradViews& g, BackpropWork& ws) {
    const auto& d = params.dims;
    const auto D = static_cast<std::size_t>(d.input_dim);
    const auto H = static_cast<std::size_t>(d.hidden_dim);
    const auto A = static_cast<std::size_t>(d.attn_dim);
    const auto K = static_cast<std::size_t>(d.seq_len);
    const auto H2 = 2 * H;
    const auto& k = kern::active();

    // head
    if (config.head == HeadActivation::Relu && tr.pre_head < 0.0) return;
    const double dpre = d_eta;
    k.axpy(dpre, tr.q.data(), g.head_w, H2);
    g.head_b[0] += dpre;

    ws.dhcat.assign(K * H2, 0.0);
    if (config.use_attention) {
        ws.dbeta.resize(K);
        ws.dscore.resize(K);
        for (std::size_t t = 0; t < K; ++t) {
            ws.dbeta[t] = dpre * k.dot(params.head_w().data(), tr.hcat.data() + t * H2, H2);
            k.axpy(dpre * tr.beta[t], params.head_w().data(), ws.dhcat.data() + t * H2, H2);
        }
        // softmax jacobian
        double mix = 0.0;
        for (std::size_t t = 0; t < K; ++t) mix += tr.beta[t] * ws.dbeta[t];
        for (std::size_t t = 0; t < K; ++t)
            ws.dscore[t] = tr.beta[t] * (ws.dbeta[t] - mix);

        ws.du.resize(A);
        for (std::size_t t = 0; t < K; ++t) {
            const double* vt = tr.attn_v.data() + t * A;
            k.axpy(ws.dscore[t], vt, g.ctx, A);
            for (std::size_t j = 0; j < A; ++j)
                ws.du[j] = ws.dscore[t] * params.ctx()[j] * (1.0 - vt[j] * vt[j]);
            k.ger_acc(g.attn_w, ws.du.data(), tr.hcat.data() + t * H2, A, H2);
            for (std::size_t j = 0; j < A; ++j) g.attn_b[j] += ws.du[j];
            k.gemv_t_acc(params.attn_w().data(), ws.du.data(),
                         ws.dhcat.data() + t * H2, A, H2);
        }
    } else {
        const double u = dpre / static_cast<double>(K);
        for (std::size_t t = 0; t < K; ++t)
            k.axpy(u, params.head_w().data(), ws.dhcat.data() + t * H2, H2);
    }

    // BPTT for each direction
    ws.dh.resize(H);
    ws.dc.resize(H);
    ws.dz.resize(4 * H);
    ws.tanh_c.resize(H);
    for (int dir = 0; dir < 2; ++dir) {
        const bool bwd = dir == 1;
        const auto& gi = bwd ? tr.bwd_i : tr.fwd_i;
        const auto& gf = bwd ? tr.bwd_f : tr.fwd_f;
        const auto& gg = bwd ? tr.bwd_g : tr.fwd_g;
        const auto& go = bwd ? tr.bwd_o : tr.fwd_o;
        const auto& cs = bwd ? tr.bwd_c : tr.fwd_c;
        const auto& hs = bwd ? tr.bwd_h : tr.fwd_h;
        const auto w_rec = bwd ? params.bwd_w_rec() : params.fwd_w_rec();
        double* g_w_in = bwd ? g.bwd_w_in : g.fwd_w_in;
        double* g_w_rec = bwd ? g.bwd_w_rec : g.fwd_w_rec;
        double* g_bias = bwd ? g.bwd_bias : g.fwd_bias;
        const std::size_t col = bwd ? H : 0; // slice of hcat this direction feeds

        ws.dh_rec.assign(H, 0.0);
        ws.dc_rec.assign(H, 0.0);
        for (std::size_t step = 0; step < K; ++step) {
            // forward consumed time in this order; backprop walks it reversed
            const std::size_t t = bwd ? step : K - 1 - step;
            // previous step in the direction's own time ordering
            const bool has_prev = bwd ? (t + 1 < K) : (t > 0);
            const std::size_t t_prev = bwd ? t + 1 : t - 1;

            const double* it = gi.data() + t * H;
            const double* ft = gf.data() + t * H;
            const double* gt = gg.data() + t * H;
            const double* ot = go.data() + t * H;
            const double* ct = cs.data() + t * H;

            for (std::size_t j = 0; j < H; ++j) {
                ws.dh[j] = ws.dhcat[t * H2 + col + j] + ws.dh_rec[j];
                ws.tanh_c[j] = std::tanh(ct[j]);
            }
            for (std::size_t j = 0; j < H; ++j) {
                const double do_ = ws.dh[j] * ws.tanh_c[j];
                const double dc = ws.dc_rec[j] +
                                  ws.dh[j] * ot[j] * (1.0 - ws.tanh_c[j] * ws.tanh_c[j]);
                const double cprev = has_prev ? cs[t_prev * H + j] : 0.0;
                const double di = dc * gt[j];
                const double df = dc * cprev;
                const double dg = dc * it[j];
                ws.dc_rec[j] = dc * ft[j];
                ws.dz[j] = di * it[j] * (1.0 - it[j]);
                ws.dz[H + j] = df * ft[j] * (1.0 - ft[j]);
                ws.dz[2 * H + j] = dg * (1.0 - gt[j] * gt[j]);
                ws.dz[3 * H + j] = do_ * ot[j] * (1.0 - ot[j]);
            }
            const double* x_t = w.features.data() + t * D;
            k.ger_acc(g_w_in, ws.dz.data(), x_t, 4 * H, D);
            for (std::size_t j = 0; j < 4 * H; ++j) g_bias[j] += ws.dz[j];
            if (has_prev) {
                k.ger_acc(g_w_rec, ws.dz.data(), hs.data() + t_prev * H, 4 * H, H);
                ws.dh_rec.assign(H, 0.0);
                k.gemv_t_acc(w_rec.data(), ws.dz.data(), ws.dh_rec.data(), 4 * H, H);
            }
        }
    }
}

} // namespace

std::pair<double, std::vector<double>>
backward(std::span<const WindowExample> batch, const ModelParams& params,
         const ModelConfig& config) {
    if (batch.empty()) throw DataError("backward: empty batch");
    const auto n = static_cast<double>(batch.size());
    std::vector<double> grad(params.flat.size(), 0.0);
    GradViews views = grad_views(grad, params.dims);

    static thread_local ForwardTrace tr;
    static thread_local BackpropWork ws;
    double loss = 0.0;
    for (const auto& w : batch) {
        const double eta = model_forward(w.features, params, config, &tr);
        const double err = eta - w.target;
        loss += err * err / n;
        window_backward(w, params, config, tr, 2.0 * err / n, views, ws);
    }
    if (!std::isfinite(loss)) throw NumericError("backward: non-finite loss");
    return {loss, std::move(grad)};
}

void adam_step(ModelParams& params, std::span<const double> grads, AdamState& state,
               double lr, long long t, const TrainConfig& cfg) {
    if (t < 1) throw DataError("adam_step: t must be >= 1");
    const auto n = params.flat.size();
    if (grads.size() != n) throw DataError("adam_step: gradient size mismatch");
    if (state.m.size() != n) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params.flat[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

std::vector<double> augment_noise(const std::vector<double>& samples,
                                  std::optional<double> snr_db, std::mt19937_64& rng) {
    if (!snr_db) return samples;
    if (!std::isfinite(*snr_db)) return samples;
    double p_sig = 0.0;
    for (double s : samples) p_sig += s * s;
    p_sig /= std::max<std::size_t>(samples.size(), 1);
    if (p_sig <= 0.0) {
        std::cerr << "augment_noise: zero-power input, skipping noise\n";
        return samples;
    }
    const double sigma = std::sqrt(p_sig / std::pow(10.0, *snr_db / 10.0));
    std::normal_distribution<double> gauss(0.0, sigma);
    std::vector<double> out = samples;
    for (double& s : out) s += gauss(rng);
    return out;
}

double window_accuracy(const std::vector<WindowExample>& windows,
                       const ModelParams& params, const ModelConfig& mcfg,
                       const DecodeConfig& dcfg) {
    if (windows.empty()) throw DataError("window_accuracy: empty set");
    std::vector<WindowLabel> pred, truth;
    pred.reserve(windows.size());
    truth.reserve(windows.size());
    for (const auto& w : windows) {
        const double eta = model_forward(w.features, params, mcfg, nullptr);
        WindowLabel l = WindowLabel::None;
        if (eta >= dcfg.theta_pos)
            l = WindowLabel::S1;
        else if (eta <= dcfg.theta_neg)
            l = WindowLabel::S2;
        pred.push_back(l);
        truth.push_back(w.label);
    }
    const auto rep = metrics(confusion(pred, truth));
    return rep.acc.value_or(0.0);
}

TrainResult train(const std::vector<WindowExample>& train_set,
                  const std::vector<WindowExample>& val_set,
                  const ModelDims& dims, const ModelConfig& mcfg,
                  const TrainConfig& tcfg, const DecodeConfig& dcfg) {
    tcfg.validate();
    if (train_set.empty()) throw DataError("train: empty training set");
    if (val_set.empty()) throw DataError("train: empty validation set");

    ModelParams params = init_params(dims, tcfg.seed);
    AdamState adam;
    std::mt19937_64 shuffle_rng(tcfg.seed ^ 0x9e3779b97f4a7c15ull);

    TrainResult result;
    result.params = params;
    result.best_val_acc = -1.0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const int total_epochs = tcfg.epochs_phase1 + tcfg.epochs_phase2;
    long long adam_t = 0;
    std::vector<WindowExample> batch;
    for (int epoch = 0; epoch < total_epochs; ++epoch) {
        const int phase = epoch < tcfg.epochs_phase1 ? 1 : 2;
        const double lr = phase == 1 ? tcfg.lr_phase1 : tcfg.lr_phase2;
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        bool diverged = false;
        for (std::size_t off = 0; off < order.size();
             off += static_cast<std::size_t>(tcfg.batch_size)) {
            const std::size_t end =
                std::min(off + static_cast<std::size_t>(tcfg.batch_size), order.size());
            batch.clear();
            for (std::size_t i = off; i < end; ++i) batch.push_back(train_set[order[i]]);
            double loss;
            std::vector<double> grad;
            try {
                std::tie(loss, grad) = backward(batch, params, mcfg);
            } catch (const NumericError&) {
                diverged = true;
                break;
            }
            if (tcfg.grad_clip_norm > 0.0) {
                const double norm = std::sqrt(
                    kern::active().dot(grad.data(), grad.data(), grad.size()));
                if (norm > tcfg.grad_clip_norm) {
                    const double s = tcfg.grad_clip_norm / norm;
                    for (double& g : grad) g *= s;
                }
            }
            adam_step(params, grad, adam, lr, ++adam_t, tcfg);
            epoch_loss += loss;
            ++n_batches;
        }
        if (diverged) {
            result.diverged = true;
            break;
        }
        EpochStats st;
        st.epoch = epoch + 1;
        st.phase = phase;
        st.lr = lr;
        st.train_loss = n_batches ? epoch_loss / static_cast<double>(n_batches) : 0.0;
        st.val_acc = window_accuracy(val_set, params, mcfg, dcfg);
        result.history.push_back(st);
        if (st.val_acc > result.best_val_acc) {
            result.best_val_acc = st.val_acc;
            result.best_epoch = st.epoch;
            result.params = params;
        }
    }
    return result;
}

void save_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write history: " + path);
    out << "epoch,phase,lr,train_loss,val_acc\n";
    char buf[96];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", h.epoch, h.phase,
                      h.lr, h.train_loss, h.val_acc);
        out << buf;
    }
}

} // namespace pcgseg
