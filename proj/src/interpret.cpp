#include "pcgseg/interpret.hpp"

#include "pcgseg/errors.hpp"
#include "pcgseg/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pcgseg {

std::vector<double> attention_weights(const WindowExample& window,
                                      const ModelParams& params,
                                      const ModelConfig& config) {
    ForwardTrace tr;
    model_forward(window.features, params, config, &tr);
    return tr.beta;
}

double occlusion_importance(const WindowExample& window, const ModelParams& params,
                            const ModelConfig& config, const FeatureGroup& group,
                            const std::vector<double>& baseline_column_means) {
    const auto D = static_cast<std::size_t>(params.dims.input_dim);
    const auto K = static_cast<std::size_t>(params.dims.seq_len);
    if (baseline_column_means.size() != D)
        throw DataError("occlusion_importance: baseline size does not match input dim");
    for (int c : group.columns)
        if (c < 0 || static_cast<std::size_t>(c) >= D)
            throw DataError("occlusion_importance: column out of range");

    const double eta = model_forward(window.features, params, config, nullptr);
    std::vector<double> occluded = window.features;
    for (std::size_t t = 0; t < K; ++t)
        for (int c : group.columns)
            occluded[t * D + static_cast<std::size_t>(c)] =
                baseline_column_means[static_cast<std::size_t>(c)];
    const double eta_occ = model_forward(occluded, params, config, nullptr);
    return eta - eta_occ;
}

std::vector<FeatureGroup> default_feature_groups(const std::vector<std::string>& names) {
    FeatureGroup mfcc{"MFCC", {}}, d{"DELTA", {}}, dd{"DELTA2", {}};
    std::vector<FeatureGroup> singles;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& n = names[i];
        const int col = static_cast<int>(i);
        if (n.rfind("mfcc", 0) == 0)
            mfcc.columns.push_back(col);
        else if (n.rfind("dd", 0) == 0)
            dd.columns.push_back(col);
        else if (n.rfind("d", 0) == 0 && n.size() > 1 && std::isdigit(n[1]))
            d.columns.push_back(col);
        else
            singles.push_back({n, {col}});
    }
    std::vector<FeatureGroup> out;
    for (auto* g : {&mfcc, &d, &dd})
        if (!g->columns.empty()) out.push_back(std::move(*g));
    for (auto& g : singles) out.push_back(std::move(g));
    return out;
}

std::vector<std::vector<double>> export_embeddings(const std::vector<WindowExample>& windows,
                                                   const ModelParams& params,
                                                   const ModelConfig& config) {
    std::vector<std::vector<double>> out;
    out.reserve(windows.size());
    ForwardTrace tr;
    for (const auto& w : windows) {
        model_forward(w.features, params, config, &tr);
        out.push_back(tr.q);
    }
    return out;
}

std::vector<std::array<double, 2>> pca_2d(const std::vector<std::vector<double>>& matrix) {
    const auto n = matrix.size();
    if (n < 3) throw DataError("pca_2d: need at least 3 rows");
    const auto dim = matrix[0].size();
    for (const auto& row : matrix)
        if (row.size() != dim) throw DataError("pca_2d: ragged matrix");

    // center
    std::vector<double> mean(dim, 0.0);
    for (const auto& row : matrix)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    for (double& m : mean) m /= static_cast<double>(n);
    std::vector<std::vector<double>> centered(n, std::vector<double>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) centered[i][j] = matrix[i][j] - mean[j];

    auto cov_mul = [&](const std::vector<double>& v, const std::vector<double>* deflate,
                       double deflate_lambda) {
        std::vector<double> out(dim, 0.0);
        for (const auto& row : centered) {
            const double proj = kern::active().dot(row.data(), v.data(), dim);
            kern::active().axpy(proj / static_cast<double>(n - 1), row.data(), out.data(), dim);
        }
        if (deflate) {
            const double proj = kern::active().dot(deflate->data(), v.data(), dim);
            kern::active().axpy(-deflate_lambda * proj, deflate->data(), out.data(), dim);
        }
        return out;
    };

    auto power_iter = [&](const std::vector<double>* deflate, double deflate_lambda,
                          double& lambda_out) {
        std::vector<double> v(dim, 0.0);
        // deterministic start
        for (std::size_t j = 0; j < dim; ++j) v[j] = 1.0 / std::sqrt(static_cast<double>(dim));
        double lambda = 0.0;
        for (int it = 0; it < 1000; ++it) {
            auto w = cov_mul(v, deflate, deflate_lambda);
            const double norm = std::sqrt(kern::active().dot(w.data(), w.data(), dim));
            if (norm < 1e-300) break;
            for (double& x : w) x /= norm;
            double diff = 0.0;
            for (std::size_t j = 0; j < dim; ++j) diff += std::abs(w[j] - v[j]);
            v = std::move(w);
            const auto cv = cov_mul(v, deflate, deflate_lambda);
            lambda = kern::active().dot(v.data(), cv.data(), dim);
            if (diff < 1e-9) break;
        }
        // sign convention: largest-magnitude loading positive
        std::size_t arg = 0;
        for (std::size_t j = 1; j < dim; ++j)
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        if (v[arg] < 0.0)
            for (double& x : v) x = -x;
        lambda_out = lambda;
        return v;
    };

    double l1 = 0.0, l2 = 0.0;
    const auto pc1 = power_iter(nullptr, 0.0, l1);
    const auto pc2 = power_iter(&pc1, l1, l2);

    std::vector<std::array<double, 2>> proj(n);
    for (std::size_t i = 0; i < n; ++i) {
        proj[i][0] = kern::active().dot(centered[i].data(), pc1.data(), dim);
        proj[i][1] = kern::active().dot(centered[i].data(), pc2.data(), dim);
    }
    return proj;
}

} // namespace pcgseg
