#pragma once

#include "pcgseg/decode_eval.hpp"
#include "pcgseg/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace pcgseg {

// Attention weights for one window (length K, sums to 1).
std::vector<double> attention_weights(const WindowExample& window,
                                      const ModelParams& params,
                                      const ModelConfig& config);

// Feature-group occlusion: prediction change when the group's columns
// are replaced by baseline values (training-set column means).
struct FeatureGroup {
    std::string name;
    std::vector<int> columns;
};

double occlusion_importance(const WindowExample& window, const ModelParams& params,
                            const ModelConfig& config, const FeatureGroup& group,
                            const std::vector<double>& baseline_column_means);

// Standard grouping of a feature-name list into MFCC / delta / delta2 /
// single-column groups.
std::vector<FeatureGroup> default_feature_groups(const std::vector<std::string>& names);

// One pooled embedding (Eq.-7-style q vector) per window; rows n x 2H.
std::vector<std::vector<double>> export_embeddings(const std::vector<WindowExample>& windows,
                                                   const ModelParams& params,
                                                   const ModelConfig& config);

// Top-2 principal components by power iteration with deflation.
// Component sign is fixed by making the largest-magnitude loading positive.
std::vector<std::array<double, 2>> pca_2d(const std::vector<std::vector<double>>& matrix);

} // namespace pcgseg
