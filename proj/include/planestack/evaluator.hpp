#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "planestack/conv_logistic.hpp"
#include "planestack/dataset.hpp"
#include "planestack/generator.hpp"

namespace planestack {

/// Held-out NLL in bits/pixel for each model, in the order given. Patches come only from
/// held-out images; each model draws `count` samples with the same seed.
std::vector<double> eval_nll(std::span<const ConvLogisticModel> models,
                             std::span<const BitplaneStack> holdout, std::size_t count,
                             std::uint64_t seed, int threads = 1);
std::vector<double> eval_nll(std::span<const ConvLogisticModel> models,
                             const CorpusManifest& manifest, std::size_t count,
                             std::uint64_t seed, int threads = 1);

/// sum (g - s)^2 / sum (s - mean s)^2, where s is the source's 8-bit equalized image cropped
/// centrally to the generated size.
double eval_nmse(const GrayImage& source, const GrayImage& generated);

/// Normalized histogram of activation_map outputs over [0, 1]; the last bin is closed.
std::vector<double> activation_histogram(const ConvLogisticModel& model,
                                         std::span<const BinaryPlane> parents, int bins);

/// 4-connected components of the 1-pixels.
struct ClusterLabels {
    /// 0 for background, 1..count for clusters numbered in raster order of first pixel.
    std::vector<std::uint32_t> labels;
    std::vector<std::size_t> sizes;  // sizes[k - 1] is the size of cluster k

    std::size_t count() const noexcept { return sizes.size(); }
    std::size_t largest() const noexcept;
    /// cluster size -> number of clusters of that size
    std::map<std::size_t, std::size_t> size_histogram() const;
};

ClusterLabels label_clusters(const BinaryPlane& plane);

/// Mean Pearson correlation of horizontally and vertically adjacent bits. A direction without
/// pairs or with a constant member contributes 0.
double nn_correlation(const BinaryPlane& plane);

struct PlaneDiagnostics {
    int lambda = 0;
    double density = 0.0;
    double nn_correlation = 0.0;
    std::size_t n_clusters = 0;
    std::size_t largest_cluster = 0;
    std::map<std::size_t, std::size_t> cluster_histogram;
};

std::vector<PlaneDiagnostics> heating_diagnostics(const BitplaneStack& stack);

/// CSV with header "lambda,density,nn_correlation,n_clusters,largest_cluster".
std::string diagnostics_csv(std::span<const PlaneDiagnostics> rows);

struct ReceptiveField {
    int parent = 0;
    double center = 0.0;
    /// ring_mean[r] is the mean weight at rounded Euclidean distance r from the center tap.
    std::vector<double> ring_mean;
};

std::vector<ReceptiveField> receptive_field_summary(const ConvLogisticModel& model);

struct ImageNmse {
    std::string path;
    double model = 0.0;
    double null = 0.0;
};

struct EvalReport {
    std::vector<int> lambdas;
    std::vector<double> nll_bits;
    double nmse_model = 0.0;
    double nmse_null = 0.0;
    std::vector<ImageNmse> per_image;
    std::vector<double> density;         // index lambda - 1, mean over held-out images
    std::vector<double> nn_correlation;  // index lambda - 1, mean over held-out images
    std::map<int, std::map<std::size_t, std::size_t>> cluster_histogram;
};

struct EvalConfig {
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    SamplerConfig sampler;
    std::vector<int> cluster_planes{1, 2};
    int threads = 1;
};

/// Full report on the held-out images: NLL per conditional, NMSE of generation with `models`
/// against generation with zero models, and stack diagnostics. models must cover B_2..B_depth.
EvalReport evaluate_corpus(std::span<const ConvLogisticModel> models,
                           const CorpusManifest& manifest, const EvalConfig& config);

std::string report_json(const EvalReport& report);

}  // namespace planestack
