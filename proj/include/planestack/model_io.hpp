#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "planestack/conv_logistic.hpp"

namespace planestack {

inline constexpr int kModelFormatVersion = 1;

/// Provenance stored next to the weights.
struct TrainMeta {
    double ridge = 0.0;
    int iters = 0;
    double final_nll_bits = 1.0;
    std::uint64_t seed = 0;
    friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct StoredModel {
    ConvLogisticModel model;
    TrainMeta meta;
};

/// JSON: {format_version, lambda, L, parents, bias, kernels: [[row-major reals]], train_meta}.
/// Doubles are written in shortest round-trip form, so loading is lossless.
std::string save_model(const ConvLogisticModel& model, const TrainMeta& meta = {});
StoredModel load_model(std::string_view json_text);

void save_model_file(const std::filesystem::path& path, const ConvLogisticModel& model,
                     const TrainMeta& meta);
StoredModel load_model_file(const std::filesystem::path& path);

}  // namespace planestack
