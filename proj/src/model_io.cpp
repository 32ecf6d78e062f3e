#include "planestack/model_io.hpp"

#include <json.hpp>

#include "planestack/pgm.hpp"

namespace planestack {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("model: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("model: field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string save_model(const ConvLogisticModel& model, const TrainMeta& meta) {
    json kernels = json::array();
    for (int k = 1; k <= model.parents(); ++k) {
        auto kern = model.kernel(k);
        kernels.push_back(std::vector<double>(kern.begin(), kern.end()));
    }
    json j = {
        {"format_version", kModelFormatVersion},
        {"lambda", model.target()},
        {"L", model.side()},
        {"parents", model.parents()},
        {"bias", model.bias()},
        {"kernels", std::move(kernels)},
        {"train_meta",
         {{"rho", meta.ridge},
          {"iters", meta.iters},
          {"final_nll_bits", meta.final_nll_bits},
          {"seed", meta.seed}}},
    };
    return j.dump(1) + "\n";
}

StoredModel load_model(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("model: top level must be an object");
    const int version = field<int>(j, "format_version");
    if (version != kModelFormatVersion) {
        throw FormatError("model: unsupported format_version " + std::to_string(version));
    }
    const int target = field<int>(j, "lambda");
    const int side = field<int>(j, "L");
    const int parents = field<int>(j, "parents");
    if (parents != target - 1) throw FormatError("model: parents must equal lambda - 1");
    const double bias = field<double>(j, "bias");
    const auto kernels = field<std::vector<std::vector<double>>>(j, "kernels");
    if (kernels.size() != static_cast<std::size_t>(parents)) {
        throw FormatError("model: expected " + std::to_string(parents) + " kernels");
    }
    std::vector<double> weights;
    for (const auto& k : kernels) {
        if (side < 1 || k.size() != static_cast<std::size_t>(side) * side) {
            throw FormatError("model: every kernel must hold L*L values");
        }
        weights.insert(weights.end(), k.begin(), k.end());
    }
    TrainMeta meta;
    if (j.contains("train_meta")) {
        const auto& m = j.at("train_meta");
        if (!m.is_object()) throw FormatError("model: train_meta must be an object");
        meta.ridge = field<double>(m, "rho");
        meta.iters = field<int>(m, "iters");
        meta.final_nll_bits = field<double>(m, "final_nll_bits");
        meta.seed = field<std::uint64_t>(m, "seed");
    }
    try {
        return {ConvLogisticModel(target, side, std::move(weights), bias), meta};
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("model: ") + e.what());
    }
}

void save_model_file(const std::filesystem::path& path, const ConvLogisticModel& model,
                     const TrainMeta& meta) {
    write_file_atomic(path, save_model(model, meta));
}

StoredModel load_model_file(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return load_model(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace planestack
