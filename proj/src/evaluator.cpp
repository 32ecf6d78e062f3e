#include "planestack/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "planestack/pgm.hpp"

namespace planestack {

std::vector<double> eval_nll(std::span<const ConvLogisticModel> models,
                             std::span<const BitplaneStack> holdout, std::size_t count,
                             std::uint64_t seed, int threads) {
    if (holdout.empty()) throw InvalidArgument("held-out split is empty");
    if (count == 0) throw InvalidArgument("NLL evaluation needs at least one sample");
    std::vector<double> out;
    for (const auto& model : models) {
        const auto batch = sample_batch(holdout, model.target(), model.side(), count, seed);
        out.push_back(nll_bits(model, batch, threads));
    }
    return out;
}

std::vector<double> eval_nll(std::span<const ConvLogisticModel> models,
                             const CorpusManifest& manifest, std::size_t count,
                             std::uint64_t seed, int threads) {
    const auto stacks = load_stacks(manifest, Split::Holdout);
    return eval_nll(models, stacks, count, seed, threads);
}

double eval_nmse(const GrayImage& source, const GrayImage& generated) {
    const int dw = source.width() - generated.width();
    const int dh = source.height() - generated.height();
    if (dw < 0 || dh < 0 || dw % 2 != 0 || dh % 2 != 0 || dw != dh) {
        throw InvalidArgument("generated image " + std::to_string(generated.width()) + "x" +
                              std::to_string(generated.height()) +
                              " is not a central crop of source " +
                              std::to_string(source.width()) + "x" + std::to_string(source.height()));
    }
    const auto reference = crop(equalized_image(source), dw / 2);
    const auto s = reference.pixels();
    const auto g = generated.pixels();
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double err = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = static_cast<double>(g[i]) - s[i];
        err += d * d;
        var += (s[i] - mean) * (s[i] - mean);
    }
    if (var == 0.0) throw InvalidArgument("source crop is constant; NMSE is undefined");
    return err / var;
}

std::vector<double> activation_histogram(const ConvLogisticModel& model,
                                         std::span<const BinaryPlane> parents, int bins) {
    if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
    const auto act = activation_map(model, parents);
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    for (double a : act.pixels()) {
        auto b = static_cast<std::size_t>(a * bins);
        hist[std::min(b, hist.size() - 1)] += 1.0;
    }
    const double n = static_cast<double>(act.size());
    for (auto& h : hist) h /= n;
    return hist;
}

std::size_t ClusterLabels::largest() const noexcept {
    return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

std::map<std::size_t, std::size_t> ClusterLabels::size_histogram() const {
    std::map<std::size_t, std::size_t> h;
    for (auto s : sizes) ++h[s];
    return h;
}

ClusterLabels label_clusters(const BinaryPlane& plane) {
    // Two-pass union-find labeling (Hoshen-Kopelman).
    const int w = plane.width();
    const int h = plane.height();
    const std::size_t n = plane.size();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!plane(r, c)) continue;
            const auto i = static_cast<std::uint32_t>(r * w + c);
            if (c > 0 && plane(r, c - 1)) unite(i, i - 1);
            if (r > 0 && plane(r - 1, c)) unite(i, i - static_cast<std::uint32_t>(w));
        }
    }
    ClusterLabels out;
    out.labels.assign(n, 0);
    std::vector<std::uint32_t> root_label(n, 0);
    auto bits = plane.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        if (!bits[i]) continue;
        const auto root = find(static_cast<std::uint32_t>(i));
        if (root_label[root] == 0) {
            out.sizes.push_back(0);
            root_label[root] = static_cast<std::uint32_t>(out.sizes.size());
        }
        out.labels[i] = root_label[root];
        ++out.sizes[root_label[root] - 1];
    }
    return out;
}

namespace {

struct PairMoments {
    double n = 0, sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    void add(double a, double b) {
        n += 1;
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    double correlation() const {
        if (n == 0) return 0.0;
        const double cov = sab / n - (sa / n) * (sb / n);
        const double va = saa / n - (sa / n) * (sa / n);
        const double vb = sbb / n - (sb / n) * (sb / n);
        if (va <= 0.0 || vb <= 0.0) return 0.0;
        return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
    }
};

}  // namespace

double nn_correlation(const BinaryPlane& plane) {
    PairMoments horizontal;
    PairMoments vertical;
    for (int r = 0; r < plane.height(); ++r) {
        for (int c = 0; c < plane.width(); ++c) {
            const double a = plane(r, c);
            if (c + 1 < plane.width()) horizontal.add(a, plane(r, c + 1));
            if (r + 1 < plane.height()) vertical.add(a, plane(r + 1, c));
        }
    }
    if (horizontal.n == 0) return vertical.correlation();
    if (vertical.n == 0) return horizontal.correlation();
    return 0.5 * (horizontal.correlation() + vertical.correlation());
}

std::vector<PlaneDiagnostics> heating_diagnostics(const BitplaneStack& stack) {
    std::vector<PlaneDiagnostics> out;
    for (int lambda = 1; lambda <= stack.depth(); ++lambda) {
        const auto& p = stack.plane(lambda);
        const auto clusters = label_clusters(p);
        out.push_back({lambda, p.density(), nn_correlation(p), clusters.count(), clusters.largest(),
                       clusters.size_histogram()});
    }
    return out;
}

std::string diagnostics_csv(std::span<const PlaneDiagnostics> rows) {
    std::ostringstream out;
    out.precision(17);
    out << "lambda,density,nn_correlation,n_clusters,largest_cluster\n";
    for (const auto& d : rows) {
        out << d.lambda << ',' << d.density << ',' << d.nn_correlation << ',' << d.n_clusters << ','
            << d.largest_cluster << '\n';
    }
    return out.str();
}

std::vector<ReceptiveField> receptive_field_summary(const ConvLogisticModel& model) {
    const int side = model.side();
    const int half = side / 2;
    const auto max_ring = static_cast<std::size_t>(std::lround(std::sqrt(2.0) * half));
    std::vector<ReceptiveField> out;
    for (int k = 1; k <= model.parents(); ++k) {
        const auto kern = model.kernel(k);
        ReceptiveField rf{k, kern[static_cast<std::size_t>(half) * side + half], {}};
        std::vector<double> sum(max_ring + 1, 0.0);
        std::vector<int> cnt(max_ring + 1, 0);
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                const auto ring = static_cast<std::size_t>(
                    std::lround(std::hypot(static_cast<double>(i - half), static_cast<double>(j - half))));
                sum[ring] += kern[static_cast<std::size_t>(i) * side + j];
                ++cnt[ring];
            }
        }
        for (std::size_t r = 0; r <= max_ring; ++r) rf.ring_mean.push_back(cnt[r] ? sum[r] / cnt[r] : 0.0);
        out.push_back(std::move(rf));
    }
    return out;
}

EvalReport evaluate_corpus(std::span<const ConvLogisticModel> models,
                           const CorpusManifest& manifest, const EvalConfig& config) {
    if (models.empty()) throw InvalidArgument("evaluation needs at least one model");
    SamplerConfig sampler = config.sampler;
    sampler.depth = static_cast<int>(models.size()) + 1;
    sampler.threads = config.threads;
    sampler.validate();

    const auto paths = manifest.select(Split::Holdout);
    if (paths.empty()) throw InvalidArgument("held-out split is empty");
    std::vector<GrayImage> images;
    std::vector<BitplaneStack> stacks;
    for (const auto& p : paths) {
        images.push_back(load_pgm(p));
        stacks.push_back(decompose_image(images.back(), kMaxDepth));
    }

    EvalReport report;
    for (const auto& m : models) report.lambdas.push_back(m.target());
    report.nll_bits = eval_nll(models, stacks, config.samples, config.seed, config.threads);

    const auto nulls = null_models(sampler.depth, models.front().side());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto trained = generate_image(images[i], models, sampler);
        const auto null = generate_image(images[i], nulls, sampler);
        report.per_image.push_back(
            {paths[i], eval_nmse(images[i], trained.image), eval_nmse(images[i], null.image)});
        report.nmse_model += report.per_image.back().model;
        report.nmse_null += report.per_image.back().null;
    }
    report.nmse_model /= static_cast<double>(images.size());
    report.nmse_null /= static_cast<double>(images.size());

    report.density.assign(kMaxDepth, 0.0);
    report.nn_correlation.assign(kMaxDepth, 0.0);
    for (const auto& stack : stacks) {
        for (const auto& d : heating_diagnostics(stack)) {
            report.density[d.lambda - 1] += d.density / static_cast<double>(stacks.size());
            report.nn_correlation[d.lambda - 1] += d.nn_correlation / static_cast<double>(stacks.size());
            if (std::find(config.cluster_planes.begin(), config.cluster_planes.end(), d.lambda) !=
                config.cluster_planes.end()) {
                auto& hist = report.cluster_histogram[d.lambda];
                for (auto [size, count] : d.cluster_histogram) hist[size] += count;
            }
        }
    }
    return report;
}

std::string report_json(const EvalReport& report) {
    using nlohmann::json;
    json nll = json::object();
    for (std::size_t i = 0; i < report.lambdas.size(); ++i) {
        nll[std::to_string(report.lambdas[i])] = report.nll_bits[i];
    }
    json images = json::array();
    for (const auto& im : report.per_image) {
        images.push_back({{"path", im.path}, {"nmse_model", im.model}, {"nmse_null", im.null}});
    }
    json clusters = json::object();
    for (const auto& [lambda, hist] : report.cluster_histogram) {
        json h = json::object();
        for (auto [size, count] : hist) h[std::to_string(size)] = count;
        clusters[std::to_string(lambda)] = std::move(h);
    }
    json j = {
        {"nll_bits", std::move(nll)},
        {"nmse_model", report.nmse_model},
        {"nmse_null", report.nmse_null},
        {"per_image", std::move(images)},
        {"density", report.density},
        {"nn_correlation", report.nn_correlation},
        {"cluster_histogram", std::move(clusters)},
    };
    return j.dump(2) + "\n";
}

}  // namespace planestack
