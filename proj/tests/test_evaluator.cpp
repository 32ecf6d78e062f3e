#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "planestack/evaluator.hpp"
#include "planestack/pgm.hpp"

using namespace planestack;

namespace {

// Image whose equalization is itself: every value 0..255 exactly once.
GrayImage permutation_image(std::mt19937_64& rng) {
    std::vector<std::uint8_t> v(256);
    std::iota(v.begin(), v.end(), 0);
    std::shuffle(v.begin(), v.end(), rng);
    return GrayImage(16, 16, v);
}

}  // namespace

TEST_CASE("nmse definition") {
    std::mt19937_64 rng(1);
    const auto src = permutation_image(rng);
    CHECK(eval_nmse(src, src) == 0.0);
    CHECK(eval_nmse(src, crop(src, 3)) == 0.0);

    // A flat guess of 127 against the central 4x4 of a ramp: NMSE = 1 + (127.5 - 127)^2 / var.
    std::vector<std::uint8_t> px(256);
    std::iota(px.begin(), px.end(), 0);
    const GrayImage ramp(16, 16, px);
    const auto center = crop(ramp, 6);
    double mean = 0;
    for (auto v : center.pixels()) mean += v;
    mean /= 16.0;
    double var = 0;
    for (auto v : center.pixels()) var += (v - mean) * (v - mean);
    var /= 16.0;
    const GrayImage flat(4, 4, 127);
    CHECK(eval_nmse(ramp, flat) == doctest::Approx(1.0 + 0.25 / var).epsilon(1e-14));

    CHECK_THROWS_AS(eval_nmse(src, GrayImage(15, 15)), InvalidArgument);
    CHECK_THROWS_AS(eval_nmse(src, GrayImage(14, 12)), InvalidArgument);
}

TEST_CASE("cluster labeling agrees with flood fill") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 500; ++trial) {
        const auto plane = oracle::random_plane(rng, 16, 16, 0.1 + 0.8 * (trial % 9) / 8.0);
        const auto ours = label_clusters(plane);
        const auto ref = oracle::flood_fill(plane);
        // Both number clusters in raster order of their first pixel, so labels coincide.
        CHECK(std::equal(ours.labels.begin(), ours.labels.end(), ref.labels.begin(),
                         [](std::uint32_t a, int b) { return static_cast<int>(a) == b; }));
        CHECK(ours.sizes == ref.sizes);
    }
    const BinaryPlane ones(7, 5, 1);
    const auto c = label_clusters(ones);
    CHECK(c.count() == 1);
    CHECK(c.largest() == 35);
    CHECK(label_clusters(BinaryPlane(3, 3)).count() == 0);
}

TEST_CASE("heating diagnostics on synthetic planes") {
    std::mt19937_64 rng(3);
    const auto coin = oracle::random_plane(rng, 1000, 1000);
    const auto diag = heating_diagnostics(BitplaneStack({coin, BinaryPlane(1000, 1000, 1)}));
    CHECK(std::abs(diag[0].density - 0.5) < 3 * 0.0005);
    CHECK(std::abs(diag[0].nn_correlation) < 0.01);
    CHECK(diag[1].density == 1.0);
    CHECK(diag[1].n_clusters == 1);
    CHECK(diag[1].largest_cluster == 1000000);
    CHECK(diag[1].nn_correlation == 0.0);

    const BinaryPlane stripes(4, 4, std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0});
    // Horizontal pairs are perfectly correlated, vertical pairs perfectly anti-correlated.
    CHECK(nn_correlation(stripes) == doctest::Approx(0.0));
    const BinaryPlane column(1, 4, std::vector<std::uint8_t>{1, 1, 0, 0});
    // Only vertical pairs exist: (1,1) (1,0) (0,0) have correlation 1/2.
    CHECK(nn_correlation(column) == doctest::Approx(0.5));
}

TEST_CASE("heating: B_8 is less correlated than B_2 on photographs") {
    for (const auto& img : oracle::load_photos()) {
        const auto diag = heating_diagnostics(decompose_image(img, 8));
        CHECK(diag[7].nn_correlation < diag[1].nn_correlation);
        for (const auto& d : diag) {
            CHECK(d.nn_correlation >= -1.0);
            CHECK(d.nn_correlation <= 1.0);
        }
    }
}

TEST_CASE("diagnostics csv") {
    const auto csv = diagnostics_csv(heating_diagnostics(BitplaneStack({BinaryPlane(2, 2, 1)})));
    CHECK(csv == "lambda,density,nn_correlation,n_clusters,largest_cluster\n1,1,0,1,4\n");
}

TEST_CASE("activation histogram") {
    std::mt19937_64 rng(4);
    const std::vector<BinaryPlane> parents{oracle::random_plane(rng, 256, 256)};
    const auto zero = activation_histogram(ConvLogisticModel(2, 5), parents, 20);
    CHECK(zero[10] == 1.0);

    std::normal_distribution<double> n(0.0, 0.3);
    std::vector<double> w(25);
    for (auto& v : w) v = n(rng);
    const ConvLogisticModel m(2, 5, w, -0.5 * std::accumulate(w.begin(), w.end(), 0.0));
    const auto hist = activation_histogram(m, parents, 20);
    double total = 0;
    for (double h : hist) {
        CHECK(h >= 0.0);
        total += h;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    // Unimodal: mass rises to a single peak and falls after it (ignoring near-empty tails).
    const auto peak = static_cast<std::size_t>(std::max_element(hist.begin(), hist.end()) - hist.begin());
    for (std::size_t b = 1; b <= peak; ++b)
        if (hist[b - 1] > 0.005) CHECK(hist[b] >= hist[b - 1]);
    for (std::size_t b = peak + 1; b < hist.size(); ++b)
        if (hist[b] > 0.005) CHECK(hist[b] <= hist[b - 1]);
    CHECK_THROWS_AS(activation_histogram(m, parents, 0), InvalidArgument);
}

TEST_CASE("receptive field summary") {
    const auto zero = receptive_field_summary(ConvLogisticModel(3, 5));
    REQUIRE(zero.size() == 2);
    CHECK(zero[0].center == 0.0);
    CHECK(zero[0].ring_mean.size() == 4);
    for (double r : zero[1].ring_mean) CHECK(r == 0.0);

    std::vector<double> w(9, -0.5);
    w[4] = 8.0;
    const auto rf = receptive_field_summary(ConvLogisticModel(2, 3, w, 0.0));
    CHECK(rf[0].center == 8.0);
    CHECK(rf[0].ring_mean[0] == 8.0);
    CHECK(rf[0].ring_mean[1] == -0.5);
}

TEST_CASE("held-out NLL") {
    std::mt19937_64 rng(5);
    std::vector<BitplaneStack> holdout;
    for (int i = 0; i < 2; ++i) holdout.push_back(decompose_image(oracle::random_image(rng, 40, 40, 256), 8));
    const auto zero = eval_nll(null_models(5, 3), holdout, 2000, 1);
    REQUIRE(zero.size() == 4);
    for (double v : zero) CHECK(std::abs(v - 1.0) < 1e-12);

    CHECK_THROWS_AS(eval_nll(null_models(3, 3), std::span<const BitplaneStack>{}, 10, 1), InvalidArgument);
}

TEST_CASE("copy-task model scores near zero on held-out stacks") {
    std::mt19937_64 rng(6);
    // Stacks whose second plane repeats the first.
    auto make = [&](int w, int h) {
        const auto b1 = oracle::random_plane(rng, w, h);
        std::vector<BinaryPlane> planes{b1, b1};
        return BitplaneStack(planes);
    };
    std::vector<BitplaneStack> train_stacks{make(64, 64), make(64, 64)};
    std::vector<BitplaneStack> held{make(64, 64)};
    const auto batch = sample_batch(train_stacks, 2, 3, 10000, 1);
    const auto [model, report] = train(batch, TrainConfig{});
    const auto nll = eval_nll(std::vector<ConvLogisticModel>{model}, held, 5000, 2);
    CHECK(nll[0] < 0.01);
}

TEST_CASE("evaluate_corpus produces a complete report") {
    const auto dir = std::filesystem::temp_directory_path() / "planestack_eval_test";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 3; ++i) save_pgm(dir / ("im" + std::to_string(i) + ".pgm"), oracle::random_image(rng, 48, 40, 256));
    const auto manifest = scan_corpus(dir, 3, 0.34);
    EvalConfig cfg;
    cfg.samples = 500;
    cfg.seed = 4;
    const auto report = evaluate_corpus(null_models(4, 5), manifest, cfg);
    CHECK(report.lambdas == std::vector<int>{2, 3, 4});
    for (double v : report.nll_bits) CHECK(std::abs(v - 1.0) < 1e-12);
    CHECK(report.per_image.size() == 1);
    CHECK(report.nmse_model == report.nmse_null);
    CHECK(report.density.size() == 8);
    CHECK(report.cluster_histogram.count(1) == 1);

    const auto j = nlohmann::json::parse(report_json(report));
    for (const char* key : {"nll_bits", "nmse_model", "nmse_null", "per_image", "density", "nn_correlation",
                            "cluster_histogram"})
        CHECK(j.contains(key));
    CHECK(j["nll_bits"].contains("3"));
    std::filesystem::remove_all(dir);
}
