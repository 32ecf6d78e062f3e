// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "planestack/codec.hpp"
#include "planestack/conv_logistic.hpp"
#include "planestack/dataset.hpp"
#include "planestack/evaluator.hpp"
#include "planestack/generator.hpp"
#include "planestack/pgm.hpp"

using namespace planestack;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " FAILED: " << what << ';';
        }
    }
};

double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> random_parameters(std::mt19937_64& rng, std::size_t n, double scale) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> p(n);
    for (auto& x : p) x = d(rng);
    return p;
}

BitplaneStack random_stack(std::mt19937_64& rng, int w, int h, int depth) {
    return decompose_image(oracle::random_image(rng, w, h, 256), depth);
}

// Stack whose second plane is either a copy of the first or independent noise.
BitplaneStack pair_stack(std::mt19937_64& rng, int w, int h, bool copy) {
    const auto b1 = oracle::random_plane(rng, w, h);
    return BitplaneStack({b1, copy ? b1 : oracle::random_plane(rng, w, h)});
}

void codec_oracle(Outcome& o) {
    std::mt19937_64 rng(20240101);
    std::uniform_int_distribution<int> side(8, 32), levels(2, 8), base(0, 40), stride(1, 30);
    int mismatches = 0;
    for (int n = 0; n < 200; ++n) {
        const int lv = levels(rng);
        const auto img = oracle::random_image(rng, side(rng), side(rng), lv, base(rng), std::min(stride(rng), 215 / lv));
        for (int depth = 1; depth <= 8; ++depth) {
            const auto stack = decompose_image(img, depth);
            const auto ref = oracle::median_split(img, depth);
            for (int k = 1; k <= depth; ++k) {
                const auto px = stack.plane(k).pixels();
                if (!std::equal(px.begin(), px.end(), ref.planes[k - 1].begin())) ++mismatches;
            }
        }
    }
    o.detail << " 200 images x depth 1..8, mismatching planes=" << mismatches << ';';
    o.require(mismatches == 0, "decomposition differs from median-split oracle");
}

void roundtrip(Outcome& o) {
    std::vector<std::uint8_t> values(256);
    std::iota(values.begin(), values.end(), 0);
    std::mt19937_64 rng(7);
    std::shuffle(values.begin(), values.end(), rng);
    const GrayImage all(16, 16, values);
    const auto stack = decompose_image(all);
    bool digits = true;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (int k = 1; k <= 8; ++k)
            digits &= stack.plane(k).pixels()[i] == ((values[i] >> (8 - k)) & 1);
    o.require(digits, "planes are not the binary digits of 0..255");
    o.require(recompose(stack) == all, "recompose(decompose(x)) != x");

    auto square = [](int x) { return std::min(255, static_cast<int>(std::lround(x * x / 64.0))); };
    // Longest strictly increasing segment of the squaring map.
    int lo = 0, best_lo = 0, best_hi = 0;
    for (int x = 1; x < 256; ++x) {
        if (square(x) <= square(x - 1)) lo = x;
        if (x - lo > best_hi - best_lo) best_lo = lo, best_hi = x;
    }
    o.detail << " squaring map strictly increasing on [" << best_lo << "," << best_hi << "];";
    auto invariant = [&](int lo_v, int hi_v, const std::function<int(int)>& f) {
        bool ok = true;
        for (int t = 0; t < 50; ++t) {
            const auto img = oracle::random_image(rng, 24, 20, hi_v - lo_v + 1, lo_v);
            std::vector<std::uint8_t> mapped(img.pixels().begin(), img.pixels().end());
            for (auto& v : mapped) v = static_cast<std::uint8_t>(f(v));
            ok &= decompose_image(img) == decompose_image(GrayImage(24, 20, mapped));
        }
        return ok;
    };
    o.require(invariant(best_lo, best_hi, square), "stack changed under the squaring map");
    o.require(invariant(0, 252, [](int x) { return x + 3; }), "stack changed under x+3");
}

void null_calibration(Outcome& o) {
    std::vector<BitplaneStack> photos;
    for (const auto& img : oracle::load_photos()) photos.push_back(decompose_image(img));
    const auto nll = eval_nll(null_models(8, 11), photos, 100000, 3);
    double worst = 0;
    for (double v : nll) worst = std::max(worst, std::abs(v - 1.0));
    o.detail << " photos: max |NLL-1| over B_2..B_8=" << worst << ';';
    o.require(worst <= 0.01, "null NLL on photographs off by more than 0.01");

    double worst_balanced = 0;
    for (int target = 2; target <= 8; ++target) {
        PatchBatch batch(target, 5);
        std::vector<std::uint8_t> features(static_cast<std::size_t>(target - 1) * 25);
        std::mt19937_64 rng(static_cast<std::uint64_t>(target));
        for (int i = 0; i < 1000; ++i) {
            for (auto& f : features) f = static_cast<std::uint8_t>(rng() & 1);
            batch.add(features, static_cast<std::uint8_t>(i & 1));
        }
        worst_balanced = std::max(worst_balanced, std::abs(nll_bits(ConvLogisticModel(target, 5), batch) - 1.0));
    }
    o.detail << " balanced batches: max |NLL-1|=" << worst_balanced << ';';
    o.require(worst_balanced <= 1e-12, "null NLL on balanced batches not 1.0 within 1e-12");
}

void optimization(Outcome& o) {
    std::mt19937_64 rng(4242);
    double worst_grad = 0, worst_hvp = 0;
    const double ridge = 1e-3;
    for (int target = 2; target <= 4; ++target) {
        for (int side : {3, 5}) {
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<BitplaneStack> stacks{random_stack(rng, 20, 20, target)};
                const auto batch = sample_batch(stacks, target, side, 50, rng());
                ConvLogisticModel probe(target, side);
                const auto params = random_parameters(rng, probe.parameter_count(), 0.3);
                const auto model = ConvLogisticModel::from_parameters(target, side, params);
                const auto at = objective_grad(model, batch, ridge);

                const double h = 1e-5;
                std::vector<double> fd(params.size()), diff(params.size());
                for (std::size_t j = 0; j < params.size(); ++j) {
                    auto plus = params, minus = params;
                    plus[j] += h;
                    minus[j] -= h;
                    fd[j] = (objective_grad(ConvLogisticModel::from_parameters(target, side, plus), batch, ridge).objective -
                             objective_grad(ConvLogisticModel::from_parameters(target, side, minus), batch, ridge).objective) /
                            (2 * h);
                    diff[j] = fd[j] - at.gradient[j];
                }
                worst_grad = std::max(worst_grad, norm(diff) / norm(at.gradient));

                const auto v = random_parameters(rng, params.size(), 1.0);
                const auto hv = hessian_vec(model, batch, ridge, v);
                const double eps = 1e-5;
                auto plus = params, minus = params;
                for (std::size_t j = 0; j < params.size(); ++j) {
                    plus[j] += eps * v[j];
                    minus[j] -= eps * v[j];
                }
                const auto gp = objective_grad(ConvLogisticModel::from_parameters(target, side, plus), batch, ridge).gradient;
                const auto gm = objective_grad(ConvLogisticModel::from_parameters(target, side, minus), batch, ridge).gradient;
                for (std::size_t j = 0; j < params.size(); ++j) diff[j] = (gp[j] - gm[j]) / (2 * eps) - hv[j];
                worst_hvp = std::max(worst_hvp, norm(diff) / norm(hv));
            }
        }
    }
    o.detail << " gradient rel err=" << worst_grad << " hvp rel err=" << worst_hvp << ';';
    o.require(worst_grad < 1e-5, "gradient does not match finite differences");
    o.require(worst_hvp < 1e-4, "Hessian-vector product does not match finite differences");

    std::vector<BitplaneStack> stacks;
    for (const auto& img : oracle::load_photos()) stacks.push_back(decompose_image(img, 3));
    const auto batch = sample_batch(stacks, 3, 5, 5000, 17);
    TrainConfig full;
    full.max_newton_iters = 500;
    TrainConfig capped = full;
    capped.cg_max_iters = 3;
    const auto [m_full, r_full] = train(batch, full);
    const auto [m_capped, r_capped] = train(batch, capped);
    bool monotone = true;
    for (const auto* r : {&r_full, &r_capped})
        for (std::size_t i = 1; i < r->trace.size(); ++i) monotone &= r->trace[i].objective <= r->trace[i - 1].objective;
    const double gap = std::abs(r_full.final_objective() - r_capped.final_objective());
    o.detail << " newton iters full/capped=" << r_full.iterations() << "/" << r_capped.iterations()
             << " objective gap=" << gap << ';';
    o.require(monotone, "Newton trace increased");
    o.require(gap <= 1e-6, "CG caps disagree");
}

void synthetic_recovery(Outcome& o) {
    std::mt19937_64 rng(555);
    const int side = 3;
    auto stacks = [&](bool copy, int n) {
        std::vector<BitplaneStack> out;
        for (int i = 0; i < n; ++i) out.push_back(pair_stack(rng, 256, 256, copy));
        return out;
    };
    const TrainConfig cfg;  // ridge 1e-3

    const auto copy_train = stacks(true, 4), copy_held = stacks(true, 2);
    const auto [copy_model, copy_report] = train(sample_batch(copy_train, 2, side, 10000, 1), cfg);
    const double copy_nll = eval_nll(std::vector<ConvLogisticModel>{copy_model}, copy_held, 10000, 2)[0];
    o.detail << " copy held-out NLL=" << copy_nll << ';';
    o.require(copy_nll < 0.01, "copy task held-out NLL >= 0.01");

    const auto noise_train = stacks(false, 4), noise_held = stacks(false, 2);
    const auto [noise_model, noise_report] = train(sample_batch(noise_train, 2, side, 10000, 3), cfg);
    const double noise_nll = eval_nll(std::vector<ConvLogisticModel>{noise_model}, noise_held, 10000, 4)[0];
    double max_w = 0;
    for (double w : noise_model.weights()) max_w = std::max(max_w, std::abs(w));
    o.detail << " noise train NLL=" << noise_report.final_nll_bits << " held-out NLL=" << noise_nll
             << " kernel max|w|=" << max_w << ';';
    o.require(noise_report.final_nll_bits >= 0.98 && noise_report.final_nll_bits <= 1.02 && noise_nll >= 0.98 &&
                  noise_nll <= 1.02,
              "noise NLL outside [0.98, 1.02]");
    o.require(max_w < 0.05, "noise kernel max-norm >= 0.05");
}

void natural_images(Outcome& o) {
    std::vector<std::string> paths;
    for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(PLANESTACK_TEST_DATA) / "photos"))
        paths.push_back(e.path().string());
    const auto manifest = make_manifest(paths, 2024, 0.4);
    const int side = 11;
    const std::size_t samples = 20000;

    std::vector<ConvLogisticModel> models;
    const auto train_stacks = load_stacks(manifest, Split::Train);
    for (int target = 2; target <= 8; ++target) {
        models.push_back(train(sample_batch(train_stacks, target, side, samples, 2024), TrainConfig{}).first);
    }
    const auto holdout = load_stacks(manifest, Split::Holdout);
    const double nll2 = eval_nll(std::vector<ConvLogisticModel>{models[0]}, holdout, samples, 99)[0];
    o.detail << " train/held-out images=" << train_stacks.size() << "/" << holdout.size()
             << " held-out NLL(B_2|B_1)=" << nll2 << ';';
    o.require(nll2 < 0.9, "held-out NLL(B_2|B_1) >= 0.9");

    SamplerConfig sampler;
    sampler.seed = 77;
    const auto nulls = null_models(8, side);
    for (const auto& path : manifest.select(Split::Holdout)) {
        const auto src = load_pgm(path);
        const double trained = eval_nmse(src, generate_image(src, models, sampler).image);
        const double null = eval_nmse(src, generate_image(src, nulls, sampler).image);
        o.detail << " " << std::filesystem::path(path).stem().string() << " NMSE trained=" << trained
                 << " null=" << null << ';';
        o.require(trained < null, "trained NMSE not below null on " + path);
    }
}

void cascade_geometry(Outcome& o) {
    std::mt19937_64 rng(31);
    auto models_for = [&](int depth, int side) {
        std::vector<ConvLogisticModel> models;
        for (int t = 2; t <= depth; ++t) {
            ConvLogisticModel probe(t, side);
            auto p = random_parameters(rng, probe.parameter_count(), 0.05);
            models.push_back(ConvLogisticModel::from_parameters(t, side, p));
        }
        return models;
    };
    SamplerConfig cfg;
    cfg.seed = 1;
    {
        const auto b1 = oracle::random_plane(rng, 4284, 2844);
        const auto stack = generate_stack(b1, models_for(8, 41), cfg);
        o.detail << " 2844x4284 L=41 depth=8 -> " << stack.plane(1).height() << "x" << stack.plane(1).width() << ';';
        o.require(stack.plane(1).height() == 2564 && stack.plane(1).width() == 4004, "paper-scale cascade size");
        o.require(stack.depth() == 8, "cascade depth");
    }
    for (int side : {3, 5, 11}) {
        for (int depth : {2, 4, 8}) {
            const int h = 60 + side, w = 75 + 2 * side;
            cfg.depth = depth;
            const auto stack = generate_stack(oracle::random_plane(rng, w, h), models_for(depth, side), cfg);
            const bool ok = stack.plane(depth).height() == h - (depth - 1) * (side - 1) &&
                            stack.plane(depth).width() == w - (depth - 1) * (side - 1);
            o.require(ok, "size law for L=" + std::to_string(side) + " depth=" + std::to_string(depth));
        }
    }
    o.detail << " size law checked for L in {3,5,11}, depth in {2,4,8};";
}

void sampler_contract(Outcome& o) {
    // Columns cycle through fixed activations; each in-band value gets 2e5 draws, 1e6 in total.
    const std::vector<double> levels{0.0, 0.2, 0.3999, 0.4, 0.45, 0.5, 0.55, 0.6, 0.6001, 0.8, 1.0};
    const int w = static_cast<int>(levels.size()) * 100, h = 2000;
    RealPlane act(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) act(r, c) = levels[static_cast<std::size_t>(c) % levels.size()];
    SamplerConfig cfg;
    cfg.seed = 123;
    const auto plane = sample_plane(act, cfg, plane_stream(cfg.seed, 2));

    std::vector<std::size_t> ones(levels.size(), 0), total(levels.size(), 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            ones[static_cast<std::size_t>(c) % levels.size()] += plane(r, c);
            ++total[static_cast<std::size_t>(c) % levels.size()];
        }
    std::size_t in_band = 0;
    double worst_z = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double a = levels[i];
        if (a < 0.4) {
            o.require(ones[i] == 0, "activation below band produced a 1");
        } else if (a > 0.6) {
            o.require(ones[i] == total[i], "activation above band produced a 0");
        } else {
            in_band += total[i];
            const double n = static_cast<double>(total[i]);
            const double z = std::abs(static_cast<double>(ones[i]) - n * a) / std::sqrt(n * a * (1 - a));
            worst_z = std::max(worst_z, z);
        }
    }
    o.detail << " in-band draws=" << in_band << " worst |z|=" << worst_z << ';';
    o.require(in_band >= 1000000, "fewer than 1e6 in-band draws");
    o.require(worst_z <= 3.0, "in-band frequency outside 3 sigma");

    const auto again = sample_plane(act, cfg, plane_stream(cfg.seed, 2));
    o.require(write_pgm(plane_to_image(again)) == write_pgm(plane_to_image(plane)), "sample_plane not reproducible");

    std::mt19937_64 rng(8);
    std::vector<ConvLogisticModel> models;
    for (int t = 2; t <= 8; ++t) {
        ConvLogisticModel probe(t, 5);
        models.push_back(ConvLogisticModel::from_parameters(t, 5, random_parameters(rng, probe.parameter_count(), 0.1)));
    }
    const auto b1 = oracle::random_plane(rng, 120, 90);
    SamplerConfig gen;
    gen.seed = 99;
    const auto s1 = generate_stack(b1, models, gen);
    gen.threads = 3;
    const auto s2 = generate_stack(b1, models, gen);
    bool identical = true;
    for (int k = 1; k <= 8; ++k)
        identical &= write_pgm(plane_to_image(s1.plane(k))) == write_pgm(plane_to_image(s2.plane(k)));
    o.require(identical, "seeded generation not byte-identical");
}

void heating(Outcome& o) {
    for (const auto& img : oracle::load_photos()) {
        const auto diag = heating_diagnostics(decompose_image(img));
        o.detail << " corr B_2=" << diag[1].nn_correlation << " B_8=" << diag[7].nn_correlation << ';';
        o.require(diag[7].nn_correlation < diag[1].nn_correlation, "B_8 not less correlated than B_2");
    }
    auto matches = [](const BinaryPlane& p) {
        const auto ours = label_clusters(p);
        const auto ref = oracle::flood_fill(p);
        return ours.sizes == ref.sizes &&
               std::equal(ours.labels.begin(), ours.labels.end(), ref.labels.begin(),
                          [](std::uint32_t a, int b) { return static_cast<int>(a) == b; });
    };
    int bad = 0;
    std::vector<std::uint8_t> bits(16);
    for (std::uint32_t m = 0; m < (1u << 16); ++m) {
        for (int i = 0; i < 16; ++i) bits[static_cast<std::size_t>(i)] = (m >> i) & 1;
        bad += !matches(BinaryPlane(4, 4, bits));
    }
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5000; ++t) bad += !matches(oracle::random_plane(rng, 16, 16, (t % 19 + 1) / 20.0));
    o.detail << " cluster mismatches over all 4x4 and 5000 random 16x16 planes=" << bad << ';';
    o.require(bad == 0, "cluster labels differ from flood fill");
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        double budget_s;  // 0: no runtime bound
        void (*run)(Outcome&);
    };
    const Criterion criteria[] = {
        {"C1", "codec equivalence oracle", 10, codec_oracle},
        {"C2", "roundtrip and monotone invariance", 1, roundtrip},
        {"C3", "null-model calibration", 0, null_calibration},
        {"C4", "optimization correctness", 30, optimization},
        {"C5", "synthetic recovery", 60, synthetic_recovery},
        {"C6", "natural-image reproduction", 300, natural_images},
        {"C7", "cascade geometry", 60, cascade_geometry},
        {"C8", "sampler contract", 0, sampler_contract},
        {"C9", "heating diagnostics", 0, heating},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime over " + std::to_string(c.budget_s) + " s");
        failed += !o.pass;
        std::printf("[%s] %s %s (%.2f s):%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
