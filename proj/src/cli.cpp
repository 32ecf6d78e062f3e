#include "planestack/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <sstream>

#include "planestack/codec.hpp"
#include "planestack/conv_logistic.hpp"
#include "planestack/dataset.hpp"
#include "planestack/evaluator.hpp"
#include "planestack/generator.hpp"
#include "planestack/model_io.hpp"
#include "planestack/pgm.hpp"

namespace planestack {

namespace {

struct CommonOptions {
    int threads = 1;
    bool quiet = false;
};

struct CorpusOptions {
    std::string corpus;
    std::string manifest;
    double holdout = kDefaultHoldoutFraction;
};

void add_corpus_options(CLI::App* cmd, CorpusOptions& o) {
    auto* corpus = cmd->add_option("--corpus", o.corpus, "Directory of .pgm images");
    auto* manifest = cmd->add_option("--manifest", o.manifest,
                                     "Manifest file fixing the image list and held-out split");
    corpus->excludes(manifest);
    cmd->add_option("--holdout", o.holdout, "Fraction of corpus images held out (with --corpus)")
        ->capture_default_str();
}

CorpusManifest resolve_manifest(const CorpusOptions& o, std::uint64_t seed) {
    if (!o.manifest.empty()) {
        const auto bytes = read_file(o.manifest);
        return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    }
    if (o.corpus.empty()) throw InvalidArgument("one of --corpus or --manifest is required");
    return scan_corpus(o.corpus, seed, o.holdout);
}

std::vector<ConvLogisticModel> load_models(const std::vector<std::string>& paths) {
    std::vector<ConvLogisticModel> models;
    for (const auto& p : paths) models.push_back(load_model_file(p).model);
    std::sort(models.begin(), models.end(),
              [](const auto& a, const auto& b) { return a.target() < b.target(); });
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].target() != static_cast<int>(i) + 2) {
            throw InvalidArgument("--models must cover B_2..B_depth exactly once each");
        }
    }
    return models;
}

class Logger {
public:
    Logger(std::ostream& err, const CommonOptions& common) : err_(err), common_(common) {}
    template <typename... Args>
    void operator()(const Args&... parts) const {
        if (common_.quiet) return;
        err_ << "[planestack] ";
        (err_ << ... << parts);
        err_ << '\n';
    }

private:
    std::ostream& err_;
    const CommonOptions& common_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bitplane decomposition, conditional bitplane models and cascade generation",
                 "planestack"};
    app.require_subcommand(1);
    CommonOptions common;
    app.add_option("--threads", common.threads, "Worker threads (1 is the reference)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", common.quiet, "Do not log the resolved configuration");
    Logger log(err, common);

    // equalize
    std::string eq_image, eq_out;
    auto* equalize_cmd = app.add_subcommand("equalize", "Write the 8-bit histogram-equalized image");
    equalize_cmd->add_option("--image", eq_image, "Input PGM")->required();
    equalize_cmd->add_option("--out", eq_out, "Output PGM")->required();

    // decompose
    std::string dec_image, dec_stem;
    int dec_depth = kDefaultDepth;
    auto* decompose_cmd = app.add_subcommand("decompose", "Write bitplanes <stem>.b<k>.pgm");
    decompose_cmd->add_option("--image", dec_image, "Input PGM")->required();
    decompose_cmd->add_option("--depth", dec_depth, "Number of bitplanes (1..8)")->capture_default_str();
    decompose_cmd->add_option("--out-stem", dec_stem, "Output stem")->required();

    // recompose
    std::string rec_stem, rec_out;
    int rec_depth = kDefaultDepth;
    auto* recompose_cmd = app.add_subcommand("recompose", "Combine <stem>.b<k>.pgm into an image");
    recompose_cmd->add_option("--stem", rec_stem, "Input stem")->required();
    recompose_cmd->add_option("--depth", rec_depth, "Number of bitplanes (1..8)")->capture_default_str();
    recompose_cmd->add_option("--out", rec_out, "Output PGM")->required();

    // train
    CorpusOptions train_corpus;
    int train_lambda = 2;
    int train_patch = 41;
    std::size_t train_samples = 100000;
    std::uint64_t train_seed = 0;
    std::string train_out, train_manifest_out;
    TrainConfig train_cfg;
    auto* train_cmd = app.add_subcommand("train", "Fit P(B_lambda | B_1..B_lambda-1) by Newton's method");
    add_corpus_options(train_cmd, train_corpus);
    train_cmd->add_option("--lambda", train_lambda, "Target bitplane (2..8)")->required();
    train_cmd->add_option("--patch", train_patch, "Odd patch side L")->capture_default_str();
    train_cmd->add_option("--samples", train_samples, "Number of training patches")->capture_default_str();
    train_cmd->add_option("--ridge", train_cfg.ridge, "l2 penalty on kernel weights")->capture_default_str();
    train_cmd->add_option("--seed", train_seed, "Seed for the split and patch sampling")->required();
    train_cmd->add_option("--max-iters", train_cfg.max_newton_iters, "Newton iteration cap")->capture_default_str();
    train_cmd->add_option("--grad-tol", train_cfg.grad_tol, "Stop when max |gradient| is below")->capture_default_str();
    train_cmd->add_option("--cg-tol", train_cfg.cg_tol, "Relative CG residual")->capture_default_str();
    train_cmd->add_option("--cg-max-iters", train_cfg.cg_max_iters, "CG cap (0: parameter count)")->capture_default_str();
    train_cmd->add_option("--out", train_out, "Output model JSON")->required();
    train_cmd->add_option("--manifest-out", train_manifest_out, "Also write the corpus manifest");

    // generate
    std::string gen_image, gen_out, gen_dump, gen_source_out;
    std::vector<std::string> gen_models;
    SamplerConfig gen_cfg;
    auto* generate_cmd = app.add_subcommand("generate", "Generate B_2..B_depth conditioned on B_1 of an image");
    generate_cmd->add_option("--image", gen_image, "Source PGM supplying B_1")->required();
    generate_cmd->add_option("--models", gen_models, "Model JSON files for B_2..B_depth")->required();
    generate_cmd->add_option("--seed", gen_cfg.seed, "Sampling seed")->required();
    generate_cmd->add_option("--low", gen_cfg.low, "Lower edge of the sampling band")->capture_default_str();
    generate_cmd->add_option("--high", gen_cfg.high, "Upper edge of the sampling band")->capture_default_str();
    generate_cmd->add_option("--out", gen_out, "Generated PGM")->required();
    generate_cmd->add_option("--dump-planes", gen_dump, "Also write generated planes <stem>.b<k>.pgm");
    generate_cmd->add_option("--source-out", gen_source_out, "Also write the aligned source crop");

    // eval
    CorpusOptions eval_corpus;
    std::vector<std::string> eval_models;
    std::string eval_report;
    EvalConfig eval_cfg;
    auto* eval_cmd = app.add_subcommand("eval", "Held-out NLL, NMSE against the null model, diagnostics");
    add_corpus_options(eval_cmd, eval_corpus);
    eval_cmd->add_option("--models", eval_models, "Model JSON files for B_2..B_depth")->required();
    eval_cmd->add_option("--samples", eval_cfg.samples, "Held-out patches per conditional")->capture_default_str();
    eval_cmd->add_option("--seed", eval_cfg.seed, "Seed for the split, patch sampling and generation")->required();
    eval_cmd->add_option("--low", eval_cfg.sampler.low, "Lower edge of the sampling band")->capture_default_str();
    eval_cmd->add_option("--high", eval_cfg.sampler.high, "Upper edge of the sampling band")->capture_default_str();
    eval_cmd->add_option("--report", eval_report, "Output JSON report")->required();

    // stats
    std::string stats_image, stats_out;
    int stats_depth = kDefaultDepth;
    auto* stats_cmd = app.add_subcommand("stats", "Per-bitplane density, correlation and cluster counts");
    stats_cmd->add_option("--image", stats_image, "Input PGM")->required();
    stats_cmd->add_option("--depth", stats_depth, "Number of bitplanes (1..8)")->capture_default_str();
    stats_cmd->add_option("--out", stats_out, "Output CSV")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*equalize_cmd) {
            log("equalize image=", eq_image, " out=", eq_out);
            save_pgm(eq_out, equalized_image(load_pgm(eq_image)));
        } else if (*decompose_cmd) {
            log("decompose image=", dec_image, " depth=", dec_depth, " out-stem=", dec_stem);
            save_stack(dec_stem, decompose_image(load_pgm(dec_image), dec_depth));
        } else if (*recompose_cmd) {
            log("recompose stem=", rec_stem, " depth=", rec_depth, " out=", rec_out);
            save_pgm(rec_out, recompose(load_stack(rec_stem, rec_depth)));
        } else if (*train_cmd) {
            train_cfg.threads = common.threads;
            train_cfg.validate();
            const auto manifest = resolve_manifest(train_corpus, train_seed);
            log("train corpus=", train_corpus.corpus, " manifest=", train_corpus.manifest,
                " images=", manifest.paths.size(), " holdout=", manifest.select(Split::Holdout).size(),
                " lambda=", train_lambda, " patch=", train_patch, " samples=", train_samples,
                " ridge=", train_cfg.ridge, " seed=", train_seed, " max-iters=", train_cfg.max_newton_iters,
                " grad-tol=", train_cfg.grad_tol, " cg-tol=", train_cfg.cg_tol,
                " cg-max-iters=", train_cfg.cg_max_iters, " threads=", common.threads, " out=", train_out);
            if (train_samples == 0) throw InvalidArgument("--samples must be positive");
            const auto batch = sample_batch(manifest, Split::Train, train_lambda, train_patch,
                                            train_samples, train_seed);
            auto [model, report] = train(batch, train_cfg);
            for (const auto& it : report.trace) {
                log("newton ", it.iteration, " objective=", it.objective, " grad_max=", it.grad_max,
                    " step=", it.step, " cg=", it.cg_iters);
            }
            log("final nll_bits=", report.final_nll_bits, " converged=", report.converged ? "yes" : "no");
            save_model_file(train_out, model,
                            TrainMeta{train_cfg.ridge, report.iterations(), report.final_nll_bits, train_seed});
            if (!train_manifest_out.empty()) write_file_atomic(train_manifest_out, format_manifest(manifest));
        } else if (*generate_cmd) {
            gen_cfg.threads = common.threads;
            const auto models = load_models(gen_models);
            gen_cfg.depth = static_cast<int>(models.size()) + 1;
            gen_cfg.validate();
            log("generate image=", gen_image, " models=", models.size(), " depth=", gen_cfg.depth,
                " seed=", gen_cfg.seed, " low=", gen_cfg.low, " high=", gen_cfg.high, " out=", gen_out);
            const auto result = generate_image(load_pgm(gen_image), models, gen_cfg);
            save_pgm(gen_out, result.image);
            if (!gen_dump.empty()) save_stack(gen_dump, result.stack);
            if (!gen_source_out.empty()) save_pgm(gen_source_out, result.source_crop);
        } else if (*eval_cmd) {
            eval_cfg.threads = common.threads;
            const auto manifest = resolve_manifest(eval_corpus, eval_cfg.seed);
            const auto models = load_models(eval_models);
            log("eval images=", manifest.paths.size(), " holdout=", manifest.select(Split::Holdout).size(),
                " models=", models.size(), " samples=", eval_cfg.samples, " seed=", eval_cfg.seed,
                " low=", eval_cfg.sampler.low, " high=", eval_cfg.sampler.high, " report=", eval_report);
            const auto report = evaluate_corpus(models, manifest, eval_cfg);
            write_file_atomic(eval_report, report_json(report));
        } else if (*stats_cmd) {
            log("stats image=", stats_image, " depth=", stats_depth, " out=", stats_out);
            const auto rows = heating_diagnostics(decompose_image(load_pgm(stats_image), stats_depth));
            write_file_atomic(stats_out, diagnostics_csv(rows));
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}

}  // namespace planestack
