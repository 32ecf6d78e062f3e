#include "planestack/conv_logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "planestack/parallel.hpp"

namespace planestack {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double dot_features(std::span<const double> w, std::span<const std::uint8_t> x) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    return s;
}

void axpy_features(double alpha, std::span<const std::uint8_t> x, std::span<double> y) noexcept {
    for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

void check_compatible(const ConvLogisticModel& model, const PatchBatch& batch) {
    if (batch.target() != model.target() || batch.side() != model.side()) {
        throw InvalidArgument("batch (target " + std::to_string(batch.target()) + ", side " +
                              std::to_string(batch.side()) + ") does not match model (target " +
                              std::to_string(model.target()) + ", side " +
                              std::to_string(model.side()) + ")");
    }
    if (batch.empty()) throw InvalidArgument("batch is empty");
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> a) noexcept {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// Objective, gradient and curvature of one batch; the curvature weights a(1-a) are cached
// by evaluate() so repeated Hessian-vector products at the same point reuse them.
class LogisticProblem {
public:
    LogisticProblem(const PatchBatch& batch, double ridge, int threads)
        : batch_(batch), ridge_(ridge), threads_(threads), curvature_(batch.size()) {}

    ObjectiveGradient evaluate(const ConvLogisticModel& model, bool want_gradient,
                               bool want_curvature) {
        const std::size_t m = batch_.size();
        const std::size_t nw = model.weights().size();
        const int shards = std::max(1, threads_);
        std::vector<double> loss(static_cast<std::size_t>(shards), 0.0);
        std::vector<std::vector<double>> partial(
            want_gradient ? static_cast<std::size_t>(shards) : 0,
            std::vector<double>(want_gradient ? nw + 1 : 0, 0.0));

        for_each_shard(m, shards, [&](std::size_t begin, std::size_t end, std::size_t s) {
            double acc = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const auto x = batch_.features(i);
                const double z = model.logit(x);
                const auto y = batch_.label(i);
                acc += logistic_loss(z, y);
                if (want_gradient || want_curvature) {
                    const double a = sigmoid(z);
                    if (want_curvature) curvature_[i] = a * (1.0 - a);
                    if (want_gradient) {
                        auto& g = partial[s];
                        const double r = a - y;
                        axpy_features(r, x, std::span(g).first(nw));
                        g[nw] += r;
                    }
                }
            }
            loss[s] = acc;
        });

        ObjectiveGradient out;
        const double inv_m = 1.0 / static_cast<double>(m);
        double total = 0.0;
        for (double l : loss) total += l;
        const auto w = model.weights();
        out.objective = total * inv_m + 0.5 * ridge_ * inv_m * dot(w, w);
        if (want_gradient) {
            out.gradient.assign(nw + 1, 0.0);
            for (const auto& g : partial) {
                for (std::size_t j = 0; j <= nw; ++j) out.gradient[j] += g[j];
            }
            for (std::size_t j = 0; j < nw; ++j) out.gradient[j] = (out.gradient[j] + ridge_ * w[j]) * inv_m;
            out.gradient[nw] *= inv_m;
        }
        return out;
    }

    std::vector<double> hessian_vec(std::span<const double> v) const {
        const std::size_t m = batch_.size();
        const std::size_t nw = v.size() - 1;
        const int shards = std::max(1, threads_);
        std::vector<std::vector<double>> partial(static_cast<std::size_t>(shards),
                                                 std::vector<double>(nw + 1, 0.0));
        const auto vw = v.first(nw);
        const double vb = v[nw];
        for_each_shard(m, shards, [&](std::size_t begin, std::size_t end, std::size_t s) {
            auto& h = partial[s];
            for (std::size_t i = begin; i < end; ++i) {
                const auto x = batch_.features(i);
                const double proj = curvature_[i] * (dot_features(vw, x) + vb);
                axpy_features(proj, x, std::span(h).first(nw));
                h[nw] += proj;
            }
        });
        std::vector<double> out(nw + 1, 0.0);
        for (const auto& h : partial) {
            for (std::size_t j = 0; j <= nw; ++j) out[j] += h[j];
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t j = 0; j < nw; ++j) out[j] = (out[j] + ridge_ * vw[j]) * inv_m;
        out[nw] *= inv_m;
        return out;
    }

private:
    const PatchBatch& batch_;
    double ridge_;
    int threads_;
    std::vector<double> curvature_;
};

struct CgResult {
    std::vector<double> direction;
    int iterations = 0;
};

// Solves H d = -g from d = 0. Stops on relative residual, iteration cap, or a direction of
// non-positive curvature (only possible with ridge 0).
CgResult solve_newton_system(const LogisticProblem& problem, std::span<const double> g,
                             double tol, int max_iters) {
    const std::size_t n = g.size();
    CgResult res{std::vector<double>(n, 0.0), 0};
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = -g[j];
    std::vector<double> p = r;
    double rr = dot(r, r);
    const double stop = tol * tol * rr;
    while (res.iterations < max_iters && rr > stop) {
        const auto hp = problem.hessian_vec(p);
        const double curv = dot(p, hp);
        if (!(curv > 0.0)) break;
        const double alpha = rr / curv;
        for (std::size_t j = 0; j < n; ++j) {
            res.direction[j] += alpha * p[j];
            r[j] -= alpha * hp[j];
        }
        ++res.iterations;
        const double rr_next = dot(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t j = 0; j < n; ++j) p[j] = r[j] + beta * p[j];
    }
    if (res.iterations == 0) {
        for (std::size_t j = 0; j < n; ++j) res.direction[j] = -g[j];
    }
    return res;
}

}  // namespace

ConvLogisticModel::ConvLogisticModel(int target, int side)
    : ConvLogisticModel(target, side,
                        std::vector<double>(static_cast<std::size_t>(std::max(target - 1, 0)) *
                                                std::max(side, 0) * std::max(side, 0),
                                            0.0),
                        0.0) {}

ConvLogisticModel::ConvLogisticModel(int target, int side, std::vector<double> weights, double bias)
    : target_(target), side_(side), weights_(std::move(weights)), bias_(bias) {
    if (target < 2 || target > kMaxDepth) {
        throw InvalidArgument("model target must be in 2..8, got " + std::to_string(target));
    }
    if (side < 1 || side % 2 == 0) {
        throw InvalidArgument("kernel side must be odd and positive, got " + std::to_string(side));
    }
    if (weights_.size() != static_cast<std::size_t>(parents()) * taps()) {
        throw InvalidArgument("model has " + std::to_string(weights_.size()) +
                              " weights, expected " + std::to_string(parents() * taps()));
    }
    if (!std::isfinite(bias_) ||
        !std::all_of(weights_.begin(), weights_.end(), [](double w) { return std::isfinite(w); })) {
        throw InvalidArgument("model parameters must be finite");
    }
}

ConvLogisticModel ConvLogisticModel::from_parameters(int target, int side,
                                                     std::span<const double> params) {
    if (params.empty()) throw InvalidArgument("empty parameter vector");
    return ConvLogisticModel(target, side, std::vector<double>(params.begin(), params.end() - 1),
                             params.back());
}

std::span<const double> ConvLogisticModel::kernel(int parent) const {
    if (parent < 1 || parent > parents()) throw InvalidArgument("kernel index out of range");
    return std::span(weights_).subspan(static_cast<std::size_t>(parent - 1) * taps(), taps());
}

std::span<double> ConvLogisticModel::kernel(int parent) {
    if (parent < 1 || parent > parents()) throw InvalidArgument("kernel index out of range");
    return std::span(weights_).subspan(static_cast<std::size_t>(parent - 1) * taps(), taps());
}

std::vector<double> ConvLogisticModel::parameters() const {
    std::vector<double> p(weights_);
    p.push_back(bias_);
    return p;
}

double ConvLogisticModel::logit(std::span<const std::uint8_t> features) const {
    return bias_ + dot_features(weights_, features);
}

bool ConvLogisticModel::is_zero() const noexcept {
    return bias_ == 0.0 && std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 0.0; });
}

double sigmoid(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double logistic_loss(double z, std::uint8_t y) noexcept {
    // softplus(z) - y z, with softplus(z) = max(z, 0) + log1p(exp(-|z|)).
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - (y ? z : 0.0);
}

double predict_activation(const ConvLogisticModel& model, std::span<const std::uint8_t> features) {
    if (features.size() != model.weights().size()) {
        throw InvalidArgument("patch has " + std::to_string(features.size()) +
                              " values, model expects " + std::to_string(model.weights().size()));
    }
    return sigmoid(model.logit(features));
}

double nll_bits(const ConvLogisticModel& model, const PatchBatch& batch, int threads) {
    check_compatible(model, batch);
    LogisticProblem problem(batch, 0.0, threads);
    return problem.evaluate(model, false, false).objective / kLn2;
}

ObjectiveGradient objective_grad(const ConvLogisticModel& model, const PatchBatch& batch,
                                 double ridge, int threads) {
    check_compatible(model, batch);
    LogisticProblem problem(batch, ridge, threads);
    return problem.evaluate(model, true, false);
}

std::vector<double> hessian_vec(const ConvLogisticModel& model, const PatchBatch& batch,
                                double ridge, std::span<const double> v, int threads) {
    check_compatible(model, batch);
    if (v.size() != model.parameter_count()) {
        throw InvalidArgument("direction has " + std::to_string(v.size()) +
                              " entries, model has " + std::to_string(model.parameter_count()) +
                              " parameters");
    }
    LogisticProblem problem(batch, ridge, threads);
    problem.evaluate(model, false, true);
    return problem.hessian_vec(v);
}

void TrainConfig::validate() const {
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");
    if (max_newton_iters < 0) throw InvalidArgument("max_newton_iters must be >= 0");
    if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be > 0");
    if (!(cg_tol > 0.0)) throw InvalidArgument("cg_tol must be > 0");
    if (cg_max_iters < 0) throw InvalidArgument("cg_max_iters must be >= 0");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("armijo_c must be in (0, 1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("shrink must be in (0, 1)");
    if (max_backtracks < 1) throw InvalidArgument("max_backtracks must be >= 1");
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
}

std::pair<ConvLogisticModel, TrainReport> train(const PatchBatch& batch, const TrainConfig& config) {
    config.validate();
    if (batch.empty()) throw InvalidArgument("cannot train on an empty batch");

    const int target = batch.target();
    const int side = batch.side();
    ConvLogisticModel model(target, side);
    LogisticProblem problem(batch, config.ridge, config.threads);
    const int cg_cap = config.cg_max_iters > 0 ? config.cg_max_iters
                                               : static_cast<int>(model.parameter_count());

    auto check_finite = [](double f) {
        if (!std::isfinite(f)) {
            throw NumericalError("non-finite objective during training; check the batch");
        }
    };

    TrainReport report;
    auto current = problem.evaluate(model, true, true);
    check_finite(current.objective);
    report.trace.push_back({0, current.objective, max_abs(current.gradient), 0.0, 0});

    std::vector<double> params = model.parameters();
    std::vector<double> trial(params.size());
    report.stop = StopReason::IterationLimit;
    for (int it = 1;; ++it) {
        if (max_abs(current.gradient) < config.grad_tol) {
            report.stop = StopReason::GradientTolerance;
            break;
        }
        if (it > config.max_newton_iters) break;

        const auto cg = solve_newton_system(problem, current.gradient, config.cg_tol, cg_cap);
        const double slope = dot(current.gradient, cg.direction);

        double step = 1.0;
        bool accepted = false;
        ObjectiveGradient next;
        if (slope < 0.0) {
            for (int k = 0; k < config.max_backtracks; ++k) {
                for (std::size_t j = 0; j < params.size(); ++j) trial[j] = params[j] + step * cg.direction[j];
                const auto candidate = ConvLogisticModel::from_parameters(target, side, trial);
                const double f = problem.evaluate(candidate, false, false).objective;
                check_finite(f);
                if (f <= current.objective + config.armijo_c * step * slope) {
                    accepted = true;
                    break;
                }
                step *= config.shrink;
            }
        }
        if (!accepted) {
            report.stop = StopReason::LineSearchFailed;
            break;
        }
        params = trial;
        model = ConvLogisticModel::from_parameters(target, side, params);
        next = problem.evaluate(model, true, true);
        check_finite(next.objective);
        current = std::move(next);
        report.trace.push_back({it, current.objective, max_abs(current.gradient), step, cg.iterations});
    }

    report.converged = report.stop == StopReason::GradientTolerance;
    report.final_nll_bits = nll_bits(model, batch, config.threads);
    return {std::move(model), std::move(report)};
}

}  // namespace planestack
