#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "planestack/dataset.hpp"

namespace planestack {

/// Logistic unit for P(B_target | B_1..B_{target-1}) with one side x side kernel per parent
/// plane, shared across positions, and a scalar bias.
///
/// The flat parameter vector is the kernels in parent order (each row-major) followed by the
/// bias; the same order is used for gradients and Hessian-vector products.
class ConvLogisticModel {
public:
    /// The zero (null) model.
    ConvLogisticModel(int target, int side);
    ConvLogisticModel(int target, int side, std::vector<double> weights, double bias);

    static ConvLogisticModel from_parameters(int target, int side, std::span<const double> params);

    int target() const noexcept { return target_; }
    int side() const noexcept { return side_; }
    int parents() const noexcept { return target_ - 1; }
    std::size_t taps() const noexcept { return static_cast<std::size_t>(side_) * side_; }
    std::size_t parameter_count() const noexcept { return weights_.size() + 1; }

    /// Kernel applied to parent plane B_parent, parent in 1..target-1.
    std::span<const double> kernel(int parent) const;
    std::span<double> kernel(int parent);
    std::span<const double> weights() const noexcept { return weights_; }
    double bias() const noexcept { return bias_; }
    void set_bias(double b) noexcept { bias_ = b; }

    std::vector<double> parameters() const;

    /// b + sum_k <w_k, x_k> for one sample's concatenated parent patches.
    double logit(std::span<const std::uint8_t> features) const;

    bool is_zero() const noexcept;

    friend bool operator==(const ConvLogisticModel&, const ConvLogisticModel&) = default;

private:
    int target_;
    int side_;
    std::vector<double> weights_;
    double bias_ = 0.0;
};

double sigmoid(double t) noexcept;

/// Negative log-likelihood in nats of label y under logit z, stable for any finite z.
double logistic_loss(double z, std::uint8_t y) noexcept;

/// sigma(logit); throws on a patch of the wrong size.
double predict_activation(const ConvLogisticModel& model, std::span<const std::uint8_t> features);

/// Mean NLL over the batch in bits per sample.
double nll_bits(const ConvLogisticModel& model, const PatchBatch& batch, int threads = 1);

/// The ridge is a Gaussian prior on the kernel weights (never the bias) combined with the
/// likelihood of the whole batch, and the sum is then divided by M:
///   objective = (1/M) [ sum_i nll_i + (ridge/2) ||w||^2 ]   (nats/sample)
struct ObjectiveGradient {
    double objective = 0.0;
    std::vector<double> gradient;
};

ObjectiveGradient objective_grad(const ConvLogisticModel& model, const PatchBatch& batch,
                                 double ridge, int threads = 1);

/// H v with H = (1/M) [ sum a(1-a) phi phi^T + ridge * diag(1 on weights, 0 on bias) ],
/// never materialized.
std::vector<double> hessian_vec(const ConvLogisticModel& model, const PatchBatch& batch,
                                double ridge, std::span<const double> v, int threads = 1);

struct TrainConfig {
    double ridge = 1e-3;
    int max_newton_iters = 50;
    double grad_tol = 1e-8;
    double cg_tol = 1e-10;
    /// 0 means "number of parameters".
    int cg_max_iters = 0;
    double armijo_c = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 60;
    int threads = 1;

    void validate() const;
};

struct NewtonIteration {
    int iteration = 0;
    double objective = 0.0;  // nats/sample, after the step
    double grad_max = 0.0;   // infinity norm, after the step
    double step = 0.0;
    int cg_iters = 0;
};

enum class StopReason { GradientTolerance, IterationLimit, LineSearchFailed };

struct TrainReport {
    /// Entry 0 is the zero model before any step.
    std::vector<NewtonIteration> trace;
    double final_nll_bits = 0.0;
    bool converged = false;
    StopReason stop = StopReason::IterationLimit;

    int iterations() const noexcept { return static_cast<int>(trace.size()) - 1; }
    double initial_objective() const { return trace.front().objective; }
    double final_objective() const { return trace.back().objective; }
};

/// Newton's method from the zero model: CG on the Newton system, Armijo backtracking.
std::pair<ConvLogisticModel, TrainReport> train(const PatchBatch& batch, const TrainConfig& config);

}  // namespace planestack
