#include "planestack/correlate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>
#include <string>

#include "planestack/parallel.hpp"

namespace planestack {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

class FftPlans {
public:
    FftPlans(int rows, int cols, double* real, fftw_complex* spec) {
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_r2c_2d(rows, cols, real, spec, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_2d(rows, cols, spec, real, FFTW_ESTIMATE);
        if (!forward_ || !inverse_) throw Error("fftw: failed to create plans");
    }
    ~FftPlans() {
        std::lock_guard lock(planner_mutex());
        if (forward_) fftw_destroy_plan(forward_);
        if (inverse_) fftw_destroy_plan(inverse_);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

    void forward() const { fftw_execute(forward_); }
    void inverse() const { fftw_execute(inverse_); }

private:
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

RealPlane correlate_direct(std::span<const BinaryPlane> planes,
                           std::span<const std::span<const double>> kernels, int side,
                           double offset, int threads) {
    const int out_w = planes.front().width() - side + 1;
    const int out_h = planes.front().height() - side + 1;
    RealPlane out(out_w, out_h, offset);
    for_each_shard(static_cast<std::size_t>(out_h), threads,
                   [&](std::size_t begin, std::size_t end, std::size_t) {
        std::vector<double> acc(static_cast<std::size_t>(out_w));
        for (auto r = static_cast<int>(begin); r < static_cast<int>(end); ++r) {
            std::fill(acc.begin(), acc.end(), offset);
            for (std::size_t k = 0; k < planes.size(); ++k) {
                for (int i = 0; i < side; ++i) {
                    const auto src = planes[k].row(r + i);
                    const double* w = kernels[k].data() + static_cast<std::size_t>(i) * side;
                    for (int j = 0; j < side; ++j) {
                        const double wij = w[j];
                        if (wij == 0.0) continue;
                        const std::uint8_t* x = src.data() + j;
                        for (int c = 0; c < out_w; ++c) acc[c] += wij * x[c];
                    }
                }
            }
            std::copy(acc.begin(), acc.end(), &out(r, 0));
        }
    });
    return out;
}

RealPlane correlate_fft(std::span<const BinaryPlane> planes,
                        std::span<const std::span<const double>> kernels, int side,
                        double offset) {
    const int h = planes.front().height();
    const int w = planes.front().width();
    // Circular correlation on a frame at least as large as the input leaves the valid
    // outputs free of wrap-around.
    const int rows = fft_friendly_size(h);
    const int cols = fft_friendly_size(w);
    const int spec_cols = cols / 2 + 1;
    const std::size_t n_real = static_cast<std::size_t>(rows) * cols;
    const std::size_t n_spec = static_cast<std::size_t>(rows) * spec_cols;

    FftwBuffer<double> real(fftw_alloc_real(n_real));
    FftwBuffer<fftw_complex> spec(fftw_alloc_complex(n_spec));
    FftwBuffer<fftw_complex> kspec(fftw_alloc_complex(n_spec));
    FftwBuffer<fftw_complex> sum(fftw_alloc_complex(n_spec));
    if (!real || !spec || !kspec || !sum) throw Error("fftw: allocation failed");
    FftPlans plans(rows, cols, real.get(), spec.get());

    auto* acc = reinterpret_cast<std::complex<double>*>(sum.get());
    auto* xs = reinterpret_cast<std::complex<double>*>(spec.get());
    auto* ks = reinterpret_cast<std::complex<double>*>(kspec.get());
    std::fill(acc, acc + n_spec, std::complex<double>{});

    for (std::size_t k = 0; k < planes.size(); ++k) {
        std::fill(real.get(), real.get() + n_real, 0.0);
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                real[static_cast<std::size_t>(i) * cols + j] = kernels[k][static_cast<std::size_t>(i) * side + j];
            }
        }
        plans.forward();
        std::copy(xs, xs + n_spec, ks);

        std::fill(real.get(), real.get() + n_real, 0.0);
        for (int r = 0; r < h; ++r) {
            const auto src = planes[k].row(r);
            std::copy(src.begin(), src.end(), real.get() + static_cast<std::size_t>(r) * cols);
        }
        plans.forward();
        for (std::size_t q = 0; q < n_spec; ++q) acc[q] += xs[q] * std::conj(ks[q]);
    }

    std::copy(acc, acc + n_spec, xs);
    plans.inverse();
    const double scale = 1.0 / static_cast<double>(n_real);
    const int out_w = w - side + 1;
    const int out_h = h - side + 1;
    RealPlane out(out_w, out_h);
    for (int r = 0; r < out_h; ++r) {
        const double* src = real.get() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < out_w; ++c) out(r, c) = offset + src[c] * scale;
    }
    return out;
}

}  // namespace

int fft_friendly_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int v = m;
        for (int p : {2, 3, 5, 7}) {
            while (v % p == 0) v /= p;
        }
        if (v == 1) return m;
    }
}

RealPlane correlate_valid(std::span<const BinaryPlane> planes,
                          std::span<const std::span<const double>> kernels, int side,
                          double offset, CorrelationMethod method, int threads) {
    if (planes.empty()) throw InvalidArgument("correlate_valid: no input planes");
    if (planes.size() != kernels.size()) {
        throw InvalidArgument("correlate_valid: " + std::to_string(planes.size()) + " planes but " +
                              std::to_string(kernels.size()) + " kernels");
    }
    for (const auto& p : planes) {
        if (!p.same_shape(planes.front())) {
            throw InvalidArgument("correlate_valid: input planes differ in size");
        }
    }
    for (const auto& k : kernels) {
        if (k.size() != static_cast<std::size_t>(side) * side) {
            throw InvalidArgument("correlate_valid: kernel size does not match side");
        }
    }
    if (planes.front().width() < side || planes.front().height() < side) {
        throw InvalidArgument("correlate_valid: plane " + std::to_string(planes.front().width()) +
                              "x" + std::to_string(planes.front().height()) +
                              " is smaller than kernel side " + std::to_string(side));
    }
    if (method == CorrelationMethod::Auto) {
        const double out_px = static_cast<double>(planes.front().width() - side + 1) *
                              (planes.front().height() - side + 1);
        const double direct_cost = out_px * static_cast<double>(planes.size()) * side * side;
        method = (side >= 9 && direct_cost > 5e7) ? CorrelationMethod::Fft : CorrelationMethod::Direct;
    }
    if (method == CorrelationMethod::Fft) return correlate_fft(planes, kernels, side, offset);
    return correlate_direct(planes, kernels, side, offset, threads);
}

}  // namespace planestack
