#pragma once

#include <span>
#include <string>
#include <vector>

#include "cubemix/data.hpp"
#include "cubemix/network.hpp"
#include "cubemix/optimizer.hpp"

namespace cubemix {

struct TrainConfig {
    double lr = 1e-4;
    int batch_size = 4;
    int iterations = 500;
    double lambda_p = 0.03;
    std::uint64_t seed = 0;
    Ablation ablation = Ablation::full;
    /// Held-out metrics are recomputed every eval_every iterations (and at the
    /// final one); rows in between carry the last computed values.
    int eval_every = 25;
    int threads = 1;

    void validate() const;
};

struct MetricRow {
    int iteration = 0;
    double loss = 0.0;
    double l1 = 0.0;
    double perceptual = 0.0;
    double psnr_val = 0.0;
    double ssim_val = 0.0;
};

struct TrainLog {
    std::vector<MetricRow> rows;
    std::string to_csv() const; // header iteration,loss,l1,perceptual,psnr_val,ssim_val
};

/// Deterministic seeded training: batches sampled with replacement, per-item
/// tapes, gradients averaged in index order, Adam updates in place.
/// Throws NumericError if the loss stops being finite.
TrainLog train_loop(const TrainConfig& cfg, const Dataset& data, NetworkParams& params);

struct EvalRow {
    std::string id;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvalResult {
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    std::vector<EvalRow> rows;
    std::string to_csv() const; // header image_id,psnr,ssim
};

/// Runs the network on each blurry input (with export-time clamp) and
/// aggregates PSNR/SSIM against the sharp targets.
EvalResult evaluate(const NetworkParams& params, std::span<const Pair> pairs, int threads = 1);

/// PSNR/SSIM of the blurry inputs themselves against the sharp targets.
EvalResult baseline_metrics(std::span<const Pair> pairs);

/// Stable formatting used by every CSV writer ("%.10g"; infinities as "inf").
std::string format_double(double v);

} // namespace cubemix
