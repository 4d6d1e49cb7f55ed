#pragma once

#include <string>
#include <vector>

#include "cubemix/network.hpp"
#include "cubemix/train.hpp"

namespace cubemix {

enum class DataMode { synthetic, dir };

/// Merged run configuration parsed from a flat key=value file. Every key is
/// typed and documented in the README; unknown keys are hard errors.
struct RunConfig {
    std::uint64_t seed = 0;
    NetworkConfig net;
    TrainConfig train;

    DataMode data_mode = DataMode::synthetic;
    std::string data_dir;
    int data_count = 32;
    int data_holdout = 8;
    int data_patch = 96;

    std::string io_checkpoint = "checkpoint.cbmx";
    std::string io_metrics = "metrics.csv";
    std::string io_eval = "eval.csv";
    std::string io_ablate = "ablate.csv";

    std::vector<Ablation> ablate_variants = {Ablation::full,  Ablation::d_real, Ablation::d_imag,
                                             Ablation::wo_ms, Ablation::wo_ss,  Ablation::wo_lfe};

    void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys, bad
/// values, and impossible geometry raise ConfigError.
RunConfig parse_config_text(const std::string& text);

RunConfig parse_config_file(const std::string& path);

} // namespace cubemix
