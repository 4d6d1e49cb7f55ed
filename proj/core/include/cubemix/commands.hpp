#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "cubemix/config.hpp"

namespace cubemix {

// Command implementations behind the CLI, usable directly from tests.
// Exit codes: 0 success, 2 usage/config/I-O error, 3 numeric failure.

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              std::ostream& log);

int cmd_infer(const std::string& checkpoint_path, const std::string& input_image,
              const std::string& output_image, std::ostream& log);

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_dir,
             const std::string& out_csv, std::ostream& log);

int cmd_ablate(const std::string& config_path, std::optional<std::uint64_t> seed_override,
               std::ostream& log);

int cmd_spectrum(const std::string& input_image, const std::string& output_prefix,
                 const std::string& checkpoint_path, std::ostream& log);

/// Builds the dataset a config describes (synthetic, or patches cropped from
/// the PPM images in data.dir).
Dataset dataset_from_config(const RunConfig& cfg);

} // namespace cubemix
