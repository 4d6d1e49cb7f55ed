#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cubemix/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cubemix - multi-scale cubic-mixer image deblurring"};
    app.require_subcommand(1);

    std::string config_path;
    std::string checkpoint_path;
    std::string input_path;
    std::string output_path;
    std::string dataset_dir;
    std::optional<std::uint64_t> seed;

    CLI::App* train = app.add_subcommand("train", "Train a model from a config file");
    train->add_option("--config", config_path, "config file")->required();
    train->add_option("--seed", seed, "override the config seed");

    CLI::App* infer = app.add_subcommand("infer", "Deblur one image with a checkpoint");
    infer->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    infer->add_option("input", input_path, "input PPM image")->required();
    infer->add_option("--out", output_path, "output PPM image")->required();

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on paired images");
    eval->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    eval->add_option("dataset", dataset_dir, "directory of *_blurry.ppm/*_sharp.ppm pairs")->required();
    eval->add_option("--out", output_path, "evaluation CSV path")->default_val("eval.csv");

    CLI::App* ablate = app.add_subcommand("ablate", "Train and evaluate the ablation variants");
    ablate->add_option("--config", config_path, "config file")->required();
    ablate->add_option("--seed", seed, "override the config seed");

    CLI::App* spectrum = app.add_subcommand("spectrum", "Render Fourier-plane diagnostics");
    spectrum->add_option("input", input_path, "input PPM image")->required();
    spectrum->add_option("--out", output_path, "output prefix")->required();
    spectrum->add_option("--checkpoint", checkpoint_path, "also render per-block spectra");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (train->parsed()) return cubemix::cmd_train(config_path, seed, std::cout);
    if (infer->parsed()) return cubemix::cmd_infer(checkpoint_path, input_path, output_path, std::cout);
    if (eval->parsed()) return cubemix::cmd_eval(checkpoint_path, dataset_dir, output_path, std::cout);
    if (ablate->parsed()) return cubemix::cmd_ablate(config_path, seed, std::cout);
    if (spectrum->parsed()) return cubemix::cmd_spectrum(input_path, output_path, checkpoint_path, std::cout);
    return 2;
}
