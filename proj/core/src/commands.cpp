#include "cubemix/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "cubemix/checkpoint.hpp"
#include "cubemix/image_io.hpp"
#include "cubemix/spectral.hpp"
#include "cubemix/threading.hpp"

namespace cubemix {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const NumericError& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << content;
    if (!out) throw IoError(path + ": write failed");
}

std::vector<std::string> sorted_ppm_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("dataset directory '" + dir + "' does not exist");
    std::vector<std::string> files;
    for (const fs::directory_entry& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace

Dataset dataset_from_config(const RunConfig& cfg) {
    if (cfg.data_mode == DataMode::synthetic)
        return make_synthetic_dataset(cfg.data_patch, cfg.data_count, cfg.data_holdout, cfg.seed);
    std::vector<std::string> files = sorted_ppm_files(cfg.data_dir);
    if (files.empty()) throw ConfigError("dataset directory '" + cfg.data_dir + "' has no .ppm images");
    std::vector<Tensor> sources;
    sources.reserve(files.size());
    for (const std::string& f : files) sources.push_back(image_read(f));
    return make_dataset(sources, cfg.data_patch, cfg.data_count, cfg.data_holdout, cfg.seed);
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              std::ostream& log) {
    return guarded(log, [&] {
        RunConfig cfg = parse_config_file(config_path);
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.train.seed = *seed_override;
        }
        cfg.train.threads = thread_cap_from_env();

        Dataset data = dataset_from_config(cfg);
        log << "dataset: " << data.train.size() << " train, " << data.holdout.size()
            << " held-out pairs, hash=" << std::hex << data.content_hash << std::dec << "\n";

        NetworkParams params =
            init_network(cfg.net, cfg.train.ablation, cfg.data_patch, cfg.data_patch, cfg.seed);
        log << "parameters: " << param_count(params) << "\n";

        TrainLog tl = train_loop(cfg.train, data, params);
        write_text_file(cfg.io_metrics, tl.to_csv());
        checkpoint_save(cfg.io_checkpoint, params);
        if (!tl.rows.empty()) {
            const MetricRow& last = tl.rows.back();
            log << "final: loss=" << format_double(last.loss)
                << " psnr_val=" << format_double(last.psnr_val)
                << " ssim_val=" << format_double(last.ssim_val) << "\n";
        }
        log << "wrote " << cfg.io_metrics << " and " << cfg.io_checkpoint << "\n";
        return 0;
    });
}

int cmd_infer(const std::string& checkpoint_path, const std::string& input_image,
              const std::string& output_image, std::ostream& log) {
    return guarded(log, [&] {
        NetworkParams params = checkpoint_load(checkpoint_path);
        Tensor in = image_read(input_image);
        Tensor out = clamp01(deblur_infer(in, params));
        image_write(output_image, out);
        log << "wrote " << output_image << " (" << out.dim(0) << "x" << out.dim(1) << ")\n";
        return 0;
    });
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_dir,
             const std::string& out_csv, std::ostream& log) {
    return guarded(log, [&] {
        NetworkParams params = checkpoint_load(checkpoint_path);
        // pair files: <name>_blurry.ppm with matching <name>_sharp.ppm
        std::vector<Pair> pairs;
        for (const std::string& f : sorted_ppm_files(dataset_dir)) {
            const std::string suffix = "_blurry.ppm";
            if (f.size() <= suffix.size() || f.substr(f.size() - suffix.size()) != suffix) continue;
            std::string sharp_path = f.substr(0, f.size() - suffix.size()) + "_sharp.ppm";
            if (!fs::exists(sharp_path))
                throw ConfigError("missing sharp image for '" + f + "'");
            Pair p;
            p.blurry = image_read(f);
            p.sharp = image_read(sharp_path);
            pairs.push_back(std::move(p));
        }
        if (pairs.empty())
            throw ConfigError("dataset directory '" + dataset_dir + "' has no *_blurry.ppm/*_sharp.ppm pairs");

        EvalResult res = evaluate(params, pairs, thread_cap_from_env());
        write_text_file(out_csv, res.to_csv());
        log << "PSNR=" << format_double(res.mean_psnr) << " SSIM=" << format_double(res.mean_ssim)
            << "\n";
        return 0;
    });
}

int cmd_ablate(const std::string& config_path, std::optional<std::uint64_t> seed_override,
               std::ostream& log) {
    return guarded(log, [&] {
        RunConfig cfg = parse_config_file(config_path);
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.train.seed = *seed_override;
        }
        cfg.train.threads = thread_cap_from_env();

        // the full model is always part of the comparison
        std::vector<Ablation> variants = cfg.ablate_variants;
        if (std::find(variants.begin(), variants.end(), Ablation::full) == variants.end())
            variants.insert(variants.begin(), Ablation::full);

        // one shared dataset: every variant trains and evaluates on the same pairs
        Dataset data = dataset_from_config(cfg);

        std::ostringstream csv;
        csv << "variant,psnr,ssim\n";
        int failures = 0;
        int failure_code = 0;
        for (Ablation variant : variants) {
            std::ostringstream hash_hex;
            hash_hex << std::hex << data.content_hash;
            log << "variant " << to_string(variant) << ": dataset_hash=" << hash_hex.str() << "\n";
            try {
                TrainConfig tc = cfg.train;
                tc.ablation = variant;
                NetworkParams params =
                    init_network(cfg.net, variant, cfg.data_patch, cfg.data_patch, cfg.seed);
                train_loop(tc, data, params);
                EvalResult res = evaluate(params, data.holdout, cfg.train.threads);
                csv << to_string(variant) << ',' << format_double(res.mean_psnr) << ','
                    << format_double(res.mean_ssim) << '\n';
                log << "variant " << to_string(variant) << ": PSNR=" << format_double(res.mean_psnr)
                    << " SSIM=" << format_double(res.mean_ssim) << "\n";
            } catch (const NumericError& e) {
                ++failures;
                failure_code = 3;
                log << "variant " << to_string(variant) << " failed: " << e.what() << "\n";
            } catch (const std::exception& e) {
                ++failures;
                if (failure_code == 0) failure_code = 2;
                log << "variant " << to_string(variant) << " failed: " << e.what() << "\n";
            }
        }
        write_text_file(cfg.io_ablate, csv.str());
        log << "wrote " << cfg.io_ablate << "\n";
        return failures ? failure_code : 0;
    });
}

int cmd_spectrum(const std::string& input_image, const std::string& output_prefix,
                 const std::string& checkpoint_path, std::ostream& log) {
    return guarded(log, [&] {
        Tensor img = image_read(input_image);
        SpectralPlanes s = fft2(img);
        Tensor zeros(s.real.shape());

        image_write(output_prefix + "_real.ppm", render_spectrum({s.real, zeros}, 0.0, 1.0));
        image_write(output_prefix + "_imag.ppm", render_spectrum({zeros, s.imag}, 0.0, 1.0));
        image_write(output_prefix + "_magnitude.ppm", render_spectrum(s, 0.0, 1.0));

        Tensor phase = phase_spectrum(s);
        Tensor phase_img(phase.shape());
        const double pi = 3.14159265358979323846;
        for (std::size_t i = 0; i < phase.numel(); ++i)
            phase_img[i] = (phase[i] + pi) / (2.0 * pi);
        image_write(output_prefix + "_phase.ppm", phase_img);
        log << "wrote " << output_prefix << "_{real,imag,magnitude,phase}.ppm\n";

        if (!checkpoint_path.empty()) {
            // per-block spectra along the top path
            NetworkParams params = checkpoint_load(checkpoint_path);
            const PathParams& top = params.paths.front();
            Tape tape;
            std::vector<Var> vars = params.table.bind(tape);
            Var low = tape.leaf(resample(img, top.size.w, top.size.h, ResampleMethod::bicubic));
            SpectralVars sv = fft2(low);
            Var re = sv.real, im = sv.imag;
            if (params.feed() == SpectralFeed::double_real) im = sv.real;
            if (params.feed() == SpectralFeed::double_imag) re = sv.imag;
            for (std::size_t k = 0; k < top.phi1.blocks.size(); ++k) {
                re = mixer_block(re, top.phi1.blocks[k], vars);
                im = mixer_block(im, top.phi2.blocks[k], vars);
                std::string path = output_prefix + "_block" + std::to_string(k + 1) + ".ppm";
                image_write(path, render_spectrum({re.value(), im.value()}, 0.0, 1.0));
                log << "wrote " << path << "\n";
            }
        }
        return 0;
    });
}

} // namespace cubemix
