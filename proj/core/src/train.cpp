#include "cubemix/train.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cubemix/loss.hpp"
#include "cubemix/metrics.hpp"
#include "cubemix/threading.hpp"

namespace cubemix {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (lambda_p < 0.0) throw ConfigError("lambda_p must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string TrainLog::to_csv() const {
    std::ostringstream os;
    os << "iteration,loss,l1,perceptual,psnr_val,ssim_val\n";
    for (const MetricRow& r : rows)
        os << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.l1) << ','
           << format_double(r.perceptual) << ',' << format_double(r.psnr_val) << ','
           << format_double(r.ssim_val) << '\n';
    return os.str();
}

std::string EvalResult::to_csv() const {
    std::ostringstream os;
    os << "image_id,psnr,ssim\n";
    for (const EvalRow& r : rows)
        os << r.id << ',' << format_double(r.psnr) << ',' << format_double(r.ssim) << '\n';
    return os.str();
}

namespace {

struct ItemResult {
    std::vector<Tensor> grads;
    double loss = 0.0;
    double l1 = 0.0;
    double perceptual = 0.0;
};

ItemResult backprop_item(const NetworkParams& params, const Pair& pair, double lambda_p) {
    Tape tape;
    std::vector<Var> vars = params.table.bind(tape);
    Var in = tape.leaf(pair.blurry);
    Var target = tape.leaf(pair.sharp);
    Var pred = deblur_forward(in, params, vars);
    LossParts parts = total_loss(pred, target, lambda_p);
    tape.backward(parts.total.id);
    ItemResult res;
    res.loss = parts.total.value()[0];
    res.l1 = parts.l1;
    res.perceptual = parts.perceptual;
    res.grads.reserve(vars.size());
    for (const Var& v : vars) res.grads.push_back(tape.adjoint(v.id));
    return res;
}

} // namespace

TrainLog train_loop(const TrainConfig& cfg, const Dataset& data, NetworkParams& params) {
    cfg.validate();
    if (data.train.empty()) throw ConfigError("training set is empty");

    TrainLog log;
    if (cfg.iterations == 0) return log;

    Rng batch_rng(cfg.seed ^ 0x7a7a7a7a7a7a7a7aull);
    AdamState adam;
    double psnr_val = 0.0, ssim_val = 0.0;

    auto run_eval = [&] {
        if (data.holdout.empty()) return;
        EvalResult r = evaluate(params, data.holdout, cfg.threads);
        psnr_val = r.mean_psnr;
        ssim_val = r.mean_ssim;
    };
    run_eval(); // metrics of the freshly initialized network

    int n_params = params.table.count();
    int batch = cfg.batch_size;
    for (int it = 1; it <= cfg.iterations; ++it) {
        for (int k = 0; k < n_params; ++k)
            if (!params.table.value(k).all_finite())
                throw NumericError("parameters became non-finite at iteration " +
                                   std::to_string(it) + " ('" + params.table.name(k) + "')");

        std::vector<std::size_t> indices(static_cast<std::size_t>(batch));
        for (std::size_t& idx : indices) idx = batch_rng.next_index(data.train.size());

        std::vector<ItemResult> items(static_cast<std::size_t>(batch));
        parallel_for(batch, cfg.threads, [&](int i) {
            items[static_cast<std::size_t>(i)] =
                backprop_item(params, data.train[indices[static_cast<std::size_t>(i)]], cfg.lambda_p);
        });

        // ordered reduction keeps threaded runs bit-identical to sequential
        std::vector<Tensor> grads(static_cast<std::size_t>(n_params));
        for (int k = 0; k < n_params; ++k) grads[static_cast<std::size_t>(k)] = Tensor(params.table.value(k).shape());
        double loss = 0.0, l1 = 0.0, perceptual = 0.0;
        double inv_batch = 1.0 / static_cast<double>(batch);
        for (int i = 0; i < batch; ++i) {
            const ItemResult& item = items[static_cast<std::size_t>(i)];
            loss += item.loss;
            l1 += item.l1;
            perceptual += item.perceptual;
            for (int k = 0; k < n_params; ++k) {
                Tensor& acc = grads[static_cast<std::size_t>(k)];
                const Tensor& g = item.grads[static_cast<std::size_t>(k)];
                for (std::size_t j = 0; j < acc.numel(); ++j) acc[j] += inv_batch * g[j];
            }
        }
        loss *= inv_batch;
        l1 *= inv_batch;
        perceptual *= inv_batch;

        if (!std::isfinite(loss))
            throw NumericError("loss became non-finite at iteration " + std::to_string(it));

        adam_step(params.table, grads, adam, cfg.lr);

        if (it % cfg.eval_every == 0 || it == cfg.iterations) run_eval();
        log.rows.push_back({it, loss, l1, perceptual, psnr_val, ssim_val});
    }
    return log;
}

EvalResult evaluate(const NetworkParams& params, std::span<const Pair> pairs, int threads) {
    EvalResult res;
    res.rows.resize(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
        const Pair& p = pairs[static_cast<std::size_t>(i)];
        Tensor out = clamp01(deblur_infer(p.blurry, params));
        EvalRow row;
        row.id = std::to_string(i);
        row.psnr = psnr(out, p.sharp);
        row.ssim = ssim(out, p.sharp);
        res.rows[static_cast<std::size_t>(i)] = std::move(row);
    });
    for (const EvalRow& r : res.rows) {
        res.mean_psnr += r.psnr;
        res.mean_ssim += r.ssim;
    }
    if (!res.rows.empty()) {
        res.mean_psnr /= static_cast<double>(res.rows.size());
        res.mean_ssim /= static_cast<double>(res.rows.size());
    }
    return res;
}

EvalResult baseline_metrics(std::span<const Pair> pairs) {
    EvalResult res;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        EvalRow row;
        row.id = std::to_string(i);
        row.psnr = psnr(pairs[i].blurry, pairs[i].sharp);
        row.ssim = ssim(pairs[i].blurry, pairs[i].sharp);
        res.mean_psnr += row.psnr;
        res.mean_ssim += row.ssim;
        res.rows.push_back(std::move(row));
    }
    if (!res.rows.empty()) {
        res.mean_psnr /= static_cast<double>(res.rows.size());
        res.mean_ssim /= static_cast<double>(res.rows.size());
    }
    return res;
}

} // namespace cubemix
