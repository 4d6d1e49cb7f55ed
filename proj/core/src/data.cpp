#include "cubemix/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace cubemix {

Tensor BlurSpec::kernel() const {
    if (kind == BlurKind::gaussian) {
        if (!(sigma > 0.0)) throw ValidationError("gaussian blur needs sigma > 0");
        int r = static_cast<int>(std::ceil(3.0 * sigma));
        int k = 2 * r + 1;
        Tensor ker({k, k, 1});
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                double dx = i - r, dy = j - r;
                double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                ker.at(i, j, 0) = v;
                sum += v;
            }
        }
        for (std::size_t i = 0; i < ker.numel(); ++i) ker[i] /= sum;
        return ker;
    }
    if (!(length >= 1.0)) throw ValidationError("motion blur needs length >= 1");
    int r = static_cast<int>(std::ceil(length / 2.0));
    int k = 2 * r + 1;
    Tensor ker({k, k, 1});
    // splat samples along the segment bilinearly
    int samples = std::max(2, static_cast<int>(std::ceil(length * 8.0)));
    double cx = std::cos(angle), cy = std::sin(angle);
    for (int s = 0; s < samples; ++s) {
        double t = (static_cast<double>(s) / (samples - 1) - 0.5) * (length - 1.0);
        double px = r + t * cx;
        double py = r + t * cy;
        int ix = static_cast<int>(std::floor(px));
        int iy = static_cast<int>(std::floor(py));
        double fx = px - ix, fy = py - iy;
        for (int di = 0; di < 2; ++di) {
            for (int dj = 0; dj < 2; ++dj) {
                int x = ix + di, y = iy + dj;
                if (x < 0 || x >= k || y < 0 || y >= k) continue;
                double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy);
                ker.at(x, y, 0) += w;
            }
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ker.numel(); ++i) sum += ker[i];
    for (std::size_t i = 0; i < ker.numel(); ++i) ker[i] /= sum;
    return ker;
}

Tensor synth_blur(const Tensor& sharp, const BlurSpec& spec) {
    if (sharp.rank() != 3) throw DimensionError("synth_blur expects a {W,H,C} image");
    Tensor ker = spec.kernel();
    int k = ker.dim(0);
    int r = k / 2;
    int w = sharp.dim(0), h = sharp.dim(1), c = sharp.dim(2);
    Tensor out({w, h, c});
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int i = 0; i < k; ++i) {
                    int sx = std::clamp(x + i - r, 0, w - 1);
                    for (int j = 0; j < k; ++j) {
                        int sy = std::clamp(y + j - r, 0, h - 1);
                        acc += ker.at(i, j, 0) * sharp.at(sx, sy, ch);
                    }
                }
                out.at(x, y, ch) = acc;
            }
        }
    }
    return out;
}

Tensor synthetic_sharp_image(int w, int h, Rng& rng) {
    Tensor img({w, h, 3});
    // smooth base: per-channel affine gradient plus two sinusoids
    for (int ch = 0; ch < 3; ++ch) {
        double base = rng.uniform(0.25, 0.65);
        double gx = rng.uniform(-0.25, 0.25);
        double gy = rng.uniform(-0.25, 0.25);
        double a1 = rng.uniform(0.05, 0.15), f1 = rng.uniform(2.0, 6.0), p1 = rng.uniform(0.0, 6.28);
        double a2 = rng.uniform(0.05, 0.15), f2 = rng.uniform(2.0, 6.0), p2 = rng.uniform(0.0, 6.28);
        for (int x = 0; x < w; ++x) {
            double u = static_cast<double>(x) / w;
            for (int y = 0; y < h; ++y) {
                double v = static_cast<double>(y) / h;
                img.at(x, y, ch) = base + gx * u + gy * v +
                                   a1 * std::sin(2.0 * 3.14159265358979 * f1 * u + p1) +
                                   a2 * std::sin(2.0 * 3.14159265358979 * f2 * v + p2);
            }
        }
    }
    // hard-edged shapes carry the high-frequency content
    int rects = 5 + static_cast<int>(rng.next_index(5));
    for (int n = 0; n < rects; ++n) {
        int rw = w / 8 + static_cast<int>(rng.next_index(static_cast<std::uint64_t>(w / 3)));
        int rh = h / 8 + static_cast<int>(rng.next_index(static_cast<std::uint64_t>(h / 3)));
        int x0 = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(std::max(1, w - rw))));
        int y0 = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(std::max(1, h - rh))));
        double col[3] = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        for (int x = x0; x < std::min(w, x0 + rw); ++x)
            for (int y = y0; y < std::min(h, y0 + rh); ++y)
                for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = col[ch];
    }
    int disks = 2 + static_cast<int>(rng.next_index(3));
    for (int n = 0; n < disks; ++n) {
        double rad = (w / 12.0) + rng.uniform(0.0, w / 6.0);
        double cx = rng.uniform(rad, w - rad);
        double cy = rng.uniform(rad, h - rad);
        double col[3] = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        for (int x = static_cast<int>(cx - rad); x <= static_cast<int>(cx + rad); ++x) {
            for (int y = static_cast<int>(cy - rad); y <= static_cast<int>(cy + rad); ++y) {
                if (x < 0 || x >= w || y < 0 || y >= h) continue;
                double dx = x - cx, dy = y - cy;
                if (dx * dx + dy * dy <= rad * rad)
                    for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = col[ch];
            }
        }
    }
    for (std::size_t i = 0; i < img.numel(); ++i) img[i] = std::clamp(img[i], 0.02, 0.98);
    return img;
}

namespace {

BlurSpec random_blur_spec(Rng& rng) {
    BlurSpec spec;
    if (rng.next_index(2) == 0) {
        spec.kind = BlurKind::gaussian;
        spec.sigma = rng.uniform(1.0, 3.0);
    } else {
        spec.kind = BlurKind::linear_motion;
        spec.length = rng.uniform(5.0, 15.0);
        spec.angle = rng.uniform(0.0, 3.14159265358979);
    }
    return spec;
}

} // namespace

Dataset make_dataset(const std::vector<Tensor>& source_images, int patch_size, int pair_count,
                     int holdout_count, std::uint64_t seed) {
    if (source_images.empty()) throw ValidationError("make_dataset needs source images");
    if (patch_size < 1) throw ValidationError("patch size must be positive");
    Rng rng(seed ^ 0x5a5a5a5a5a5a5a5aull);
    int total = pair_count + holdout_count;
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        const Tensor& src = source_images[static_cast<std::size_t>(i) % source_images.size()];
        if (src.dim(0) < patch_size || src.dim(1) < patch_size)
            throw DimensionError("source image " + shape_str(src.shape()) +
                                 " is smaller than the patch size " + std::to_string(patch_size));
        int x0 = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(src.dim(0) - patch_size + 1)));
        int y0 = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(src.dim(1) - patch_size + 1)));
        Tensor sharp({patch_size, patch_size, src.dim(2)});
        for (int x = 0; x < patch_size; ++x)
            for (int y = 0; y < patch_size; ++y)
                for (int c = 0; c < src.dim(2); ++c) sharp.at(x, y, c) = src.at(x0 + x, y0 + y, c);
        Pair p;
        p.spec = random_blur_spec(rng);
        p.blurry = synth_blur(sharp, p.spec);
        p.sharp = std::move(sharp);
        pairs.push_back(std::move(p));
    }
    // seeded shuffle fixes the train/held-out split
    for (int i = total - 1; i > 0; --i) {
        int j = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(pairs[static_cast<std::size_t>(i)], pairs[static_cast<std::size_t>(j)]);
    }
    Dataset d;
    for (int i = 0; i < total; ++i) {
        if (i < pair_count)
            d.train.push_back(std::move(pairs[static_cast<std::size_t>(i)]));
        else
            d.holdout.push_back(std::move(pairs[static_cast<std::size_t>(i)]));
    }
    d.content_hash = dataset_hash(d);
    return d;
}

Dataset make_synthetic_dataset(int patch_size, int pair_count, int holdout_count,
                               std::uint64_t seed) {
    Rng rng(seed ^ 0xc0ffee1234567890ull);
    int total = pair_count + holdout_count;
    int sources = std::max(1, (total + 1) / 2);
    std::vector<Tensor> images;
    images.reserve(static_cast<std::size_t>(sources));
    for (int i = 0; i < sources; ++i)
        images.push_back(synthetic_sharp_image(patch_size * 2, patch_size * 2, rng));
    return make_dataset(images, patch_size, pair_count, holdout_count, seed);
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const Tensor& t) {
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(t.data());
    std::size_t n = t.numel() * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

std::uint64_t dataset_hash(const Dataset& d) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const Pair& p : d.train) {
        h = fnv1a(h, p.blurry);
        h = fnv1a(h, p.sharp);
    }
    for (const Pair& p : d.holdout) {
        h = fnv1a(h, p.blurry);
        h = fnv1a(h, p.sharp);
    }
    return h;
}

double total_variation(const Tensor& x) {
    if (x.rank() != 3) throw DimensionError("total_variation expects a {W,H,C} tensor");
    double tv = 0.0;
    for (int c = 0; c < x.dim(2); ++c) {
        for (int i = 0; i < x.dim(0); ++i) {
            for (int j = 0; j < x.dim(1); ++j) {
                if (i + 1 < x.dim(0)) tv += std::abs(x.at(i + 1, j, c) - x.at(i, j, c));
                if (j + 1 < x.dim(1)) tv += std::abs(x.at(i, j + 1, c) - x.at(i, j, c));
            }
        }
    }
    return tv;
}

} // namespace cubemix
