#include "uaplab/synth.hpp"

#include <array>
#include <cmath>

namespace uaplab {

namespace {

constexpr std::size_t kSide = 28;

// 5x7 digit glyphs, one bit per cell, row-major top to bottom.
constexpr std::array<std::array<const char*, 7>, 10> kGlyphs = {{
    {"01110", "10001", "10011", "10101", "11001", "10001", "01110"}, // 0
    {"00100", "01100", "00100", "00100", "00100", "00100", "01110"}, // 1
    {"01110", "10001", "00001", "00010", "00100", "01000", "11111"}, // 2
    {"11111", "00010", "00100", "00010", "00001", "10001", "01110"}, // 3
    {"00010", "00110", "01010", "10010", "11111", "00010", "00010"}, // 4
    {"11111", "10000", "11110", "00001", "00001", "10001", "01110"}, // 5
    {"00110", "01000", "10000", "11110", "10001", "10001", "01110"}, // 6
    {"11111", "00001", "00010", "00100", "01000", "01000", "01000"}, // 7
    {"01110", "10001", "10001", "01110", "10001", "10001", "01110"}, // 8
    {"01110", "10001", "10001", "01111", "00001", "00010", "01100"}, // 9
}};

using Canvas = std::array<float, kSide * kSide>;

// Bilinear lookup into a glyph treated as a 5x7 image of 0/1 cells.
float glyph_sample(int digit, float gx, float gy) {
    if (gx < -1.0f || gy < -1.0f || gx > 5.0f || gy > 7.0f) return 0.0f;
    int x0 = static_cast<int>(std::floor(gx));
    int y0 = static_cast<int>(std::floor(gy));
    float fx = gx - static_cast<float>(x0);
    float fy = gy - static_cast<float>(y0);
    auto cell = [digit](int cx, int cy) -> float {
        if (cx < 0 || cx >= 5 || cy < 0 || cy >= 7) return 0.0f;
        return kGlyphs[digit][cy][cx] == '1' ? 1.0f : 0.0f;
    };
    float top = cell(x0, y0) * (1 - fx) + cell(x0 + 1, y0) * fx;
    float bot = cell(x0, y0 + 1) * (1 - fx) + cell(x0 + 1, y0 + 1) * fx;
    return top * (1 - fy) + bot * fy;
}

void render_digit(Canvas& img, int digit, Rng& rng) {
    float scale = static_cast<float>(rng.uniform(2.0, 2.9));
    float theta = static_cast<float>(rng.uniform(-0.18, 0.18));
    float dx = static_cast<float>(rng.uniform(-2.5, 2.5));
    float dy = static_cast<float>(rng.uniform(-2.5, 2.5));
    float fg = static_cast<float>(rng.uniform(0.6, 1.0));
    float ct = std::cos(theta), st = std::sin(theta);
    float cx = kSide / 2.0f + dx, cy = kSide / 2.0f + dy;

    for (std::size_t y = 0; y < kSide; ++y) {
        for (std::size_t x = 0; x < kSide; ++x) {
            // inverse-rotate the output pixel into glyph space
            float px = (static_cast<float>(x) + 0.5f) - cx;
            float py = (static_cast<float>(y) + 0.5f) - cy;
            float gx = (ct * px + st * py) / scale + 2.5f;
            float gy = (-st * px + ct * py) / scale + 3.5f;
            img[y * kSide + x] = fg * glyph_sample(digit, gx - 0.5f, gy - 0.5f);
        }
    }
}

void fill_rect(Canvas& img, int x0, int y0, int x1, int y1, float v) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, static_cast<int>(kSide) - 1);
    y1 = std::min(y1, static_cast<int>(kSide) - 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) img[y * kSide + x] = v;
}

// Garment silhouettes. jx/jy jitter the anchor, s scales the body.
void render_garment(Canvas& img, int cls, Rng& rng) {
    img.fill(0.0f);
    int jx = static_cast<int>(rng.uniform(-2.0, 3.0));
    int jy = static_cast<int>(rng.uniform(-2.0, 3.0));
    float fg = static_cast<float>(rng.uniform(0.5, 0.95));
    int s = static_cast<int>(rng.uniform(0.0, 3.0)); // 0..2 extra pixels

    switch (cls) {
        case 0: // t-shirt: torso + short sleeves
            fill_rect(img, 9 + jx, 8 + jy, 18 + s + jx, 22 + jy, fg);
            fill_rect(img, 4 + jx, 8 + jy, 8 + jx, 13 + jy, fg);
            fill_rect(img, 19 + s + jx, 8 + jy, 23 + s + jx, 13 + jy, fg);
            break;
        case 1: // trouser: waist + two legs
            fill_rect(img, 9 + jx, 5 + jy, 18 + jx, 9 + jy, fg);
            fill_rect(img, 9 + jx, 10 + jy, 12 + jx, 24 + jy, fg);
            fill_rect(img, 15 + jx, 10 + jy, 18 + jx, 24 + jy, fg);
            break;
        case 2: // pullover: torso + full-length sleeves
            fill_rect(img, 9 + jx, 7 + jy, 18 + s + jx, 23 + jy, fg);
            fill_rect(img, 4 + jx, 7 + jy, 8 + jx, 21 + jy, fg);
            fill_rect(img, 19 + s + jx, 7 + jy, 23 + s + jx, 21 + jy, fg);
            break;
        case 3: { // dress: widening staircase
            int top = 6 + jy;
            for (int i = 0; i < 5; ++i)
                fill_rect(img, 12 - i - s / 2 + jx, top + i * 4, 15 + i + s / 2 + jx,
                          top + i * 4 + 3, fg);
            break;
        }
        case 4: // coat: wide torso with a dark center slit
            fill_rect(img, 7 + jx, 6 + jy, 20 + s + jx, 24 + jy, fg);
            fill_rect(img, 3 + jx, 6 + jy, 6 + jx, 20 + jy, fg);
            fill_rect(img, 21 + s + jx, 6 + jy, 24 + s + jx, 20 + jy, fg);
            fill_rect(img, 13 + jx, 6 + jy, 14 + jx, 24 + jy, 0.0f);
            break;
        case 5: // sandal: sole + straps
            fill_rect(img, 4 + jx, 19 + jy, 23 + jx, 22 + jy, fg);
            fill_rect(img, 6 + jx, 12 + jy, 21 + jx, 13 + jy, fg);
            fill_rect(img, 9 + jx, 15 + jy, 23 + jx, 16 + jy, fg);
            break;
        case 6: // shirt: torso + sleeves + collar notch
            fill_rect(img, 9 + jx, 7 + jy, 18 + s + jx, 23 + jy, fg);
            fill_rect(img, 4 + jx, 7 + jy, 8 + jx, 18 + jy, fg);
            fill_rect(img, 19 + s + jx, 7 + jy, 23 + s + jx, 18 + jy, fg);
            fill_rect(img, 12 + jx, 7 + jy, 15 + jx, 10 + jy, 0.0f);
            break;
        case 7: // sneaker: sole + low top
            fill_rect(img, 4 + jx, 18 + jy, 24 + jx, 21 + jy, fg);
            fill_rect(img, 10 + jx, 13 + jy, 24 + jx, 17 + jy, fg * 0.8f);
            break;
        case 8: // bag: body + handle
            fill_rect(img, 6 + jx, 12 + jy, 21 + s + jx, 23 + jy, fg);
            fill_rect(img, 10 + jx, 6 + jy, 11 + jx, 11 + jy, fg);
            fill_rect(img, 17 + jx, 6 + jy, 18 + jx, 11 + jy, fg);
            fill_rect(img, 10 + jx, 5 + jy, 18 + jx, 6 + jy, fg);
            break;
        case 9: // ankle boot: shaft + foot
            fill_rect(img, 8 + jx, 7 + jy, 15 + jx, 21 + jy, fg);
            fill_rect(img, 8 + jx, 17 + jy, 23 + s + jx, 21 + jy, fg);
            break;
        default:
            break;
    }
}

DatasetHandle assemble(std::size_t n, std::uint64_t seed, bool digits,
                       const std::string& name) {
    Tensor images = Tensor::zeros({n, 1, kSide, kSide});
    std::vector<int> labels(n);
    Rng rng(seed);
    Canvas img{};

    for (std::size_t i = 0; i < n; ++i) {
        int cls = static_cast<int>(i % 10);
        labels[i] = cls;
        if (digits)
            render_digit(img, cls, rng);
        else
            render_garment(img, cls, rng);

        float noise_sd = static_cast<float>(rng.uniform(0.02, 0.10));
        float* dst = images.data.data() + i * kSide * kSide;
        for (std::size_t p = 0; p < kSide * kSide; ++p) {
            float v = clamp01(img[p] + static_cast<float>(rng.normal(0.0, noise_sd)));
            // quantize to the u8 grid the IDX container stores
            dst[p] = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
        }
    }

    DatasetHandle out;
    out.images = std::move(images);
    out.labels = std::move(labels);
    out.name = name;
    return out;
}

} // namespace

DatasetHandle synth_digits(std::size_t n, std::uint64_t seed) {
    return assemble(n, seed, true, "synth-digits");
}

DatasetHandle synth_clothing(std::size_t n, std::uint64_t seed) {
    return assemble(n, seed, false, "synth-clothing");
}

} // namespace uaplab
