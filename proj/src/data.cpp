#include "uaplab/data.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace uaplab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803; // u8 payload, 3 dims
constexpr std::uint32_t kLabelMagic = 0x00000801; // u8 payload, 1 dim

std::uint32_t read_u32_be(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("truncated IDX file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_u32_be(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

Tensor DatasetHandle::image_tensor(std::size_t i) const {
    auto src = image(i);
    return Tensor({images.extent(1), images.extent(2), images.extent(3)},
                  std::vector<float>(src.begin(), src.end()));
}

DatasetHandle load_idx(const std::string& images_path,
                       const std::optional<std::string>& labels_path) {
    std::ifstream is(images_path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open IDX image file: " + images_path);

    std::uint32_t magic = read_u32_be(is, images_path);
    if (magic != kImageMagic)
        throw std::runtime_error("bad IDX image magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%08x", magic);
            return std::string(buf);
        }() + " in " + images_path);

    std::uint32_t n = read_u32_be(is, images_path);
    std::uint32_t h = read_u32_be(is, images_path);
    std::uint32_t w = read_u32_be(is, images_path);

    std::size_t count = std::size_t(n) * h * w;
    std::vector<unsigned char> raw(count);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count)))
        throw std::runtime_error("truncated IDX image payload: " + images_path);

    std::vector<float> pixels(count);
    for (std::size_t i = 0; i < count; ++i)
        pixels[i] = static_cast<float>(raw[i]) / 255.0f;

    DatasetHandle out;
    out.images = Tensor({n, 1, h, w}, std::move(pixels));
    out.name = std::filesystem::path(images_path).filename().string();

    if (labels_path) {
        std::ifstream ls(*labels_path, std::ios::binary);
        if (!ls) throw std::runtime_error("cannot open IDX label file: " + *labels_path);
        std::uint32_t lmagic = read_u32_be(ls, *labels_path);
        if (lmagic != kLabelMagic)
            throw std::runtime_error("bad IDX label magic in " + *labels_path);
        std::uint32_t ln = read_u32_be(ls, *labels_path);
        if (ln != n)
            throw std::runtime_error("IDX image/label count mismatch: " + std::to_string(n) +
                                     " images vs " + std::to_string(ln) + " labels");
        std::vector<unsigned char> lraw(ln);
        if (!ls.read(reinterpret_cast<char*>(lraw.data()), ln))
            throw std::runtime_error("truncated IDX label payload: " + *labels_path);
        out.labels = std::vector<int>(lraw.begin(), lraw.end());
    }
    return out;
}

void save_idx_images(const Tensor& images, const std::string& path) {
    if (images.rank() != 4 || images.extent(1) != 1)
        throw std::invalid_argument("save_idx_images: need a [N,1,H,W] tensor");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write IDX file: " + path);
    write_u32_be(os, kImageMagic);
    write_u32_be(os, static_cast<std::uint32_t>(images.extent(0)));
    write_u32_be(os, static_cast<std::uint32_t>(images.extent(2)));
    write_u32_be(os, static_cast<std::uint32_t>(images.extent(3)));
    std::vector<unsigned char> raw(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        raw[i] = static_cast<unsigned char>(std::lround(clamp01(images.data[i]) * 255.0f));
    os.write(reinterpret_cast<const char*>(raw.data()),
             static_cast<std::streamsize>(raw.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

void save_idx_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write IDX file: " + path);
    write_u32_be(os, kLabelMagic);
    write_u32_be(os, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) throw std::invalid_argument("label out of u8 range");
        os.put(static_cast<char>(l));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

DatasetHandle load_idx_dir(const std::string& dir, bool train) {
    namespace fs = std::filesystem;
    std::string stem = train ? "train" : "t10k";
    fs::path images = fs::path(dir) / (stem + "-images");
    fs::path labels = fs::path(dir) / (stem + "-labels");
    if (!fs::exists(images))
        throw std::runtime_error("missing IDX file: " + images.string());
    std::optional<std::string> lp;
    if (fs::exists(labels)) lp = labels.string();
    DatasetHandle out = load_idx(images.string(), lp);
    out.name = fs::path(dir).filename().string() + "/" + stem;
    return out;
}

ProxySpec parse_proxy_spec(const std::string& text) {
    ProxySpec spec;
    auto colon = text.find(':');
    std::string kind = colon == std::string::npos ? text : text.substr(0, colon);

    if (kind != "gaussian" && kind != "white" && kind != "uniform") {
        spec.kind = ProxyKind::DatasetPath;
        spec.path = text;
        return spec;
    }

    spec.kind = kind == "gaussian" ? ProxyKind::Gaussian
              : kind == "white"    ? ProxyKind::White
                                   : ProxyKind::Uniform;
    if (colon == std::string::npos) return spec;

    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
        auto next = rest.find(',', pos);
        std::string item = rest.substr(pos, next == std::string::npos ? next : next - pos);
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad proxy spec item '" + item + "' in " + text);
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        if (key == "mu") spec.mu = std::stod(val);
        else if (key == "sigma") spec.sigma = std::stod(val);
        else if (key == "n") spec.n = std::stoul(val);
        else if (key == "seed") spec.seed = std::stoull(val);
        else throw std::invalid_argument("unknown proxy spec key '" + key + "' in " + text);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (spec.n < 1) throw std::invalid_argument("proxy spec needs n >= 1");
    if (spec.sigma < 0) throw std::invalid_argument("proxy spec needs sigma >= 0");
    return spec;
}

DatasetHandle gen_proxy(const ProxySpec& spec, std::size_t c, std::size_t h, std::size_t w) {
    if (spec.kind == ProxyKind::DatasetPath) {
        if (std::filesystem::is_directory(spec.path)) return load_idx_dir(spec.path, true);
        return load_idx(spec.path);
    }
    if (spec.n < 1) throw std::invalid_argument("proxy set needs n >= 1");
    if (spec.sigma < 0) throw std::invalid_argument("gaussian proxy needs sigma >= 0");

    std::size_t d = c * h * w;
    Tensor images = Tensor::zeros({spec.n, c, h, w});
    Rng rng(spec.seed);
    DatasetHandle out;

    switch (spec.kind) {
        case ProxyKind::White:
            std::fill(images.data.begin(), images.data.end(), 1.0f);
            out.name = "white";
            break;
        case ProxyKind::Gaussian:
            for (std::size_t i = 0; i < spec.n * d; ++i)
                images.data[i] = clamp01(static_cast<float>(rng.normal(spec.mu, spec.sigma)));
            out.name = "gaussian";
            break;
        case ProxyKind::Uniform:
            for (std::size_t i = 0; i < spec.n * d; ++i)
                images.data[i] = static_cast<float>(rng.uniform01());
            out.name = "uniform";
            break;
        case ProxyKind::DatasetPath:
            break;
    }
    out.images = std::move(images);
    return out;
}

std::vector<std::size_t> sample_indices(const DatasetHandle& data, std::size_t m, Rng& rng) {
    if (data.count() == 0) throw std::invalid_argument("cannot sample from an empty dataset");
    if (m < 1) throw std::invalid_argument("batch size must be >= 1");
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i)
        idx[i] = static_cast<std::size_t>(rng.below(data.count()));
    return idx;
}

Tensor sample_batch(const DatasetHandle& data, std::size_t m, Rng& rng) {
    auto idx = sample_indices(data, m, rng);
    std::size_t d = data.image_size();
    Tensor batch = Tensor::zeros({m, data.images.extent(1), data.images.extent(2),
                                  data.images.extent(3)});
    for (std::size_t i = 0; i < m; ++i) {
        auto src = data.image(idx[i]);
        std::copy(src.begin(), src.end(), batch.data.begin() + i * d);
    }
    return batch;
}

} // namespace uaplab
