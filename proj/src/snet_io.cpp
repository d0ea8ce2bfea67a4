#include "uaplab/snet_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace uaplab {

static_assert(std::endian::native == std::endian::little,
              "SNET/UAPB writers assume a little-endian host");

namespace {

constexpr std::uint16_t kSnetVersion = 1;

void write_u16(std::ostream& os, std::uint16_t v) {
    os.write(reinterpret_cast<const char*>(&v), 2);
}
void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint16_t read_u16(std::istream& is, const std::string& path) {
    std::uint16_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 2))
        throw std::runtime_error("truncated SNET file: " + path);
    return v;
}
std::uint32_t read_u32(std::istream& is, const std::string& path) {
    std::uint32_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
        throw std::runtime_error("truncated SNET file: " + path);
    return v;
}

// Parameter payload length implied by a layer's kind and extents.
std::size_t payload_count(LayerKind kind, const std::vector<std::size_t>& extents) {
    switch (kind) {
        case LayerKind::Conv2d:
            return extents[0] * extents[1] * extents[2] * extents[3] + extents[0];
        case LayerKind::Dense:
            return extents[0] * extents[1] + extents[0];
        default:
            return 0;
    }
}

} // namespace

void save_snet(const Classifier& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write model file: " + path);

    os.write("SNET", 4);
    write_u16(os, kSnetVersion);
    write_u16(os, static_cast<std::uint16_t>(net.class_count));
    write_u16(os, static_cast<std::uint16_t>(net.layers.size()));

    for (const Layer& l : net.layers) {
        os.put(static_cast<char>(l.kind));
        write_u32(os, static_cast<std::uint32_t>(l.extents.size()));
        for (std::size_t e : l.extents) {
            if (e > std::numeric_limits<std::uint32_t>::max())
                throw std::runtime_error("extent too large for SNET format");
            write_u32(os, static_cast<std::uint32_t>(e));
        }
        os.write(reinterpret_cast<const char*>(l.weights.data()),
                 static_cast<std::streamsize>(l.weights.size() * 4));
        os.write(reinterpret_cast<const char*>(l.bias.data()),
                 static_cast<std::streamsize>(l.bias.size() * 4));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Classifier load_snet(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open model file: " + path);

    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "SNET", 4) != 0)
        throw std::runtime_error("bad magic, not an SNET model: " + path);
    std::uint16_t version = read_u16(is, path);
    if (version != kSnetVersion)
        throw std::runtime_error("unsupported SNET version " + std::to_string(version) +
                                 ": " + path);

    Classifier net;
    std::uint16_t class_count = read_u16(is, path);
    std::uint16_t layer_count = read_u16(is, path);

    for (std::uint16_t li = 0; li < layer_count; ++li) {
        int kind_byte = is.get();
        if (kind_byte < 0) throw std::runtime_error("truncated SNET file: " + path);
        if (kind_byte > static_cast<int>(LayerKind::Dense))
            throw std::runtime_error("unknown layer kind " + std::to_string(kind_byte) +
                                     " in " + path);
        Layer l;
        l.kind = static_cast<LayerKind>(kind_byte);
        std::uint32_t n_ext = read_u32(is, path);
        l.extents.resize(n_ext);
        for (std::uint32_t i = 0; i < n_ext; ++i) l.extents[i] = read_u32(is, path);

        std::size_t n_params = payload_count(l.kind, l.extents);
        if (n_params > 0) {
            std::size_t n_bias = l.extents[0];
            std::size_t n_weights = n_params - n_bias;
            l.weights.resize(n_weights);
            l.bias.resize(n_bias);
            if (!is.read(reinterpret_cast<char*>(l.weights.data()),
                         static_cast<std::streamsize>(n_weights * 4)) ||
                !is.read(reinterpret_cast<char*>(l.bias.data()),
                         static_cast<std::streamsize>(n_bias * 4)))
                throw std::runtime_error("truncated SNET payload: " + path);
        }
        net.layers.push_back(std::move(l));
    }

    net.id = std::filesystem::path(path).stem().string();
    net.finalize();
    if (net.class_count != class_count)
        throw std::runtime_error("SNET header class count " + std::to_string(class_count) +
                                 " disagrees with layer stack (" +
                                 std::to_string(net.class_count) + "): " + path);
    return net;
}

} // namespace uaplab
