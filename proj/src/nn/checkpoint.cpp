#include "mmdr/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace mmdr::nn {

namespace {

constexpr char kMagic[8] = {'M', 'M', 'D', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw std::runtime_error("truncated checkpoint");
    return value;
}

void put_string(std::ostream& os, const std::string& s) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const auto len = get<std::uint32_t>(is);
    if (len > (1u << 20)) throw std::runtime_error("corrupt checkpoint string");
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw std::runtime_error("truncated checkpoint");
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net,
                     const CheckpointMeta& meta) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);

    put_string(os, meta.pipeline_mode);
    put<std::int32_t>(os, meta.k);
    put<std::uint64_t>(os, meta.seed);
    put<std::uint64_t>(os, meta.samples);
    put<std::int64_t>(os, meta.adam_steps);

    const ArchConfig& a = net.arch();
    put<std::int32_t>(os, a.in_channels);
    put<std::int32_t>(os, a.in_rows);
    put<std::int32_t>(os, a.in_cols);
    for (int l = 0; l < 3; ++l) put<std::int32_t>(os, a.conv_channels[l]);
    for (int l = 0; l < 3; ++l) put<std::int32_t>(os, a.conv_kernel[l]);
    for (int l = 0; l < 3; ++l) put<std::int32_t>(os, a.conv_stride[l]);
    put<std::int32_t>(os, a.proprio_dim);
    put<std::int32_t>(os, a.proprio_hidden);
    put<std::int32_t>(os, a.feature_dim);
    put<std::int32_t>(os, a.head_hidden);
    put<std::int32_t>(os, a.action_dim);
    put<std::uint8_t>(os, a.state_only ? 1 : 0);
    put<double>(os, a.logstd_init);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(a.proprio_scale.size()));
    for (double s : a.proprio_scale) put<double>(os, s);

    std::ostringstream manifest;
    manifest << "# checkpoint " << path << "\n";
    manifest << "# mode=" << meta.pipeline_mode << " k=" << meta.k
             << " seed=" << meta.seed << " samples=" << meta.samples
             << " adam_steps=" << meta.adam_steps << "\n";
    manifest << "# name shape offset count\n";

    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.blocks().size()));
    std::uint64_t offset = 0;
    for (const ParamBlock& b : net.blocks()) {
        put_string(os, b.name);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(b.shape.size()));
        for (int d : b.shape) put<std::int32_t>(os, d);
        put<std::uint64_t>(os, offset);
        put<std::uint64_t>(os, b.size());
        manifest << b.name << " ";
        for (std::size_t i = 0; i < b.shape.size(); ++i)
            manifest << (i ? "x" : "") << b.shape[i];
        manifest << " " << offset << " " << b.size() << "\n";
        offset += b.size();
    }
    for (const ParamBlock& b : net.blocks())
        os.write(reinterpret_cast<const char*>(b.w.data()),
                 static_cast<std::streamsize>(sizeof(double) * b.size()));
    if (!os) throw std::runtime_error("short write: " + path);
    os.close();

    std::ofstream mf(path + ".manifest", std::ios::trunc);
    if (mf) mf << manifest.str();
}

Network load_checkpoint(const std::string& path, CheckpointMeta* meta) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    if (get<std::uint32_t>(is) != kVersion)
        throw std::runtime_error("unsupported checkpoint version");

    CheckpointMeta m;
    m.pipeline_mode = get_string(is);
    m.k = get<std::int32_t>(is);
    m.seed = get<std::uint64_t>(is);
    m.samples = get<std::uint64_t>(is);
    m.adam_steps = get<std::int64_t>(is);

    ArchConfig a;
    a.in_channels = get<std::int32_t>(is);
    a.in_rows = get<std::int32_t>(is);
    a.in_cols = get<std::int32_t>(is);
    for (int l = 0; l < 3; ++l) a.conv_channels[l] = get<std::int32_t>(is);
    for (int l = 0; l < 3; ++l) a.conv_kernel[l] = get<std::int32_t>(is);
    for (int l = 0; l < 3; ++l) a.conv_stride[l] = get<std::int32_t>(is);
    a.proprio_dim = get<std::int32_t>(is);
    a.proprio_hidden = get<std::int32_t>(is);
    a.feature_dim = get<std::int32_t>(is);
    a.head_hidden = get<std::int32_t>(is);
    a.action_dim = get<std::int32_t>(is);
    a.state_only = get<std::uint8_t>(is) != 0;
    a.logstd_init = get<double>(is);
    const auto scale_len = get<std::uint32_t>(is);
    a.proprio_scale.resize(scale_len);
    for (auto& s : a.proprio_scale) s = get<double>(is);

    Network net(a, m.seed);
    net.set_adam_steps(m.adam_steps);

    const auto n_blocks = get<std::uint32_t>(is);
    if (n_blocks != net.blocks().size())
        throw std::runtime_error("checkpoint block count mismatch");
    std::uint64_t expect_offset = 0;
    for (ParamBlock& b : net.blocks()) {
        if (get_string(is) != b.name)
            throw std::runtime_error("checkpoint block order mismatch");
        const auto ndim = get<std::uint32_t>(is);
        if (ndim != b.shape.size())
            throw std::runtime_error("checkpoint shape mismatch: " + b.name);
        for (int d : b.shape)
            if (get<std::int32_t>(is) != d)
                throw std::runtime_error("checkpoint shape mismatch: " + b.name);
        if (get<std::uint64_t>(is) != expect_offset ||
            get<std::uint64_t>(is) != b.size())
            throw std::runtime_error("checkpoint offset table mismatch");
        expect_offset += b.size();
    }
    for (ParamBlock& b : net.blocks()) {
        is.read(reinterpret_cast<char*>(b.w.data()),
                static_cast<std::streamsize>(sizeof(double) * b.size()));
        if (!is) throw std::runtime_error("truncated checkpoint data");
    }
    if (meta != nullptr) *meta = m;
    return net;
}

}  // namespace mmdr::nn
