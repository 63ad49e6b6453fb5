#include "hipcap/numerics/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "hipcap/error.hpp"

namespace hipcap {
namespace {

constexpr std::array<char, 8> kMagic = {'H', 'I', 'P', 'C', 'A', 'P', 'C', 'K'};
constexpr std::uint64_t kMaxManifest = std::uint64_t{1} << 30;

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 4);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::string get_bytes(std::istream& in, std::uint64_t n) {
    std::string s(n, '\0');
    if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw IoError("checkpoint truncated");
    return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const std::string& manifest, const ParamStore& params) {
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kCheckpointVersion);
    put_u64(out, manifest.size());
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    put_u64(out, params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& name = params.name(k);
        const Tensor& t = params.tensor(k);
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) put_u64(out, d);
        for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) throw IoError("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("not a hipcap checkpoint (bad magic)");
    const auto version = get_u32(in);
    if (version != kCheckpointVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    const auto mlen = get_u64(in);
    if (mlen > kMaxManifest) throw IoError("checkpoint manifest too large");
    ck.manifest = get_bytes(in, mlen);
    const auto count = get_u64(in);
    for (std::uint64_t k = 0; k < count; ++k) {
        const auto nlen = get_u32(in);
        std::string name = get_bytes(in, nlen);
        const auto rank = get_u32(in);
        if (rank == 0 || rank > 4) throw IoError("checkpoint tensor '" + name + "' has invalid rank");
        std::vector<std::size_t> shape(rank);
        std::uint64_t total = 1;
        for (auto& d : shape) {
            d = get_u64(in);
            if (d == 0 || d > (std::uint64_t{1} << 32)) throw IoError("checkpoint tensor '" + name + "' has invalid shape");
            total *= d;
        }
        if (total > (std::uint64_t{1} << 34)) throw IoError("checkpoint tensor '" + name + "' too large");
        std::vector<double> values(total);
        for (auto& v : values) v = std::bit_cast<double>(get_u64(in));
        ck.params.add(name, Tensor(std::move(shape), std::move(values)));
    }
    return ck;
}

void save_checkpoint(const std::string& path, const std::string& manifest, const ParamStore& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    try {
        write_checkpoint(out, manifest, params);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    try {
        return read_checkpoint(in);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace hipcap
