#include "gsemtmo/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

namespace {

constexpr char kMagic[4] = {'G', 'S', 'T', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double x) {
    put_u64(os, std::bit_cast<std::uint64_t>(x));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return x;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return x;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
    throw ValidationError("checkpoint " + path.string() + ": " + why);
}

}  // namespace

const Tensor2* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("checkpoint: cannot open " + path.string() + " for write");

    os.write(kMagic, 4);
    put_u32(os, kVersion);
    const std::string meta = ckpt.metadata.dump();
    put_u64(os, meta.size());
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put_u32(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u64(os, static_cast<std::uint64_t>(t.rows));
        put_u64(os, static_cast<std::uint64_t>(t.cols));
        for (double x : t.v) put_f64(os, x);
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("checkpoint: cannot open " + path.string());

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) corrupt(path, "bad magic");
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) corrupt(path, "unsupported version " + std::to_string(version));

    const std::uint64_t meta_len = get_u64(is);
    if (!is || meta_len > (1ull << 30)) corrupt(path, "bad metadata length");
    std::string meta(meta_len, '\0');
    is.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!is) corrupt(path, "truncated metadata");

    Checkpoint ckpt;
    try {
        ckpt.metadata = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        corrupt(path, std::string("metadata is not valid JSON: ") + e.what());
    }

    const std::uint32_t count = get_u32(is);
    if (!is || count > (1u << 20)) corrupt(path, "bad tensor count");
    ckpt.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = get_u32(is);
        if (!is || name_len > (1u << 16)) corrupt(path, "bad tensor name length");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const std::uint64_t rows = get_u64(is);
        const std::uint64_t cols = get_u64(is);
        if (!is || rows > (1u << 24) || cols > (1u << 24)) corrupt(path, "bad tensor shape");
        Tensor2 t(static_cast<int>(rows), static_cast<int>(cols));
        for (auto& x : t.v) x = get_f64(is);
        if (!is) corrupt(path, "truncated payload in tensor '" + name + "'");
        ckpt.tensors.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

}  // namespace gsemtmo
