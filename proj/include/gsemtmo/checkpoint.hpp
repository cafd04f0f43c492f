#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsemtmo/tensor.hpp"

namespace gsemtmo {

// Single-file archive of named tensors plus a JSON metadata record
// (architecture dims, epoch, seed, ...). Payloads are little-endian f64
// regardless of host order.
struct Checkpoint {
    nlohmann::json metadata;
    std::vector<std::pair<std::string, Tensor2>> tensors;

    const Tensor2* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gsemtmo
