#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hipcap/numerics/param_store.hpp"

namespace hipcap {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint: a JSON manifest followed by every parameter array as
/// little-endian IEEE-754 doubles. See docs/checkpoint_format.md.
struct Checkpoint {
    std::string manifest;  // JSON text
    ParamStore params;
};

void write_checkpoint(std::ostream& out, const std::string& manifest, const ParamStore& params);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const std::string& manifest, const ParamStore& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hipcap
