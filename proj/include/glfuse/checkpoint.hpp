#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "glfuse/model.hpp"

namespace glfuse {

// Bit-exact binary encoding of a ChainState (native little-endian doubles).
std::string serialize_state(const ChainState& s);
ChainState deserialize_state(std::string_view bytes);

// FNV-1a over the raw bytes of y and v; ties a checkpoint to its panel.
std::uint64_t panel_fingerprint(const SourcePanel& panel);

}  // namespace glfuse
