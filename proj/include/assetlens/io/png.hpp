#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace assetlens::io {

// Minimal deterministic PNG writer: 8-bit RGB, one IDAT chunk, no ancillary
// chunks, so identical pixels always produce identical bytes.
void write_png_rgb(const std::string& path, std::size_t width, std::size_t height,
                   const std::vector<std::uint8_t>& rgb);

}  // namespace assetlens::io
