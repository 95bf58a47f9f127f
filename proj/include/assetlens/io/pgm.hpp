#pragma once

#include <string>

#include "assetlens/nn/tensor.hpp"

namespace assetlens::io {

// 8-bit binary PGM (P5). Tensors are single-channel (1,h,w) or (h,w) with
// pixel values 0..255; values are clamped and rounded on write.
void write_pgm(const std::string& path, const nn::Tensor& image);
nn::Tensor read_pgm(const std::string& path);  // returns (1,h,w)

}  // namespace assetlens::io
