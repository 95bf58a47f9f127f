#pragma once

#include <string>

#include "assetlens/nn/network.hpp"

namespace assetlens::nn {

// Versioned JSON container: layer specs plus base64-encoded little-endian
// double arrays for weights, biases and momentum buffers. Round-trips are
// bit-exact.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace assetlens::nn
