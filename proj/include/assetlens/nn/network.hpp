#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "assetlens/common/rng.hpp"
#include "assetlens/nn/tensor.hpp"

namespace assetlens::nn {

enum class LayerKind { Conv, Fc, Relu, Dropout };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;

    // Conv fields.
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t pad = 0;

    // Fc fields.
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;

    // Dropout field.
    double dropout_p = 0.0;

    static LayerSpec conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                          std::size_t stride = 1, std::size_t pad = 0);
    static LayerSpec fc(std::size_t in_dim, std::size_t out_dim);
    static LayerSpec relu();
    static LayerSpec dropout(double p);

    bool has_params() const { return kind == LayerKind::Conv || kind == LayerKind::Fc; }
};

// Layer chain plus the input extents it consumes. The input is either
// spatial {channels, height, width} or flat {dim}.
struct NetworkSpec {
    std::vector<std::size_t> input_shape;
    std::vector<LayerSpec> layers;
};

// Per-layer learnable state. Weight and momentum tensors are shape-identical
// pairwise; non-parameterized layers hold empty tensors.
struct LayerState {
    Tensor weights;     // conv: (out,in,k,k); fc: (out,in)
    Tensor bias;        // (out)
    Tensor w_momentum;
    Tensor b_momentum;
    double decay_multiplier = 1.0;  // d_l
};

struct Network {
    NetworkSpec spec;
    std::vector<LayerState> layers;

    std::size_t output_dim() const;
    std::size_t parameter_count() const;
};

// Walks the spec chain and returns the per-layer output shapes
// (index 0 = input shape). Throws ConfigError on an inconsistent chain.
std::vector<std::vector<std::size_t>> validate_chain(const NetworkSpec& spec);

// Fresh fc layers are drawn N(0, 0.005^2), matching the published recipe for
// the fully connected layers trained from scratch. Conv layers stand in for
// pre-learnt feature extractors and get a fan-in-scaled std sqrt(2/fan_in);
// a 0.005 conv init cannot propagate signal through the stack. Biases start
// at zero.
inline constexpr double kFcInitStd = 0.005;

Network init_network(const NetworkSpec& spec, std::uint64_t seed);

// Activations recorded during a forward pass: acts[0] is the input batch,
// acts[i+1] the output of layer i. Dropout masks are kept for backward.
struct ForwardCache {
    std::vector<Tensor> acts;
    std::vector<Tensor> dropout_masks;  // parallel to layers; empty when unused
};

// Forward over a batch. Input shape (B, ...input_shape). Dropout fires only
// when `training` is set and an rng is supplied.
Tensor forward(const Network& net, const Tensor& batch, bool training = false,
               Rng* rng = nullptr);
Tensor forward_cached(const Network& net, const Tensor& batch, ForwardCache& cache,
                      bool training = false, Rng* rng = nullptr);

struct Gradients {
    std::vector<Tensor> weights;  // parallel to net.layers
    std::vector<Tensor> bias;
};

// Backpropagates d(loss)/d(output) through the cached activations and
// returns data-loss gradients for every parameterized layer.
Gradients backward(const Network& net, const ForwardCache& cache,
                   const Tensor& output_grad);

// Default desk-scale architecture: three stride-2 3x3 conv+relu blocks, then
// fc -> relu [-> dropout] -> fc. image_size must be divisible by 8.
NetworkSpec micro_net_spec(std::size_t image_size = 64, std::size_t out_dim = 16,
                           std::size_t feature_width = 128, double dropout_p = 0.0);

// Index of the final fc layer; its input activation is the feature interface.
// Throws ConfigError when the network has no hidden fc layer in front of it.
std::size_t penultimate_feature_layer(const Network& net);

}  // namespace assetlens::nn
