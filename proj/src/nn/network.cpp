#include "assetlens/nn/network.hpp"

#include <cmath>

#include "assetlens/common/error.hpp"

namespace assetlens::nn {

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Conv: return "conv";
        case LayerKind::Fc: return "fc";
        case LayerKind::Relu: return "relu";
        case LayerKind::Dropout: return "dropout";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "conv") return LayerKind::Conv;
    if (s == "fc") return LayerKind::Fc;
    if (s == "relu") return LayerKind::Relu;
    if (s == "dropout") return LayerKind::Dropout;
    throw ConfigError("unknown layer kind: " + s);
}

LayerSpec LayerSpec::conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                          std::size_t stride, std::size_t pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.in_channels = in_ch;
    s.out_channels = out_ch;
    s.kernel = kernel;
    s.stride = stride;
    s.pad = pad;
    return s;
}

LayerSpec LayerSpec::fc(std::size_t in_dim, std::size_t out_dim) {
    LayerSpec s;
    s.kind = LayerKind::Fc;
    s.in_dim = in_dim;
    s.out_dim = out_dim;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::Relu;
    return s;
}

LayerSpec LayerSpec::dropout(double p) {
    LayerSpec s;
    s.kind = LayerKind::Dropout;
    s.dropout_p = p;
    return s;
}

static std::size_t flat_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::vector<std::vector<std::size_t>> validate_chain(const NetworkSpec& spec) {
    if (spec.input_shape.empty())
        throw ConfigError("network input shape is empty");
    std::vector<std::vector<std::size_t>> shapes;
    shapes.push_back(spec.input_shape);
    std::vector<std::size_t> cur = spec.input_shape;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& l = spec.layers[li];
        const std::string where = "layer " + std::to_string(li);
        switch (l.kind) {
            case LayerKind::Conv: {
                if (cur.size() != 3)
                    throw ConfigError(where + ": conv needs a (c,h,w) input, got rank " +
                                      std::to_string(cur.size()));
                if (l.in_channels != cur[0])
                    throw ConfigError(where + ": conv in_channels " +
                                      std::to_string(l.in_channels) + " != input channels " +
                                      std::to_string(cur[0]));
                if (l.kernel == 0 || l.stride == 0)
                    throw ConfigError(where + ": conv kernel/stride must be positive");
                if (l.kernel > cur[1] || l.kernel > cur[2])
                    throw ConfigError(where + ": conv kernel exceeds input extents");
                const std::size_t h = (cur[1] + 2 * l.pad - l.kernel) / l.stride + 1;
                const std::size_t w = (cur[2] + 2 * l.pad - l.kernel) / l.stride + 1;
                cur = {l.out_channels, h, w};
                break;
            }
            case LayerKind::Fc: {
                if (flat_size(cur) != l.in_dim)
                    throw ConfigError(where + ": fc in_dim " + std::to_string(l.in_dim) +
                                      " != flattened input size " +
                                      std::to_string(flat_size(cur)));
                cur = {l.out_dim};
                break;
            }
            case LayerKind::Relu:
                break;
            case LayerKind::Dropout:
                if (!(l.dropout_p >= 0.0 && l.dropout_p < 1.0))
                    throw ConfigError(where + ": dropout probability must be in [0,1)");
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

std::size_t Network::output_dim() const {
    auto shapes = validate_chain(spec);
    return flat_size(shapes.back());
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

Network init_network(const NetworkSpec& spec, std::uint64_t seed) {
    validate_chain(spec);
    Network net;
    net.spec = spec;
    net.layers.resize(spec.layers.size());
    Rng rng(derive_seed(seed, "init"));
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& l = spec.layers[li];
        LayerState& st = net.layers[li];
        double std_dev = kFcInitStd;
        if (l.kind == LayerKind::Conv) {
            st.weights = Tensor({l.out_channels, l.in_channels, l.kernel, l.kernel});
            st.bias = Tensor({l.out_channels});
            std_dev = std::sqrt(2.0 / static_cast<double>(l.in_channels * l.kernel * l.kernel));
        } else if (l.kind == LayerKind::Fc) {
            st.weights = Tensor({l.out_dim, l.in_dim});
            st.bias = Tensor({l.out_dim});
        } else {
            continue;
        }
        for (double& w : st.weights.data) w = rng.next_gaussian(0.0, std_dev);
        st.w_momentum = Tensor(st.weights.shape);
        st.b_momentum = Tensor(st.bias.shape);
    }
    return net;
}

namespace {

void conv_forward(const LayerSpec& l, const LayerState& st, const Tensor& in,
                  Tensor& out, std::size_t batch, std::size_t ih, std::size_t iw,
                  std::size_t oh, std::size_t ow) {
    const std::size_t cin = l.in_channels, cout = l.out_channels, k = l.kernel;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = in.data.data() + b * cin * ih * iw;
        double* yb = out.data.data() + b * cout * oh * ow;
        for (std::size_t co = 0; co < cout; ++co) {
            const double* wc = st.weights.data.data() + co * cin * k * k;
            const double bias = st.bias[co];
            for (std::size_t i = 0; i < oh; ++i) {
                for (std::size_t j = 0; j < ow; ++j) {
                    double acc = bias;
                    const std::ptrdiff_t y0 =
                        static_cast<std::ptrdiff_t>(i * l.stride) - static_cast<std::ptrdiff_t>(l.pad);
                    const std::ptrdiff_t x0 =
                        static_cast<std::ptrdiff_t>(j * l.stride) - static_cast<std::ptrdiff_t>(l.pad);
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double* xc = xb + ci * ih * iw;
                        const double* wk = wc + ci * k * k;
                        for (std::size_t u = 0; u < k; ++u) {
                            const std::ptrdiff_t yy = y0 + static_cast<std::ptrdiff_t>(u);
                            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(ih)) continue;
                            for (std::size_t v = 0; v < k; ++v) {
                                const std::ptrdiff_t xx = x0 + static_cast<std::ptrdiff_t>(v);
                                if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(iw)) continue;
                                acc += wk[u * k + v] * xc[yy * static_cast<std::ptrdiff_t>(iw) + xx];
                            }
                        }
                    }
                    yb[co * oh * ow + i * ow + j] = acc;
                }
            }
        }
    }
}

void conv_backward(const LayerSpec& l, const LayerState& st, const Tensor& in,
                   const Tensor& dout, Tensor& dw, Tensor& db, Tensor& din,
                   std::size_t batch, std::size_t ih, std::size_t iw, std::size_t oh,
                   std::size_t ow) {
    const std::size_t cin = l.in_channels, cout = l.out_channels, k = l.kernel;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = in.data.data() + b * cin * ih * iw;
        const double* gb = dout.data.data() + b * cout * oh * ow;
        double* dxb = din.data.data() + b * cin * ih * iw;
        for (std::size_t co = 0; co < cout; ++co) {
            double* dwc = dw.data.data() + co * cin * k * k;
            const double* wc = st.weights.data.data() + co * cin * k * k;
            for (std::size_t i = 0; i < oh; ++i) {
                for (std::size_t j = 0; j < ow; ++j) {
                    const double g = gb[co * oh * ow + i * ow + j];
                    if (g == 0.0) continue;
                    db[co] += g;
                    const std::ptrdiff_t y0 =
                        static_cast<std::ptrdiff_t>(i * l.stride) - static_cast<std::ptrdiff_t>(l.pad);
                    const std::ptrdiff_t x0 =
                        static_cast<std::ptrdiff_t>(j * l.stride) - static_cast<std::ptrdiff_t>(l.pad);
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double* xc = xb + ci * ih * iw;
                        double* dxc = dxb + ci * ih * iw;
                        double* dwk = dwc + ci * k * k;
                        const double* wk = wc + ci * k * k;
                        for (std::size_t u = 0; u < k; ++u) {
                            const std::ptrdiff_t yy = y0 + static_cast<std::ptrdiff_t>(u);
                            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(ih)) continue;
                            for (std::size_t v = 0; v < k; ++v) {
                                const std::ptrdiff_t xx = x0 + static_cast<std::ptrdiff_t>(v);
                                if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(iw)) continue;
                                const std::size_t xi =
                                    static_cast<std::size_t>(yy) * iw + static_cast<std::size_t>(xx);
                                dwk[u * k + v] += g * xc[xi];
                                dxc[xi] += g * wk[u * k + v];
                            }
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor forward_cached(const Network& net, const Tensor& batch, ForwardCache& cache,
                      bool training, Rng* rng) {
    const auto shapes = validate_chain(net.spec);
    if (batch.shape.size() != net.spec.input_shape.size() + 1)
        throw InputError("batch rank " + std::to_string(batch.shape.size()) +
                         " does not match network input rank+1");
    for (std::size_t i = 0; i < net.spec.input_shape.size(); ++i)
        if (batch.shape[i + 1] != net.spec.input_shape[i])
            throw InputError("batch shape " + batch.shape_str() +
                             " does not match network input shape");
    const std::size_t nb = batch.shape[0];

    cache.acts.clear();
    cache.dropout_masks.assign(net.spec.layers.size(), Tensor{});
    cache.acts.push_back(batch);

    for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
        const LayerSpec& l = net.spec.layers[li];
        const Tensor& in = cache.acts.back();
        const auto& out_shape = shapes[li + 1];
        switch (l.kind) {
            case LayerKind::Conv: {
                std::vector<std::size_t> os = {nb};
                os.insert(os.end(), out_shape.begin(), out_shape.end());
                Tensor out(os);
                conv_forward(l, net.layers[li], in, out, nb, shapes[li][1], shapes[li][2],
                             out_shape[1], out_shape[2]);
                cache.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::Fc: {
                Tensor out({nb, l.out_dim});
                const LayerState& st = net.layers[li];
                for (std::size_t b = 0; b < nb; ++b) {
                    const double* xb = in.data.data() + b * l.in_dim;
                    double* yb = out.data.data() + b * l.out_dim;
                    for (std::size_t o = 0; o < l.out_dim; ++o) {
                        const double* wr = st.weights.data.data() + o * l.in_dim;
                        double acc = st.bias[o];
                        for (std::size_t ii = 0; ii < l.in_dim; ++ii) acc += wr[ii] * xb[ii];
                        yb[o] = acc;
                    }
                }
                cache.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::Relu: {
                Tensor out = in;
                for (double& v : out.data) v = v > 0.0 ? v : 0.0;
                cache.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::Dropout: {
                Tensor out = in;
                if (training && rng != nullptr && l.dropout_p > 0.0) {
                    // Inverted dropout: the kept units are scaled by 1/(1-p)
                    // so evaluation mode is the identity.
                    Tensor mask(in.shape);
                    const double keep = 1.0 - l.dropout_p;
                    for (std::size_t i = 0; i < mask.size(); ++i)
                        mask[i] = rng->next_double() < keep ? 1.0 / keep : 0.0;
                    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
                    cache.dropout_masks[li] = std::move(mask);
                }
                cache.acts.push_back(std::move(out));
                break;
            }
        }
    }
    return cache.acts.back();
}

Tensor forward(const Network& net, const Tensor& batch, bool training, Rng* rng) {
    ForwardCache cache;
    return forward_cached(net, batch, cache, training, rng);
}

Gradients backward(const Network& net, const ForwardCache& cache,
                   const Tensor& output_grad) {
    const auto shapes = validate_chain(net.spec);
    const std::size_t nl = net.spec.layers.size();
    if (cache.acts.size() != nl + 1)
        throw InputError("forward cache does not match network depth");
    if (!output_grad.same_shape(cache.acts.back()))
        throw InputError("output gradient shape mismatch");
    const std::size_t nb = cache.acts[0].shape[0];

    Gradients grads;
    grads.weights.resize(nl);
    grads.bias.resize(nl);

    Tensor delta = output_grad;
    for (std::size_t ri = nl; ri-- > 0;) {
        const LayerSpec& l = net.spec.layers[ri];
        const Tensor& in = cache.acts[ri];
        switch (l.kind) {
            case LayerKind::Conv: {
                grads.weights[ri] = Tensor(net.layers[ri].weights.shape);
                grads.bias[ri] = Tensor(net.layers[ri].bias.shape);
                Tensor din(in.shape);
                conv_backward(l, net.layers[ri], in, delta, grads.weights[ri],
                              grads.bias[ri], din, nb, shapes[ri][1], shapes[ri][2],
                              shapes[ri + 1][1], shapes[ri + 1][2]);
                delta = std::move(din);
                break;
            }
            case LayerKind::Fc: {
                const LayerState& st = net.layers[ri];
                grads.weights[ri] = Tensor(st.weights.shape);
                grads.bias[ri] = Tensor(st.bias.shape);
                Tensor din(in.shape);
                for (std::size_t b = 0; b < nb; ++b) {
                    const double* xb = in.data.data() + b * l.in_dim;
                    const double* gb = delta.data.data() + b * l.out_dim;
                    double* dxb = din.data.data() + b * l.in_dim;
                    for (std::size_t o = 0; o < l.out_dim; ++o) {
                        const double g = gb[o];
                        grads.bias[ri][o] += g;
                        double* dwr = grads.weights[ri].data.data() + o * l.in_dim;
                        const double* wr = st.weights.data.data() + o * l.in_dim;
                        for (std::size_t ii = 0; ii < l.in_dim; ++ii) {
                            dwr[ii] += g * xb[ii];
                            dxb[ii] += g * wr[ii];
                        }
                    }
                }
                delta = std::move(din);
                break;
            }
            case LayerKind::Relu: {
                Tensor din = delta;
                for (std::size_t i = 0; i < din.size(); ++i)
                    if (in[i] <= 0.0) din[i] = 0.0;
                delta = std::move(din);
                break;
            }
            case LayerKind::Dropout: {
                if (cache.dropout_masks[ri].size() > 0) {
                    Tensor din = delta;
                    const Tensor& mask = cache.dropout_masks[ri];
                    for (std::size_t i = 0; i < din.size(); ++i) din[i] *= mask[i];
                    delta = std::move(din);
                }
                break;
            }
        }
    }
    return grads;
}

NetworkSpec micro_net_spec(std::size_t image_size, std::size_t out_dim,
                           std::size_t feature_width, double dropout_p) {
    if (image_size % 8 != 0 || image_size < 8)
        throw ConfigError("micro net image size must be a positive multiple of 8");
    NetworkSpec spec;
    spec.input_shape = {1, image_size, image_size};
    spec.layers.push_back(LayerSpec::conv(1, 8, 3, 2, 1));
    spec.layers.push_back(LayerSpec::relu());
    spec.layers.push_back(LayerSpec::conv(8, 16, 3, 2, 1));
    spec.layers.push_back(LayerSpec::relu());
    spec.layers.push_back(LayerSpec::conv(16, 32, 3, 2, 1));
    spec.layers.push_back(LayerSpec::relu());
    const std::size_t s8 = image_size / 8;
    spec.layers.push_back(LayerSpec::fc(32 * s8 * s8, feature_width));
    spec.layers.push_back(LayerSpec::relu());
    if (dropout_p > 0.0) spec.layers.push_back(LayerSpec::dropout(dropout_p));
    spec.layers.push_back(LayerSpec::fc(feature_width, out_dim));
    return spec;
}

std::size_t penultimate_feature_layer(const Network& net) {
    std::size_t fc_count = 0;
    std::size_t last_fc = 0;
    for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
        if (net.spec.layers[li].kind == LayerKind::Fc) {
            ++fc_count;
            last_fc = li;
        }
    }
    if (fc_count < 2)
        throw ConfigError("network has no penultimate fc layer to extract features from");
    return last_fc;
}

}  // namespace assetlens::nn
