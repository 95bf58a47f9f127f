#include "assetlens/nn/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "assetlens/common/error.hpp"

namespace assetlens::nn {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
        i += 3;
    }
    const std::size_t rem = bytes.size() - i;
    if (rem == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rem == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = b64_value(c);
        if (v < 0) throw InputError("invalid base64 character in model file");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string encode_doubles(const std::vector<double>& values) {
    std::vector<std::uint8_t> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t u;
        std::memcpy(&u, &values[i], 8);
        for (int b = 0; b < 8; ++b)
            bytes[i * 8 + b] = static_cast<std::uint8_t>((u >> (8 * b)) & 0xff);
    }
    return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
    const auto bytes = base64_decode(text);
    if (bytes.size() % 8 != 0)
        throw InputError("model array byte length is not a multiple of 8");
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b)
            u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        std::memcpy(&values[i], &u, 8);
    }
    return values;
}

nlohmann::json tensor_to_json(const Tensor& t) {
    nlohmann::json j;
    j["shape"] = t.shape;
    j["data"] = encode_doubles(t.data);
    return j;
}

Tensor tensor_from_json(const nlohmann::json& j) {
    std::vector<std::size_t> shape = j.at("shape").get<std::vector<std::size_t>>();
    std::vector<double> data = decode_doubles(j.at("data").get<std::string>());
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace

std::string network_to_json(const Network& net) {
    nlohmann::json j;
    j["format"] = "assetlens-net";
    j["version"] = 1;
    j["input_shape"] = net.spec.input_shape;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
        const LayerSpec& l = net.spec.layers[li];
        nlohmann::json jl;
        jl["kind"] = to_string(l.kind);
        switch (l.kind) {
            case LayerKind::Conv:
                jl["in_channels"] = l.in_channels;
                jl["out_channels"] = l.out_channels;
                jl["kernel"] = l.kernel;
                jl["stride"] = l.stride;
                jl["pad"] = l.pad;
                break;
            case LayerKind::Fc:
                jl["in_dim"] = l.in_dim;
                jl["out_dim"] = l.out_dim;
                break;
            case LayerKind::Dropout:
                jl["p"] = l.dropout_p;
                break;
            case LayerKind::Relu:
                break;
        }
        const LayerState& st = net.layers[li];
        if (l.has_params()) {
            jl["decay_multiplier"] = st.decay_multiplier;
            jl["weights"] = tensor_to_json(st.weights);
            jl["bias"] = tensor_to_json(st.bias);
            jl["w_momentum"] = tensor_to_json(st.w_momentum);
            jl["b_momentum"] = tensor_to_json(st.b_momentum);
        }
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump(2);
}

Network network_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file is not valid json: ") + e.what());
    }
    if (j.value("format", "") != "assetlens-net")
        throw InputError("not an assetlens network file");
    if (j.value("version", 0) != 1)
        throw InputError("unsupported network file version");

    Network net;
    net.spec.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    for (const auto& jl : j.at("layers")) {
        const LayerKind kind = layer_kind_from_string(jl.at("kind").get<std::string>());
        LayerSpec l;
        switch (kind) {
            case LayerKind::Conv:
                l = LayerSpec::conv(jl.at("in_channels"), jl.at("out_channels"),
                                    jl.at("kernel"), jl.at("stride"), jl.at("pad"));
                break;
            case LayerKind::Fc:
                l = LayerSpec::fc(jl.at("in_dim"), jl.at("out_dim"));
                break;
            case LayerKind::Dropout:
                l = LayerSpec::dropout(jl.at("p"));
                break;
            case LayerKind::Relu:
                l = LayerSpec::relu();
                break;
        }
        net.spec.layers.push_back(l);
        LayerState st;
        if (l.has_params()) {
            st.decay_multiplier = jl.at("decay_multiplier").get<double>();
            st.weights = tensor_from_json(jl.at("weights"));
            st.bias = tensor_from_json(jl.at("bias"));
            st.w_momentum = tensor_from_json(jl.at("w_momentum"));
            st.b_momentum = tensor_from_json(jl.at("b_momentum"));
            if (!st.weights.same_shape(st.w_momentum) || !st.bias.same_shape(st.b_momentum))
                throw InputError("momentum buffer shape mismatch in model file");
        }
        net.layers.push_back(std::move(st));
    }
    validate_chain(net.spec);
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path);
    out << network_to_json(net) << '\n';
    if (!out) throw IoError("failed writing model file: " + path);
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return network_from_json(buf.str());
}

}  // namespace assetlens::nn
