#ifndef PESVLAB_SERIALIZATION_HPP
#define PESVLAB_SERIALIZATION_HPP

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "activation.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "network.hpp"

namespace pesvlab {

/// A network together with the activation it is evaluated with.
struct Model {
    NetParams params;
    Activation activation = Activation::relu();
};

/// Thrown for unreadable or malformed model documents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] inline nlohmann::json activation_to_json(const Activation& act)
{
    nlohmann::json j;
    j["kind"] = act.name();
    j["L_sigma"] = act.lipschitz();
    j["sigma0"] = act.at_zero();
    if (act.kind() == ActivationKind::leaky_relu) {
        j["alpha"] = act.alpha();
    }
    if (act.shift() != 0.0) {
        j["shift"] = act.shift();
    }
    if (act.kind() == ActivationKind::tabulated) {
        j["grid"] = act.grid();
        j["values"] = act.values();
        j["differentiable"] = act.differentiable();
    }
    return j;
}

[[nodiscard]] inline Activation activation_from_json(const nlohmann::json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    Activation act = Activation::relu();
    if (kind == "relu") {
        act = Activation::relu();
    } else if (kind == "identity") {
        act = Activation::identity();
    } else if (kind == "leaky-relu") {
        act = Activation::leaky_relu(j.at("alpha").get<double>());
    } else if (kind == "tabulated") {
        act = Activation::tabulated(j.at("grid").get<std::vector<double>>(), j.at("values").get<std::vector<double>>(),
                                    j.value("differentiable", true));
    } else {
        throw FormatError("unknown activation kind '" + kind + "'");
    }
    if (j.contains("shift")) {
        act = act.shifted(j.at("shift").get<double>());
    }
    return act;
}

/// {depth, input_dim, widths, activation{kind, L_sigma, sigma0, ...}, layers: [row-major arrays]}
[[nodiscard]] inline nlohmann::json model_to_json(const Model& model)
{
    nlohmann::json j;
    j["depth"] = model.params.depth();
    j["input_dim"] = model.params.input_dim();
    j["widths"] = model.params.widths().widths();
    j["activation"] = activation_to_json(model.activation);
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& m : model.params.layers()) {
        layers.push_back(std::vector<double>(m.data().begin(), m.data().end()));
    }
    j["layers"] = std::move(layers);
    return j;
}

[[nodiscard]] inline Model model_from_json(const nlohmann::json& j)
{
    try {
        const auto depth = j.at("depth").get<std::size_t>();
        const auto d = j.at("input_dim").get<std::size_t>();
        const auto widths = j.at("widths").get<std::vector<std::size_t>>();
        const auto& layers_j = j.at("layers");
        if (widths.size() + 1 != depth || layers_j.size() != depth) {
            throw FormatError("depth does not match widths/layers");
        }
        std::vector<Matrix> layers;
        std::size_t cols = d + 1;
        for (std::size_t l = 0; l < depth; ++l) {
            const std::size_t rows = l + 1 < depth ? widths[l] : 1;
            layers.emplace_back(rows, cols, layers_j[l].get<std::vector<double>>());
            cols = rows;
        }
        return Model{NetParams(d, std::move(layers)), activation_from_json(j.at("activation"))};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model document: ") + e.what());
    } catch (const ShapeError& e) {
        throw FormatError(std::string("inconsistent model document: ") + e.what());
    }
}

[[nodiscard]] inline std::string serialize_model(const Model& model) { return model_to_json(model).dump(2) + "\n"; }

[[nodiscard]] inline Model deserialize_model(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("model document is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

inline void save_model(const Model& model, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::ios_base::failure("cannot open '" + path + "' for writing");
    }
    out << serialize_model(model);
    if (!out) {
        throw std::ios_base::failure("write to '" + path + "' failed");
    }
}

[[nodiscard]] inline Model load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

/// Stable fingerprint of a model's serialized form.
[[nodiscard]] inline std::string model_hash(const Model& model) { return hex64(fnv1a(serialize_model(model))); }

} // namespace pesvlab

#endif // PESVLAB_SERIALIZATION_HPP
