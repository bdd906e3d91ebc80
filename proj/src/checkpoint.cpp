#include "gppx/errors.hpp"
#include "gppx/grid_io.hpp"
#include "gppx/vae.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace gppx::vae {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "gppx-vae-checkpoint";
constexpr int kFormatVersion = 1;

json describe(const char* name, const nn::Mlp& net) {
    json layers = json::array();
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        layers.push_back({{"in_dim", net.layers()[l].in_dim()},
                          {"out_dim", net.layers()[l].out_dim()},
                          {"activation", nn::to_string(net.specs()[l].activation)},
                          {"dropout", net.specs()[l].dropout}});
    }
    return {{"name", name}, {"in_dim", net.in_dim()}, {"layers", layers}};
}

template <typename T>
T field(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key)) throw FormatError(fmt::format("checkpoint {}: missing field '{}'", where, key));
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(fmt::format("checkpoint {}: field '{}' has the wrong type", where, key));
    }
}

}  // namespace

void save_checkpoint(const VaeModel& model, const CheckpointMeta& meta, const std::filesystem::path& stem) {
    const Architecture& arch = model.architecture();
    json doc;
    doc["format"] = kFormatTag;
    doc["version"] = kFormatVersion;
    doc["architecture"] = {{"window", arch.window},
                           {"hidden", arch.hidden},
                           {"latent_dim", arch.latent_dim},
                           {"dropout", arch.dropout},
                           {"beta", arch.beta},
                           {"recon_reduction", to_string(arch.recon_reduction)}};
    doc["networks"] = json::array({describe("encoder", model.encoder()), describe("mu_head", model.mu_head()),
                                   describe("log_var_head", model.log_var_head()),
                                   describe("decoder", model.decoder())});
    doc["norm"] = {{"x_min", model.norm.x_min}, {"x_max", model.norm.x_max}};
    doc["seed"] = meta.seed;
    doc["epoch"] = meta.epoch;
    doc["parameter_count"] = model.parameter_count();
    doc["parameter_layout"] =
        "networks in listed order; per layer the weight matrix [out_dim x in_dim] column-major, then the bias";
    doc["payload"] = payload_path(stem).filename().string();
    write_text(header_path(stem), doc.dump(2) + "\n");

    std::vector<double> flat;
    flat.reserve(model.parameter_count());
    for (const auto& block : model.parameters()) flat.insert(flat.end(), block.begin(), block.end());
    write_f64_le(payload_path(stem), flat);
}

VaeModel load_checkpoint(const std::filesystem::path& stem, CheckpointMeta* meta) {
    const auto manifest_path = header_path(stem);
    json doc;
    try {
        doc = json::parse(read_text(manifest_path));
    } catch (const json::parse_error& e) {
        throw FormatError(fmt::format("checkpoint {}: {}", manifest_path.string(), e.what()));
    }
    const std::string where = manifest_path.string();
    if (field<std::string>(doc, "format", where) != kFormatTag) {
        throw FormatError(fmt::format("checkpoint {}: not a VAE checkpoint", where));
    }
    if (field<int>(doc, "version", where) != kFormatVersion) {
        throw FormatError(fmt::format("checkpoint {}: unsupported version", where));
    }
    const json arch_doc = field<json>(doc, "architecture", where);
    Architecture arch;
    arch.window = field<std::size_t>(arch_doc, "window", where);
    arch.hidden = field<std::vector<std::size_t>>(arch_doc, "hidden", where);
    arch.latent_dim = field<std::size_t>(arch_doc, "latent_dim", where);
    arch.dropout = field<double>(arch_doc, "dropout", where);
    arch.beta = field<double>(arch_doc, "beta", where);
    try {
        arch.recon_reduction = parse_recon_reduction(field<std::string>(arch_doc, "recon_reduction", where));
    } catch (const ConfigError& e) {
        throw FormatError(fmt::format("checkpoint {}: {}", where, e.what()));
    }

    VaeModel model(arch);
    const json networks = field<json>(doc, "networks", where);
    const json expected = json::array({describe("encoder", model.encoder()), describe("mu_head", model.mu_head()),
                                       describe("log_var_head", model.log_var_head()),
                                       describe("decoder", model.decoder())});
    if (networks != expected) {
        throw FormatError(fmt::format("checkpoint {}: network layout disagrees with its architecture block", where));
    }
    const json norm = field<json>(doc, "norm", where);
    model.norm.x_min = field<double>(norm, "x_min", where);
    model.norm.x_max = field<double>(norm, "x_max", where);

    const std::vector<double> flat = read_f64_le(payload_path(stem));
    if (flat.size() != model.parameter_count()) {
        throw ShapeError(fmt::format("checkpoint payload holds {} values, model needs {}", flat.size(),
                                     model.parameter_count()));
    }
    std::size_t offset = 0;
    for (auto block : model.parameters()) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), block.size(), block.begin());
        offset += block.size();
    }
    if (meta) {
        meta->seed = field<std::uint64_t>(doc, "seed", where);
        meta->epoch = field<std::size_t>(doc, "epoch", where);
    }
    return model;
}

}  // namespace gppx::vae
