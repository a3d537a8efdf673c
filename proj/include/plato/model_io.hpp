#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "plato/manifest.hpp"
#include "plato/model.hpp"
#include "plato/train.hpp"

namespace plato {

// Model artifact: model.json (architecture, seeds, numeric mode, M by
// reference) plus params.bin, the trainable blocks as little-endian float32
// in for_each_block order.
template <class Real>
void save_model_artifact(PlatoNet<Real>& net, const std::string& dir, std::uint64_t seed,
                         Precision precision, const std::string& m_ref_path,
                         const std::string& m_ref_checksum) {
    const auto& cfg = net.config();
    nlohmann::json j;
    j["kind"] = to_string(cfg.kind);
    j["d"] = cfg.d;
    j["c"] = cfg.c;
    j["h"] = cfg.h;
    j["rounds"] = cfg.mp.rounds;
    j["beta"] = cfg.mp.beta;
    j["sigma"] = to_string(cfg.mp.sigma);
    j["attention_hidden"] = cfg.mp.attention_hidden;
    j["b_layers"] = cfg.b_layers;
    j["b_hidden"] = cfg.b_hidden;
    j["total_layers"] = cfg.total_layers;
    j["f_hidden"] = cfg.f_hidden;
    j["activation"] = to_string(cfg.activation);
    j["seed"] = seed;
    j["precision"] = to_string(precision);
    j["param_count"] = net.count_trainable();
    if (!m_ref_path.empty()) {
        j["m_ref"] = {{"path", m_ref_path}, {"checksum", m_ref_checksum}};
    }
    std::ofstream manifest(dir + "/model.json");
    if (!manifest) {
        throw RuntimeFailure("cannot write " + dir + "/model.json");
    }
    manifest << j.dump(2) << "\n";

    const auto params = net.params_flat();
    std::vector<float> buf(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        buf[i] = static_cast<float>(params[i]);
    }
    std::ofstream bin(dir + "/params.bin", std::ios::binary);
    if (!bin) {
        throw RuntimeFailure("cannot write " + dir + "/params.bin");
    }
    bin.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

// Restores trained parameters into a freshly constructed net; the caller
// supplies the same frozen M and graph the artifact references.
template <class Real>
PlatoNet<Real> load_model_artifact(const std::string& dir, const Tensor2<double>& m,
                                   std::shared_ptr<const FeatureGraphCsr> graph,
                                   std::vector<int> row_of_feature) {
    std::ifstream in(dir + "/model.json");
    if (!in) {
        throw ValidationError("cannot open " + dir + "/model.json");
    }
    const nlohmann::json j = nlohmann::json::parse(in);
    typename PlatoNet<Real>::Config cfg;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "plato") cfg.kind = ModelKind::Plato;
    else if (kind == "plato-no-mp") cfg.kind = ModelKind::PlatoNoMp;
    else if (kind == "plato-lr") cfg.kind = ModelKind::PlatoLr;
    else if (kind == "mlp") cfg.kind = ModelKind::Mlp;
    else throw ValidationError("unknown model kind: " + kind);
    cfg.d = j.at("d").get<int>();
    cfg.c = j.at("c").get<int>();
    cfg.h = j.at("h").get<int>();
    cfg.mp.rounds = j.at("rounds").get<int>();
    cfg.mp.beta = j.at("beta").get<double>();
    cfg.mp.sigma = activation_from_string(j.at("sigma").get<std::string>());
    cfg.mp.attention_hidden = j.at("attention_hidden").get<int>();
    cfg.b_layers = j.at("b_layers").get<int>();
    cfg.b_hidden = j.at("b_hidden").get<int>();
    cfg.total_layers = j.at("total_layers").get<int>();
    cfg.f_hidden = j.at("f_hidden").get<int>();
    cfg.activation = activation_from_string(j.at("activation").get<std::string>());

    PlatoNet<Real> net(cfg, m, std::move(graph), std::move(row_of_feature),
                       j.at("seed").get<std::uint64_t>());

    std::ifstream bin(dir + "/params.bin", std::ios::binary | std::ios::ate);
    if (!bin) {
        throw ValidationError("cannot open " + dir + "/params.bin");
    }
    const auto bytes = static_cast<std::size_t>(bin.tellg());
    const std::size_t expected = j.at("param_count").get<std::size_t>();
    if (bytes != expected * sizeof(float)) {
        throw ValidationError(dir + "/params.bin does not match the declared parameter count");
    }
    bin.seekg(0);
    std::vector<float> buf(expected);
    bin.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    std::vector<Real> params(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        params[i] = static_cast<Real>(buf[i]);
    }
    net.set_params_flat(params);
    return net;
}

}  // namespace plato
