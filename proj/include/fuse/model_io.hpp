#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuse/training.hpp"

namespace fuse {

inline constexpr int kModelFormatVersion = 1;

// JSON model file. Doubles are emitted in shortest round-trip form by the
// JSON library, so serialize/deserialize preserves every parameter bit.
inline nlohmann::json model_to_json(const TrainedModel& model) {
    const FuseParams& ps = model.params;
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["p"] = ps.p;
    j["q"] = ps.q;
    j["metric"] = metric_name(model.config.metric);
    j["eta"] = model.config.eta;
    j["params"] = {
        {"w1", ps.w1.data}, {"b1", ps.b1}, {"w2", ps.w2.data}, {"b2", ps.b2},
        {"w3", ps.w3.data}, {"b3", ps.b3}, {"wg", ps.wg},      {"bg", ps.bg},
        {"wl", ps.wl},      {"bl", ps.bl},
    };
    j["calibration"] = {{"q01", model.q01}, {"q99", model.q99}};
    j["rng_algorithm"] = Rng::kAlgorithm;
    j["seed"] = model.config.seed;
    j["config"] = {
        {"epochs", model.config.epochs},
        {"batch_size", model.config.batch_size},
        {"dsm_resamples", model.config.dsm_resamples},
        {"anchors_per_pair", model.config.anchors_per_pair},
        {"scheme", scheme_name(model.config.scheme)},
        {"hidden", model.config.hidden},
        {"lr", model.config.lr},
    };
    if (!model.warnings.empty()) j["warnings"] = model.warnings;
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kModelFormatVersion)
        throw data_error("model file: missing or unsupported format_version");

    TrainedModel model;
    const std::size_t p = j.at("p").get<std::size_t>();
    const std::size_t q = j.at("q").get<std::size_t>();
    model.params = FuseParams(p, q);
    const auto& ps = j.at("params");

    auto load_vec = [&](const char* key, std::vector<double>& dst, std::size_t expect) {
        auto v = ps.at(key).get<std::vector<double>>();
        if (v.size() != expect)
            throw data_error(std::string("model file: field '") + key + "' has wrong length");
        dst = std::move(v);
    };
    load_vec("w1", model.params.w1.data, q * p);
    load_vec("b1", model.params.b1, q);
    load_vec("w2", model.params.w2.data, q * q);
    load_vec("b2", model.params.b2, q);
    load_vec("w3", model.params.w3.data, q * q);
    load_vec("b3", model.params.b3, q);
    load_vec("wg", model.params.wg, q);
    load_vec("wl", model.params.wl, q);
    model.params.bg = ps.at("bg").get<double>();
    model.params.bl = ps.at("bl").get<double>();

    model.q01 = j.at("calibration").at("q01").get<double>();
    model.q99 = j.at("calibration").at("q99").get<double>();
    model.config.metric = metric_from_name(j.at("metric").get<std::string>());
    model.config.eta = j.at("eta").get<double>();
    model.config.seed = j.at("seed").get<std::uint64_t>();
    model.config.hidden = q;
    if (j.contains("config")) {
        const auto& c = j.at("config");
        model.config.epochs = c.value("epochs", model.config.epochs);
        model.config.batch_size = c.value("batch_size", model.config.batch_size);
        model.config.dsm_resamples = c.value("dsm_resamples", model.config.dsm_resamples);
        model.config.anchors_per_pair =
            c.value("anchors_per_pair", model.config.anchors_per_pair);
        if (c.contains("scheme"))
            model.config.scheme = scheme_from_name(c.at("scheme").get<std::string>());
        model.config.lr = c.value("lr", model.config.lr);
    }
    if (j.contains("warnings"))
        model.warnings = j.at("warnings").get<std::vector<std::string>>();

    if (!model.params.all_finite()) throw data_error("model file: non-finite parameter");
    return model;
}

inline void save_model(const std::string& path, const TrainedModel& model) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << model_to_json(model).dump(2) << "\n";
    if (!out) throw data_error("write failed for '" + path + "'");
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

}  // namespace fuse
