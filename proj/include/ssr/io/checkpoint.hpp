#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "ssr/io/mrtx.hpp"
#include "ssr/model/weights.hpp"

namespace ssr::io {

// Checkpoint = manifest.json (model config, dtype, key list, key->file map)
// plus one MRTX tensor per weight key. Slashes in keys become "__" in file
// names.
inline std::string checkpoint_filename(const std::string& key) {
    std::string f = key;
    for (std::size_t p = f.find('/'); p != std::string::npos; p = f.find('/'))
        f.replace(p, 1, "__");
    return f + ".mrtx";
}

template <typename T>
void save_checkpoint(const std::string& dir, const model::ModelWeights<T>& w,
                     const model::ModelConfig& cfg) {
    std::filesystem::create_directories(dir);
    nlohmann::json files = nlohmann::json::object();
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& [key, tensor] : w.params) {
        std::string fname = checkpoint_filename(key);
        write_mrtx(dir + "/" + fname, tensor);
        files[key] = fname;
        keys.push_back(key);
    }
    nlohmann::json j{{"config", cfg.to_json()},
                     {"dtype", dtype_name(dtype_of<T>::value)},
                     {"keys", keys},
                     {"files", files}};
    std::ofstream f(dir + "/manifest.json");
    if (!f) throw IoError("cannot write checkpoint manifest in " + dir);
    f << j.dump(2) << "\n";
}

struct CheckpointInfo {
    model::ModelConfig config;
    DType dtype;
    std::map<std::string, std::string> files;
};

inline CheckpointInfo read_checkpoint_info(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw IoError("cannot read checkpoint manifest in " + dir);
    nlohmann::json j = nlohmann::json::parse(f, nullptr, true);
    CheckpointInfo info;
    info.config = model::ModelConfig::from_json(j.at("config"));
    info.dtype = dtype_from_name(j.at("dtype").get<std::string>());
    for (auto& [key, fname] : j.at("files").items())
        info.files[key] = fname.get<std::string>();
    return info;
}

template <typename T>
model::ModelWeights<T> load_checkpoint(const std::string& dir, const CheckpointInfo& info) {
    model::ModelWeights<T> w;
    for (const auto& [key, fname] : info.files)
        w.params.emplace(key, read_mrtx<T>(dir + "/" + fname));
    // completeness check against the config-derived key set
    for (const auto& spec : model::enumerate_weights(info.config)) {
        auto it = w.params.find(spec.key);
        if (it == w.params.end()) throw IoError("checkpoint missing weight key " + spec.key);
        if (it->second.dims() != spec.shape)
            throw IoError("checkpoint weight " + spec.key + " has wrong shape");
    }
    return w;
}

}  // namespace ssr::io
