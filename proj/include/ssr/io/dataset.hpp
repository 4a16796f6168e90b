#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "ssr/io/mrtx.hpp"
#include "ssr/physics/sample.hpp"

namespace ssr::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Dataset directory layout:
//   <root>/manifest.json
//   <root>/coils.mrtx                      (MRI)
//   <root>/<split>/<idx>/{ref,y,x0}.mrtx
//   <root>/<split>/<idx>/mask.mrtx         (MRI)
// The manifest records the generation parameters; operators are
// reconstructed deterministically from the stored mask/views plus a fresh
// power-iteration normalization in the dataset dtype.
struct DatasetMeta {
    phys::Modality modality = phys::Modality::MRI;
    int size = 64;
    double rate = 4.0;
    std::uint64_t seed = 0;
    int n_coils = 4;
    int calib = 16;
    int views_full = 60;
    double noise_snr_db = 0.0;
    DType dtype = DType::f32;
    std::map<std::string, std::vector<int>> splits;

    phys::SimParams sim_params() const {
        phys::SimParams p;
        p.modality = modality;
        p.size = size;
        p.rate = rate;
        p.n_coils = n_coils;
        p.calib = calib;
        p.views_full = views_full;
        p.noise_snr_db = noise_snr_db;
        return p;
    }
};

inline std::uint64_t sample_seed(std::uint64_t dataset_seed, const std::string& split, int idx) {
    std::uint64_t tag = split == "train" ? 0 : (split == "val" ? 1 : 2);
    return mix_seed(dataset_seed, tag * 1000003ull + static_cast<std::uint64_t>(idx));
}

inline void write_manifest(const std::string& dir, const DatasetMeta& m) {
    json j{{"modality", phys::modality_name(m.modality)},
           {"size", m.size},
           {"rate", m.rate},
           {"seed", m.seed},
           {"coils", m.n_coils},
           {"calib", m.calib},
           {"views_full", m.views_full},
           {"noise_snr_db", m.noise_snr_db},
           {"dtype", dtype_name(m.dtype)},
           {"splits", m.splits}};
    std::ofstream f(dir + "/manifest.json");
    if (!f) throw IoError("cannot write manifest in " + dir);
    f << j.dump(2) << "\n";
}

inline DatasetMeta read_manifest(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw IoError("cannot read manifest in " + dir);
    json j = json::parse(f, nullptr, true);
    DatasetMeta m;
    m.modality = phys::modality_from_name(j.at("modality").get<std::string>());
    m.size = j.at("size").get<int>();
    m.rate = j.at("rate").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_coils = j.value("coils", 4);
    m.calib = j.value("calib", 16);
    m.views_full = j.value("views_full", 60);
    m.noise_snr_db = j.value("noise_snr_db", 0.0);
    m.dtype = dtype_from_name(j.value("dtype", std::string("f32")));
    for (auto& [k, v] : j.at("splits").items()) m.splits[k] = v.get<std::vector<int>>();
    return m;
}

template <typename T>
void write_sample(const std::string& dir, const phys::ReconSample<T>& s) {
    fs::create_directories(dir);
    write_mrtx(dir + "/ref.mrtx", s.ref);
    write_mrtx(dir + "/y.mrtx", s.y);
    write_mrtx(dir + "/x0.mrtx", s.x0);
    if (s.op.modality() == phys::Modality::MRI) {
        const auto& m = s.op.mask();
        Tensor<T> mask({m.H, m.W});
        for (std::size_t i = 0; i < mask.numel(); ++i) mask[i] = static_cast<T>(m.mask[i]);
        write_mrtx(dir + "/mask.mrtx", mask);
    }
}

template <typename T>
void simulate_dataset(const std::string& root, const DatasetMeta& meta_in,
                      const std::map<std::string, int>& counts) {
    DatasetMeta meta = meta_in;
    meta.splits.clear();
    fs::create_directories(root);
    phys::SimParams params = meta.sim_params();
    if (meta.modality == phys::Modality::MRI)
        write_mrtx(root + "/coils.mrtx", phys::gen_coils<T>(meta.size, meta.size, meta.n_coils));
    for (const auto& [split, count] : counts) {
        std::vector<int> ids;
        for (int i = 0; i < count; ++i) {
            auto s = phys::gen_sample<T>(params, sample_seed(meta.seed, split, i));
            write_sample(root + "/" + split + "/" + std::to_string(i), s);
            ids.push_back(i);
        }
        meta.splits[split] = ids;
    }
    write_manifest(root, meta);
}

template <typename T>
phys::ReconSample<T> load_sample(const std::string& root, const DatasetMeta& meta,
                                 const std::string& split, int idx) {
    std::string dir = root + "/" + split + "/" + std::to_string(idx);
    phys::ReconSample<T> s;
    s.ref = read_mrtx<T>(dir + "/ref.mrtx");
    s.y = read_mrtx<T>(dir + "/y.mrtx");
    s.x0 = read_mrtx<T>(dir + "/x0.mrtx");
    if (meta.modality == phys::Modality::MRI) {
        Tensor<T> mt = read_mrtx<T>(dir + "/mask.mrtx");
        phys::SamplingMask m;
        m.H = mt.dim(0);
        m.W = mt.dim(1);
        m.rate = meta.rate;
        m.calib = meta.calib;
        m.mask.resize(mt.numel());
        for (std::size_t i = 0; i < mt.numel(); ++i) m.mask[i] = mt[i] != T(0) ? 1 : 0;
        s.op = phys::ImagingOperator<T>::make_mri(std::move(m),
                                                  read_mrtx<T>(root + "/coils.mrtx"));
    } else {
        s.op = phys::ImagingOperator<T>::make_ct(meta.size, meta.size, meta.views_full,
                                                 phys::subsample_views(meta.views_full, meta.rate));
    }
    return s;
}

template <typename T>
std::vector<phys::ReconSample<T>> load_split(const std::string& root, const DatasetMeta& meta,
                                             const std::string& split) {
    auto it = meta.splits.find(split);
    if (it == meta.splits.end()) throw ArgumentError("dataset has no split named " + split);
    std::vector<phys::ReconSample<T>> out;
    out.reserve(it->second.size());
    for (int idx : it->second) out.push_back(load_sample<T>(root, meta, split, idx));
    return out;
}

}  // namespace ssr::io
