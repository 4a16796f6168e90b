#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ssr/bench.hpp"
#include "ssr/io/checkpoint.hpp"
#include "ssr/io/csv.hpp"
#include "ssr/io/dataset.hpp"
#include "ssr/io/pgm.hpp"
#include "ssr/model/erf.hpp"
#include "ssr/train/ablate.hpp"
#include "ssr/train/loop.hpp"

namespace fs = std::filesystem;
using namespace ssr;

namespace {

using io::fmt_double;

nlohmann::json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    return nlohmann::json::parse(f, nullptr, true);
}

// Model config from file (optional) with dataset-dependent defaults: P from
// the modality, K = 5 for MRI / 3 for CT when unspecified.
model::ModelConfig resolve_model_config(const std::string& path, const io::DatasetMeta& meta) {
    nlohmann::json j = path.empty() ? nlohmann::json::object() : load_json(path);
    if (!j.contains("P")) j["P"] = meta.modality == phys::Modality::MRI ? 2 : 1;
    if (!j.contains("K")) j["K"] = meta.modality == phys::Modality::MRI ? 5 : 3;
    return model::ModelConfig::from_json(j);
}

struct SamplePath {
    std::string root;
    std::string split;
    int index = 0;
};

SamplePath parse_sample_path(const std::string& path) {
    fs::path p(path);
    SamplePath sp;
    sp.index = std::stoi(p.filename().string());
    sp.split = p.parent_path().filename().string();
    sp.root = p.parent_path().parent_path().string();
    return sp;
}

// ----------------------------------------------------------------------
// subcommand bodies, templated on scalar type where computation happens

template <typename T>
int run_train(const std::string& data_dir, const train::TrainConfig& tc,
              const model::ModelConfig& cfg, const std::string& out_dir, bool quiet) {
    io::DatasetMeta meta = io::read_manifest(data_dir);
    auto train_set = io::load_split<T>(data_dir, meta, "train");
    std::vector<phys::ReconSample<T>> val_set;
    if (meta.splits.count("val")) val_set = io::load_split<T>(data_dir, meta, "val");

    auto result = train::train_loop<T>(tc, cfg, train_set, val_set,
                                       [&](const train::EpochStats& e) {
                                           if (quiet) return;
                                           std::printf("epoch %3d  train %.6f", e.epoch, e.train_loss);
                                           if (e.has_val)
                                               std::printf("  val %.6f  psnr %.2f  ssim %.4f",
                                                           e.val_loss, e.val_psnr, e.val_ssim);
                                           std::printf("\n");
                                           std::fflush(stdout);
                                       });
    fs::create_directories(out_dir);
    io::save_checkpoint(out_dir + "/best", result.best_weights, cfg);
    io::save_checkpoint(out_dir + "/final", result.final_weights, cfg);
    io::write_history_csv(out_dir + "/history.csv", result.history);
    if (!quiet)
        std::printf("best epoch %d (val psnr %.2f dB); checkpoints in %s\n", result.best_epoch,
                    result.best_val_psnr, out_dir.c_str());
    return 0;
}

template <typename T>
int run_eval(const std::string& ckpt, const std::string& data_dir, const std::string& split,
             const std::string& out_csv, bool baseline) {
    io::DatasetMeta meta = io::read_manifest(data_dir);
    auto samples = io::load_split<T>(data_dir, meta, split);
    metrics::MetricReport rep;
    if (baseline) {
        rep = train::evaluate_baseline(samples);
    } else {
        auto info = io::read_checkpoint_info(ckpt);
        auto weights = io::load_checkpoint<T>(ckpt, info);
        rep = train::evaluate_model(samples, weights, info.config);
    }
    io::write_report_csv(out_csv, rep);
    auto [pm, ps] = metrics::MetricReport::mean_std(rep.psnr_values);
    auto [sm, ss] = metrics::MetricReport::mean_std(rep.ssim_values);
    std::printf("%s %s: psnr %.2f +/- %.2f dB, ssim %.4f +/- %.4f (%zu samples)\n",
                baseline ? "baseline" : "model", split.c_str(), pm, ps, sm, ss,
                rep.psnr_values.size());
    return 0;
}

template <typename T>
int run_infer(const std::string& ckpt, const SamplePath& sp, const std::string& out_mrtx,
              const std::string& out_pgm) {
    io::DatasetMeta meta = io::read_manifest(sp.root);
    auto sample = io::load_sample<T>(sp.root, meta, sp.split, sp.index);
    auto info = io::read_checkpoint_info(ckpt);
    auto weights = io::load_checkpoint<T>(ckpt, info);
    tg::Tensor<T> rec = train::infer(sample, weights, info.config);
    if (!out_mrtx.empty()) io::write_mrtx(out_mrtx, rec);
    if (!out_pgm.empty()) {
        tg::Tensor<double> mag = metrics::magnitude_image(rec);
        double peak = 0.0;
        for (std::size_t i = 0; i < mag.numel(); ++i) peak = std::max(peak, mag[i]);
        std::vector<double> v(mag.data(), mag.data() + mag.numel());
        if (peak > 0)
            for (double& x : v) x /= peak;
        io::write_pgm16(out_pgm, v, mag.dim(0), mag.dim(1));
    }
    std::printf("psnr vs reference: %.2f dB\n", metrics::psnr(rec, sample.ref));
    return 0;
}

template <typename T>
int run_erf(const std::string& ckpt, const SamplePath& sp, const std::string& out_pgm) {
    io::DatasetMeta meta = io::read_manifest(sp.root);
    auto sample = io::load_sample<T>(sp.root, meta, sp.split, sp.index);
    auto info = io::read_checkpoint_info(ckpt);
    auto weights = io::load_checkpoint<T>(ckpt, info);
    tg::Tensor<T> map = model::erf_map(weights, info.config, sample);
    std::vector<double> v(map.numel());
    for (std::size_t i = 0; i < map.numel(); ++i) v[i] = static_cast<double>(map[i]);
    io::write_pgm16(out_pgm, v, map.dim(0), map.dim(1));
    std::printf("erf support (> 0.01): %zu of %zu pixels\n", model::erf_support(map), map.numel());
    return 0;
}

template <typename T>
int run_bench(const std::string& ckpt, const SamplePath& sp, int warmup, int runs,
              const std::string& out_csv) {
    io::DatasetMeta meta = io::read_manifest(sp.root);
    auto sample = io::load_sample<T>(sp.root, meta, sp.split, sp.index);
    auto info = io::read_checkpoint_info(ckpt);
    auto weights = io::load_checkpoint<T>(ckpt, info);
    auto r = bench::bench_inference(sample, weights, info.config, warmup, runs);
    if (!out_csv.empty()) {
        std::ofstream f(out_csv);
        if (!f) throw IoError("cannot write " + out_csv);
        f << "run,latency_ms\n";
        for (std::size_t i = 0; i < r.run_ms.size(); ++i) f << i << "," << fmt_double(r.run_ms[i]) << "\n";
        f << "mean," << fmt_double(r.mean_ms) << "\n";
        f << "median," << fmt_double(r.median_ms) << "\n";
        f << "peak_rss_delta_mb," << fmt_double(static_cast<double>(r.peak_rss_delta_bytes) / (1 << 20))
          << "\n";
    }
    std::printf("inference latency: median %.2f ms, mean %.2f ms over %d runs; peak rss delta %.1f MB\n",
                r.median_ms, r.mean_ms, runs,
                static_cast<double>(r.peak_rss_delta_bytes) / (1 << 20));
    return 0;
}

template <typename T>
int run_ablate(const std::string& data_dir, const train::TrainConfig& tc,
               const model::ModelConfig& base, const std::vector<std::string>& variants,
               const std::string& out_csv) {
    io::DatasetMeta meta = io::read_manifest(data_dir);
    auto train_set = io::load_split<T>(data_dir, meta, "train");
    std::vector<phys::ReconSample<T>> val_set;
    if (meta.splits.count("val")) val_set = io::load_split<T>(data_dir, meta, "val");
    auto test_set = io::load_split<T>(data_dir, meta, "test");

    auto rows = train::ablation_suite<T>(
        tc, base, train_set, val_set, test_set, variants,
        [](const std::string& name, const train::AblationRow& r, const model::ModelConfig&,
           const model::ModelWeights<T>&) {
            std::printf("%-12s psnr %.2f +/- %.2f  ssim %.4f\n", name.c_str(), r.psnr_mean,
                        r.psnr_std, r.ssim_mean);
            std::fflush(stdout);
        });
    std::ofstream f(out_csv);
    if (!f) throw IoError("cannot write " + out_csv);
    f << "variant,psnr_mean,psnr_std,ssim_mean,ssim_std\n";
    for (const auto& r : rows)
        f << r.variant << "," << fmt_double(r.psnr_mean) << "," << fmt_double(r.psnr_std) << ","
          << fmt_double(r.ssim_mean) << "," << fmt_double(r.ssim_std) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"physics-driven multi-scale state-space reconstruction toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic phantom dataset");
    std::string sim_modality = "mri", sim_out;
    int sim_size = 64, sim_coils = 4, sim_calib = 16, sim_views = 60;
    int n_train = 200, n_val = 40, n_test = 40;
    double sim_rate = 4.0, sim_noise = 0.0;
    std::uint64_t sim_seed = 7;
    std::string sim_dtype = "f32";
    sim->add_option("--modality", sim_modality)->check(CLI::IsMember({"mri", "ct"}));
    sim->add_option("--size", sim_size);
    sim->add_option("--coils", sim_coils);
    sim->add_option("--calib", sim_calib);
    sim->add_option("--views-full", sim_views);
    sim->add_option("--rate", sim_rate);
    sim->add_option("--noise-snr", sim_noise, "measurement SNR in dB; 0 disables noise");
    sim->add_option("--n-train", n_train);
    sim->add_option("--n-val", n_val);
    sim->add_option("--n-test", n_test);
    sim->add_option("--seed", sim_seed);
    sim->add_option("--dtype", sim_dtype)->check(CLI::IsMember({"f32", "f64"}));
    sim->add_option("--out", sim_out)->required();

    // train
    auto* tr = app.add_subcommand("train", "train a model on a simulated dataset");
    std::string tr_model_cfg, tr_train_cfg, tr_data, tr_out;
    bool tr_quiet = false;
    tr->add_option("--model-config", tr_model_cfg, "model config JSON");
    tr->add_option("--train-config", tr_train_cfg, "train config JSON");
    tr->add_option("--data", tr_data)->required();
    tr->add_option("--out", tr_out)->required();
    tr->add_flag("--quiet", tr_quiet);

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or the linear baseline");
    std::string ev_ckpt, ev_data, ev_split = "test", ev_out;
    bool ev_baseline = false;
    ev->add_option("--ckpt", ev_ckpt);
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--split", ev_split);
    ev->add_option("--out", ev_out)->required();
    ev->add_flag("--baseline", ev_baseline, "score the ZF/FBP linear reconstruction");

    // infer
    auto* in = app.add_subcommand("infer", "reconstruct one sample");
    std::string in_ckpt, in_sample, in_out, in_pgm;
    in->add_option("--ckpt", in_ckpt)->required();
    in->add_option("--sample", in_sample, "path like data/test/0")->required();
    in->add_option("--out", in_out, "MRTX output path");
    in->add_option("--pgm", in_pgm, "16-bit PGM magnitude image");

    // erf
    auto* er = app.add_subcommand("erf", "effective receptive field map");
    std::string er_ckpt, er_sample, er_out;
    er->add_option("--ckpt", er_ckpt)->required();
    er->add_option("--sample", er_sample, "path like data/test/0")->required();
    er->add_option("--out", er_out, "16-bit PGM output")->required();

    // bench
    auto* be = app.add_subcommand("bench", "inference latency and memory");
    std::string be_ckpt, be_sample, be_out;
    int be_warmup = 3, be_runs = 20;
    be->add_option("--ckpt", be_ckpt)->required();
    be->add_option("--sample", be_sample)->required();
    be->add_option("--warmup", be_warmup);
    be->add_option("--runs", be_runs);
    be->add_option("--out", be_out);

    // ablate
    auto* ab = app.add_subcommand("ablate", "train and score architecture/loss variants");
    std::string ab_data, ab_model_cfg, ab_train_cfg, ab_out;
    std::vector<std::string> ab_variants = {"full", "no_pdssm", "no_ar", "no_ssm", "no_dc",
                                            "shallow_ss", "shallow_ms", "deep_msl"};
    ab->add_option("--data", ab_data)->required();
    ab->add_option("--model-config", ab_model_cfg);
    ab->add_option("--train-config", ab_train_cfg);
    ab->add_option("--variants", ab_variants, "variant names, including S=n / J=n sweeps")
        ->delimiter(',');
    ab->add_option("--out", ab_out)->required();

    try {
        app.parse(argc, argv);

        if (*sim) {
            io::DatasetMeta meta;
            meta.modality = phys::modality_from_name(sim_modality);
            meta.size = sim_size;
            meta.rate = sim_rate;
            meta.seed = sim_seed;
            meta.n_coils = sim_coils;
            meta.calib = sim_calib;
            meta.views_full = sim_views;
            meta.noise_snr_db = sim_noise;
            meta.dtype = dtype_from_name(sim_dtype);
            std::map<std::string, int> counts{{"train", n_train}, {"val", n_val}, {"test", n_test}};
            for (auto it = counts.begin(); it != counts.end();)
                it = it->second <= 0 ? counts.erase(it) : std::next(it);
            if (meta.dtype == DType::f32)
                io::simulate_dataset<float>(sim_out, meta, counts);
            else
                io::simulate_dataset<double>(sim_out, meta, counts);
            std::printf("dataset written to %s\n", sim_out.c_str());
            return 0;
        }
        if (*tr) {
            io::DatasetMeta meta = io::read_manifest(tr_data);
            model::ModelConfig cfg = resolve_model_config(tr_model_cfg, meta);
            train::TrainConfig tc = tr_train_cfg.empty()
                                        ? train::TrainConfig{}
                                        : train::TrainConfig::from_json(load_json(tr_train_cfg));
            tc.data_dir = tr_data;
            return tc.dtype == "f64" ? run_train<double>(tr_data, tc, cfg, tr_out, tr_quiet)
                                     : run_train<float>(tr_data, tc, cfg, tr_out, tr_quiet);
        }
        if (*ev) {
            if (!ev_baseline && ev_ckpt.empty())
                throw ArgumentError("eval: provide --ckpt or --baseline");
            io::DatasetMeta meta = io::read_manifest(ev_data);
            return meta.dtype == DType::f64
                       ? run_eval<double>(ev_ckpt, ev_data, ev_split, ev_out, ev_baseline)
                       : run_eval<float>(ev_ckpt, ev_data, ev_split, ev_out, ev_baseline);
        }
        if (*in) {
            SamplePath sp = parse_sample_path(in_sample);
            auto info = io::read_checkpoint_info(in_ckpt);
            return info.dtype == DType::f64 ? run_infer<double>(in_ckpt, sp, in_out, in_pgm)
                                            : run_infer<float>(in_ckpt, sp, in_out, in_pgm);
        }
        if (*er) {
            SamplePath sp = parse_sample_path(er_sample);
            auto info = io::read_checkpoint_info(er_ckpt);
            return info.dtype == DType::f64 ? run_erf<double>(er_ckpt, sp, er_out)
                                            : run_erf<float>(er_ckpt, sp, er_out);
        }
        if (*be) {
            SamplePath sp = parse_sample_path(be_sample);
            auto info = io::read_checkpoint_info(be_ckpt);
            return info.dtype == DType::f64
                       ? run_bench<double>(be_ckpt, sp, be_warmup, be_runs, be_out)
                       : run_bench<float>(be_ckpt, sp, be_warmup, be_runs, be_out);
        }
        if (*ab) {
            io::DatasetMeta meta = io::read_manifest(ab_data);
            model::ModelConfig base = resolve_model_config(ab_model_cfg, meta);
            train::TrainConfig tc = ab_train_cfg.empty()
                                        ? train::TrainConfig{}
                                        : train::TrainConfig::from_json(load_json(ab_train_cfg));
            return tc.dtype == "f64"
                       ? run_ablate<double>(ab_data, tc, base, ab_variants, ab_out)
                       : run_ablate<float>(ab_data, tc, base, ab_variants, ab_out);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
