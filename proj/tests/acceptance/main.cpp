// Acceptance suite: runs the project's verification gates end to end and
// prints one pass/fail line per criterion. Exit status is the number of
// failed criteria. Individual criteria can be selected by id:
//   acceptance [--scratch DIR] [ids...]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "ssr/io/checkpoint.hpp"
#include "ssr/io/csv.hpp"
#include "ssr/io/dataset.hpp"
#include "ssr/model/erf.hpp"
#include "ssr/ssm/block.hpp"
#include "ssr/train/ablate.hpp"
#include "ssr/train/loop.hpp"

namespace fs = std::filesystem;
using namespace ssr;
using tg::Tensor;

namespace {

std::string g_scratch = "acceptance_scratch";

struct Result {
    bool pass = false;
    std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor<double> random_tensor(tg::Shape dims, Rng& rng) {
    Tensor<double> t(std::move(dims));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Tensor<double>& a) { return std::sqrt(dot(a, a)); }

phys::ImagingOperator<double> mri_op64(double R, std::uint64_t seed, int coils) {
    phys::SamplingMask m = phys::make_vd_mask(64, 64, R, R == 1.0 ? 0 : 16, seed);
    return phys::ImagingOperator<double>::make_mri(std::move(m), phys::gen_coils<double>(64, 64, coils));
}

// ---------------------------------------------------------------- criterion 1
Result criterion_adjointness() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1001);
    double worst = 0.0;
    auto trials = [&](const phys::ImagingOperator<double>& op) {
        for (int t = 0; t < 100; ++t) {
            Tensor<double> x = random_tensor(op.image_shape(), rng);
            Tensor<double> y = random_tensor(op.meas_shape(), rng);
            Tensor<double> Ax = op.forward(x);
            Tensor<double> Aty = op.adjoint(y);
            worst = std::max(worst, std::abs(dot(Ax, y) - dot(x, Aty)) / (norm2(Ax) * norm2(y)));
        }
    };
    for (double R : {1.0, 4.0, 8.0, 12.0}) trials(mri_op64(R, 42 + static_cast<std::uint64_t>(R), 4));
    for (double R : {1.0, 4.0, 6.0, 8.0})
        trials(phys::ImagingOperator<double>::make_ct(64, 64, 360, phys::subsample_views(360, R)));
    double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "worst relative dot-product gap " << worst << " over 800 trials, " << secs << " s";
    return {worst < 1e-10 && secs < 30.0, os.str()};
}

// ---------------------------------------------------------------- criterion 2
Result criterion_dense_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    {
        phys::SamplingMask m = phys::make_vd_mask(8, 8, 2.0, 4, 5);
        Tensor<double> coils = Tensor<double>::zeros({1, 8, 8, 2});
        for (int p = 0; p < 64; ++p) coils[static_cast<std::size_t>(p) * 2] = 1.0;
        auto op = phys::ImagingOperator<double>::make_mri(std::move(m), std::move(coils));
        int n = 8 * 8 * 2;
        std::vector<std::vector<double>> F(static_cast<std::size_t>(n)), At(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Tensor<double> e(op.image_shape());
            e[static_cast<std::size_t>(i)] = 1.0;
            auto c = op.forward(e);
            F[static_cast<std::size_t>(i)].assign(c.data(), c.data() + c.numel());
            Tensor<double> ey(op.meas_shape());
            ey[static_cast<std::size_t>(i)] = 1.0;
            auto r = op.adjoint(ey);
            At[static_cast<std::size_t>(i)].assign(r.data(), r.data() + r.numel());
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(F[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                                                 At[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]));
    }
    {
        auto op = phys::ImagingOperator<double>::make_ct(16, 16, 40, phys::subsample_views(40, 4.0));
        int n = 16 * 16, m = static_cast<int>(op.views().size()) * op.n_det();
        std::vector<double> F(static_cast<std::size_t>(m) * n), At(static_cast<std::size_t>(m) * n);
        for (int j = 0; j < n; ++j) {
            Tensor<double> e({16, 16, 1});
            e[static_cast<std::size_t>(j)] = 1.0;
            auto col = op.forward(e);
            for (int i = 0; i < m; ++i) F[static_cast<std::size_t>(i) * n + j] = col[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < m; ++i) {
            Tensor<double> e(op.meas_shape());
            e[static_cast<std::size_t>(i)] = 1.0;
            auto row = op.adjoint(e);
            for (int j = 0; j < n; ++j) At[static_cast<std::size_t>(i) * n + j] = row[static_cast<std::size_t>(j)];
        }
        for (std::size_t i = 0; i < F.size(); ++i) worst = std::max(worst, std::abs(F[i] - At[i]));
    }
    double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "worst |forward^T - adjoint| entry " << worst << ", " << secs << " s";
    return {worst < 1e-10 && secs < 10.0, os.str()};
}

// ---------------------------------------------------------------- criterion 3
Result criterion_dc_exactness() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1003);
    auto op = mri_op64(4.0, 77, 1);
    double worst_meas = 0.0, worst_fixed = 0.0;
    for (int t = 0; t < 5; ++t) {
        Tensor<double> x = random_tensor(op.image_shape(), rng);
        Tensor<double> y = op.forward(x);
        Tensor<double> u = random_tensor(op.image_shape(), rng);
        Tensor<double> ut = phys::dc_step_raw(u, y, op);
        Tensor<double> Aut = op.forward(ut);
        for (std::size_t i = 0; i < y.numel(); ++i)
            worst_meas = std::max(worst_meas, std::abs(Aut[i] - y[i]));
    }
    {
        Tensor<double> u = random_tensor(op.image_shape(), rng);
        Tensor<double> y = op.forward(u);
        Tensor<double> ut = phys::dc_step_raw(u, y, op);
        for (std::size_t i = 0; i < u.numel(); ++i)
            worst_fixed = std::max(worst_fixed, std::abs(ut[i] - u[i]));
    }
    {
        auto ct = phys::ImagingOperator<double>::make_ct(64, 64, 60, phys::subsample_views(60, 4.0));
        Tensor<double> u = random_tensor(ct.image_shape(), rng);
        Tensor<double> y = ct.forward(u);
        Tensor<double> ut = phys::dc_step_raw(u, y, ct);
        for (std::size_t i = 0; i < u.numel(); ++i)
            worst_fixed = std::max(worst_fixed, std::abs(ut[i] - u[i]));
    }
    double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "sampled-entry error " << worst_meas << ", fixed-point error " << worst_fixed << ", "
       << secs << " s";
    return {worst_meas < 1e-10 && worst_fixed < 1e-10 && secs < 5.0, os.str()};
}

// ---------------------------------------------------------------- criterion 4
Result criterion_scan_kernel() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1004);
    // bitwise space-to-depth round trips
    for (int J : {1, 2, 4}) {
        Tensor<double> x = random_tensor({8 * J, 4 * J, 3}, rng);
        Tensor<double> rt = ssm::depth_to_space_raw(ssm::space_to_depth_raw(x, J), J);
        for (std::size_t i = 0; i < x.numel(); ++i)
            if (rt[i] != x[i]) return {false, "space_to_depth round trip not bitwise"};
    }
    // parallel scan vs sequential oracle
    const int ns[] = {1, 2, 17, 255, 4096};
    const int Ds[] = {1, 4, 16};
    double worst = 0.0;
    for (int c = 0; c < 1000; ++c) {
        int n = ns[c % 5];
        int D = Ds[(c / 5) % 3];
        Tensor<double> A = random_tensor({D, D}, rng);
        double row = 0.0;
        for (int i = 0; i < D; ++i) {
            double s = 0.0;
            for (int j = 0; j < D; ++j) s += std::abs(A[static_cast<std::size_t>(i) * D + j]);
            row = std::max(row, s);
        }
        if (row > 0)
            for (std::size_t i = 0; i < A.numel(); ++i) A[i] *= 0.95 / row;
        Tensor<double> B = random_tensor({D, 1}, rng);
        Tensor<double> C = random_tensor({1, D}, rng);
        int ch = 1 + static_cast<int>(rng.below(3));
        Tensor<double> z = random_tensor({n, ch}, rng);
        Tensor<double> seq = ssm::ssm_scan_seq(z, A, B, C);
        Tensor<double> par = ssm::ssm_scan_par(z, A, B, C);
        double scale = 1.0;
        for (std::size_t i = 0; i < seq.numel(); ++i) scale = std::max(scale, std::abs(seq[i]));
        for (std::size_t i = 0; i < seq.numel(); ++i)
            worst = std::max(worst, std::abs(seq[i] - par[i]) / scale);
    }
    double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "worst par-vs-seq relative deviation " << worst << " over 1000 cases, " << secs << " s";
    return {worst < 1e-12 && secs < 60.0, os.str()};
}

// ---------------------------------------------------------------- criterion 5
Result criterion_gradient_fidelity() {
    auto t0 = std::chrono::steady_clock::now();
    model::ModelConfig cfg;
    cfg.scales = 2;
    cfg.cascades = 1;
    cfg.channels = 4;
    cfg.compression = 2;
    cfg.state_dim = 3;
    cfg.image_channels = 2;
    auto w = model::ModelWeights<double>::init(cfg, 17);

    phys::SimParams p;
    p.modality = phys::Modality::MRI;
    p.size = 16;
    p.rate = 4.0;
    p.n_coils = 2;
    p.calib = 4;
    auto sample = phys::gen_sample<double>(p, 23);

    auto eval = [&](const model::ModelWeights<double>& weights) {
        tg::Tape<double> tape;
        tape.set_grad_enabled(false);
        auto bound = model::BoundWeights<double>::bind(tape, weights, cfg, false);
        auto out = model::network_forward(tape.constant(sample.x0), tape.constant(sample.y),
                                          sample.op, bound, cfg);
        auto loss = train::total_loss(out, tape.constant(sample.ref), train::LossMode::Dmsd, cfg,
                                      bound);
        return loss.value().item();
    };

    tg::Tape<double> tape;
    auto bound = model::BoundWeights<double>::bind(tape, w, cfg, true);
    auto out = model::network_forward(tape.constant(sample.x0), tape.constant(sample.y), sample.op,
                                      bound, cfg);
    auto loss = train::total_loss(out, tape.constant(sample.ref), train::LossMode::Dmsd, cfg, bound);
    tape.backward(loss);

    // Central differences at the pinned h = 1e-4. The total loss contains L1
    // terms, so a perturbation stencil can straddle an |.| kink, where the
    // coarse FD is not the derivative; a coordinate that fails at h = 1e-4 is
    // re-verified at h = 1e-5 and only counts as a kink artifact if the
    // refined FD agrees with the analytic gradient while disagreeing with the
    // coarse FD.
    auto fd_at = [&](const std::string& key, std::size_t i, double h) {
        model::ModelWeights<double> wp = w;
        wp.params.at(key)[i] = w.params.at(key)[i] + h;
        double fp = eval(wp);
        wp.params.at(key)[i] = w.params.at(key)[i] - h;
        double fm = eval(wp);
        return (fp - fm) / (2.0 * h);
    };
    auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
    };
    double worst = 0.0;
    std::size_t n_params = 0, kink_skips = 0;
    bool ok = true;
    for (const auto& [key, val] : bound.vals) {
        const Tensor<double>& g = tape.grad_or_zero(val);
        for (std::size_t i = 0; i < g.numel(); ++i, ++n_params) {
            double fd = fd_at(key, i, 1e-4);
            double r = rel(g[i], fd);
            if (r >= 1e-4) {
                double fd_fine = fd_at(key, i, 1e-5);
                bool kink = rel(g[i], fd_fine) < 1e-4 && rel(fd, fd_fine) >= 1e-4;
                if (kink) {
                    ++kink_skips;
                    continue;
                }
                ok = false;
            }
            worst = std::max(worst, r);
        }
    }
    double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "max relative gradient error " << worst << " over " << n_params << " parameters ("
       << kink_skips << " L1-kink coordinates re-verified at h=1e-5), " << secs << " s";
    return {ok && worst < 1e-4 && kink_skips <= 10 && secs < 600.0, os.str()};
}

// --------------------------------------------------------- toy task plumbing

struct ToyTask {
    std::string name;
    io::DatasetMeta meta;
    model::ModelConfig cfg;
    train::TrainConfig tc;
};

ToyTask mri_toy() {
    ToyTask t;
    t.name = "mri";
    t.meta.modality = phys::Modality::MRI;
    t.meta.size = 64;
    t.meta.rate = 4.0;
    t.meta.seed = 7;
    t.meta.n_coils = 4;
    t.meta.calib = 16;
    t.meta.dtype = DType::f32;
    t.cfg.scales = 3;
    t.cfg.cascades = 3;
    t.cfg.channels = 16;
    t.cfg.compression = 4;
    t.cfg.state_dim = 16;
    t.cfg.image_channels = 2;
    t.tc.epochs = 50;
    t.tc.lr = 1e-3;
    t.tc.batch_size = 4;
    t.tc.seed = 7;
    t.tc.loss_mode = train::LossMode::Dmsd;
    return t;
}

ToyTask ct_toy() {
    ToyTask t = mri_toy();
    t.name = "ct";
    t.meta.modality = phys::Modality::CT;
    t.meta.views_full = 60;
    t.cfg.cascades = 2;
    t.cfg.image_channels = 1;
    return t;
}

std::string dataset_dir(const ToyTask& t) { return g_scratch + "/data_" + t.name; }

void ensure_dataset(const ToyTask& t) {
    if (fs::exists(dataset_dir(t) + "/manifest.json")) return;
    io::simulate_dataset<float>(dataset_dir(t), t.meta, {{"train", 200}, {"val", 40}, {"test", 40}});
}

// Trains via the library code path and writes the same artifacts as the CLI
// (checkpoints, history.csv, report.csv on the test split).
metrics::MetricReport train_and_report(const ToyTask& t, const std::string& out_dir,
                                       const model::ModelConfig& cfg, const train::TrainConfig& tc,
                                       double* loss_ratio = nullptr) {
    io::DatasetMeta meta = io::read_manifest(dataset_dir(t));
    auto train_set = io::load_split<float>(dataset_dir(t), meta, "train");
    auto val_set = io::load_split<float>(dataset_dir(t), meta, "val");
    auto test_set = io::load_split<float>(dataset_dir(t), meta, "test");
    auto result = train::train_loop<float>(tc, cfg, train_set, val_set);
    fs::create_directories(out_dir);
    io::save_checkpoint(out_dir + "/best", result.best_weights, cfg);
    io::save_checkpoint(out_dir + "/final", result.final_weights, cfg);
    io::write_history_csv(out_dir + "/history.csv", result.history);
    if (loss_ratio)
        *loss_ratio = result.history.back().train_loss / result.history.front().train_loss;
    metrics::MetricReport rep = train::evaluate_model(test_set, result.best_weights, cfg);
    io::write_report_csv(out_dir + "/report.csv", rep);
    return rep;
}

double baseline_test_psnr(const ToyTask& t) {
    io::DatasetMeta meta = io::read_manifest(dataset_dir(t));
    auto test_set = io::load_split<float>(dataset_dir(t), meta, "test");
    return train::evaluate_baseline(test_set).mean_psnr();
}

// ---------------------------------------------------------------- criterion 6
Result criterion_toy_reconstruction() {
    std::ostringstream os;
    bool pass = true;
    for (const ToyTask& t : {mri_toy(), ct_toy()}) {
        auto t0 = std::chrono::steady_clock::now();
        ensure_dataset(t);
        double margin = t.name == "mri" ? 3.0 : 2.0;
        double loss_ratio = 1.0;
        metrics::MetricReport rep =
            train_and_report(t, g_scratch + "/run1_" + t.name, t.cfg, t.tc, &loss_ratio);
        double base = baseline_test_psnr(t);
        double got = rep.mean_psnr();
        bool ok = got >= base + margin && loss_ratio < 0.5;
        pass = pass && ok;
        os << t.name << ": model " << io::fmt_double(got) << " dB vs linear baseline "
           << io::fmt_double(base) << " dB (need +" << margin << "), final/initial train loss "
           << io::fmt_double(loss_ratio) << ", " << elapsed_s(t0) << " s; ";
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------- criterion 7
struct AblationOutcome {
    std::map<std::string, double> psnr;
};

AblationOutcome run_toy_ablation() {
    ToyTask t = mri_toy();
    ensure_dataset(t);
    AblationOutcome out;
    const std::string cache = g_scratch + "/ablation.csv";
    if (fs::exists(cache)) {
        std::ifstream f(cache);
        std::string line;
        std::getline(f, line);  // header
        while (std::getline(f, line)) {
            auto c1 = line.find(',');
            auto c2 = line.find(',', c1 + 1);
            out.psnr[line.substr(0, c1)] = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        }
        return out;
    }
    io::DatasetMeta meta = io::read_manifest(dataset_dir(t));
    auto train_set = io::load_split<float>(dataset_dir(t), meta, "train");
    auto val_set = io::load_split<float>(dataset_dir(t), meta, "val");
    auto test_set = io::load_split<float>(dataset_dir(t), meta, "test");
    train::TrainConfig tc = t.tc;
    tc.epochs = 10;  // shared reduced budget across all variants
    std::vector<std::string> variants{"full", "no_pdssm", "no_ssm", "no_dc", "shallow_ss"};
    auto rows = train::ablation_suite<float>(
        tc, t.cfg, train_set, val_set, test_set, variants,
        [&](const std::string& name, const train::AblationRow& row,
            const model::ModelConfig& cfg, const model::ModelWeights<float>& best) {
            std::printf("    ablation %-10s psnr %.2f dB\n", name.c_str(), row.psnr_mean);
            std::fflush(stdout);
            io::save_checkpoint(g_scratch + "/ablate_" + name, best, cfg);
        });
    std::ofstream f(cache);
    f << "variant,psnr_mean,psnr_std,ssim_mean,ssim_std\n";
    for (const auto& r : rows) {
        f << r.variant << "," << io::fmt_double(r.psnr_mean) << "," << io::fmt_double(r.psnr_std)
          << "," << io::fmt_double(r.ssim_mean) << "," << io::fmt_double(r.ssim_std) << "\n";
        out.psnr[r.variant] = r.psnr_mean;
    }
    return out;
}

Result criterion_ablation_direction() {
    AblationOutcome out = run_toy_ablation();
    double full = out.psnr.at("full");
    std::ostringstream os;
    bool pass = true;
    for (const char* v : {"no_pdssm", "no_ssm", "no_dc", "shallow_ss"}) {
        bool ok = full >= out.psnr.at(v);
        pass = pass && ok;
        os << v << " " << io::fmt_double(out.psnr.at(v)) << (ok ? " <= " : " > ") << "full "
           << io::fmt_double(full) << "; ";
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------- criterion 8
Result criterion_erf_breadth() {
    run_toy_ablation();  // ensures trained variant checkpoints exist
    ToyTask t = mri_toy();
    io::DatasetMeta meta = io::read_manifest(dataset_dir(t));
    auto sample = io::load_sample<float>(dataset_dir(t), meta, "test", 0);

    auto info_full = io::read_checkpoint_info(g_scratch + "/ablate_full");
    auto w_full = io::load_checkpoint<float>(g_scratch + "/ablate_full", info_full);
    auto info_nossm = io::read_checkpoint_info(g_scratch + "/ablate_no_ssm");
    auto w_nossm = io::load_checkpoint<float>(g_scratch + "/ablate_no_ssm", info_nossm);

    std::size_t s_full = model::erf_support(model::erf_map(w_full, info_full.config, sample));
    std::size_t s_nossm = model::erf_support(model::erf_map(w_nossm, info_nossm.config, sample));
    std::ostringstream os;
    os << "erf support full " << s_full << " vs no_ssm " << s_nossm << " (of 4096)";
    return {s_full > s_nossm, os.str()};
}

// ---------------------------------------------------------------- criterion 9
bool files_identical(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

Result criterion_determinism() {
    std::ostringstream os;
    bool pass = true;
    for (const ToyTask& t : {mri_toy(), ct_toy()}) {
        ensure_dataset(t);
        std::string run1 = g_scratch + "/run1_" + t.name;
        if (!fs::exists(run1 + "/history.csv")) train_and_report(t, run1, t.cfg, t.tc);
        std::string run2 = g_scratch + "/run2_" + t.name;
        fs::remove_all(run2);
        train_and_report(t, run2, t.cfg, t.tc);

        std::size_t mismatched = 0, compared = 0;
        for (const char* rel : {"history.csv", "report.csv"}) {
            ++compared;
            if (!files_identical(run1 + "/" + rel, run2 + "/" + rel)) ++mismatched;
        }
        for (const char* sub : {"best", "final"}) {
            for (const auto& entry : fs::directory_iterator(run1 + "/" + sub)) {
                ++compared;
                if (!files_identical(entry.path(),
                                     fs::path(run2) / sub / entry.path().filename()))
                    ++mismatched;
            }
        }
        pass = pass && mismatched == 0;
        os << t.name << ": " << (compared - mismatched) << "/" << compared
           << " artifacts bitwise identical; ";
    }
    return {pass, os.str()};
}

// --------------------------------------------------------------- criterion 10
Result criterion_mrtx_roundtrip() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1010);
    fs::create_directories(g_scratch);
    const std::string path = g_scratch + "/roundtrip.mrtx";
    for (int c = 0; c < 1000; ++c) {
        int nd = 1 + static_cast<int>(rng.below(4));
        tg::Shape dims;
        for (int i = 0; i < nd; ++i) dims.push_back(1 + static_cast<int>(rng.below(6)));
        if (rng.below(2)) {
            Tensor<float> t(dims);
            for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.normal());
            io::write_mrtx(path, t);
            Tensor<float> r = io::read_mrtx<float>(path);
            if (r.dims() != t.dims()) return {false, "dims mismatch on f32 round trip"};
            for (std::size_t i = 0; i < t.numel(); ++i)
                if (std::bit_cast<std::uint32_t>(r[i]) != std::bit_cast<std::uint32_t>(t[i]))
                    return {false, "f32 payload not bitwise identical"};
        } else {
            Tensor<double> t(dims);
            for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.normal();
            io::write_mrtx(path, t);
            Tensor<double> r = io::read_mrtx<double>(path);
            if (r.dims() != t.dims()) return {false, "dims mismatch on f64 round trip"};
            for (std::size_t i = 0; i < t.numel(); ++i)
                if (std::bit_cast<std::uint64_t>(r[i]) != std::bit_cast<std::uint64_t>(t[i]))
                    return {false, "f64 payload not bitwise identical"};
        }
    }
    double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "1000 randomized round trips bitwise identical, " << secs << " s";
    return {secs < 5.0, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--scratch" && i + 1 < argc) {
            g_scratch = argv[++i];
        } else {
            selected.push_back(std::stoi(a));
        }
    }
    fs::create_directories(g_scratch);

    struct Entry {
        int id;
        const char* title;
        std::function<Result()> run;
    };
    const std::vector<Entry> entries = {
        {1, "operator adjointness (MRI R in {1,4,8,12}, CT R in {1,4,6,8})", criterion_adjointness},
        {2, "dense-matrix transpose oracle (8x8 MRI, 16x16 CT)", criterion_dense_oracle},
        {3, "data-consistency exactness and fixed points", criterion_dc_exactness},
        {4, "scan kernel: permutation round trip, parallel == sequential", criterion_scan_kernel},
        {5, "gradient fidelity of the full tiny network (f64)", criterion_gradient_fidelity},
        {6, "toy reconstruction beats the linear baseline (MRI +3 dB, CT +2 dB)",
         criterion_toy_reconstruction},
        {7, "ablation direction on the toy MRI task", criterion_ablation_direction},
        {8, "trained ERF support exceeds the no_ssm variant", criterion_erf_breadth},
        {9, "training determinism: bitwise identical checkpoints and CSVs", criterion_determinism},
        {10, "MRTX container bitwise round trip", criterion_mrtx_roundtrip},
    };

    int failures = 0;
    for (const auto& e : entries) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), e.id) == selected.end())
            continue;
        std::printf("criterion %2d: %s ...\n", e.id, e.title);
        std::fflush(stdout);
        Result r;
        try {
            r = e.run();
        } catch (const std::exception& ex) {
            r = {false, std::string("exception: ") + ex.what()};
        }
        std::printf("[%s] criterion %d: %s\n", r.pass ? "PASS" : "FAIL", e.id, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                failures);
    return failures;
}
