#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "ssr/metrics.hpp"
#include "ssr/train/loop.hpp"

namespace ssr::io {

// Round-trip float formatting keeps CSV output byte-stable across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_history_csv(const std::string& path,
                              const std::vector<train::EpochStats>& history) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "epoch,train_loss,val_loss,val_psnr,val_ssim\n";
    for (const auto& e : history) {
        f << e.epoch << "," << fmt_double(e.train_loss) << ",";
        if (e.has_val)
            f << fmt_double(e.val_loss) << "," << fmt_double(e.val_psnr) << ","
              << fmt_double(e.val_ssim);
        else
            f << ",,";
        f << "\n";
    }
}

inline void write_report_csv(const std::string& path, const metrics::MetricReport& rep) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "sample,psnr,ssim\n";
    for (std::size_t i = 0; i < rep.psnr_values.size(); ++i)
        f << i << "," << fmt_double(rep.psnr_values[i]) << "," << fmt_double(rep.ssim_values[i])
          << "\n";
    auto [pm, ps] = metrics::MetricReport::mean_std(rep.psnr_values);
    auto [sm, ss] = metrics::MetricReport::mean_std(rep.ssim_values);
    f << "mean," << fmt_double(pm) << "," << fmt_double(sm) << "\n";
    f << "std," << fmt_double(ps) << "," << fmt_double(ss) << "\n";
}

}  // namespace ssr::io
