#include "beamcurve/eval.hpp"

#include "beamcurve/canny.hpp"
#include "beamcurve/edgemap.hpp"
#include "beamcurve/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace beamcurve {

MatchResult f_measure(const Mask& detected, const Mask& truth, double tolerance) {
  if (detected.rows() != truth.rows() || detected.cols() != truth.cols()) {
    throw std::invalid_argument("f_measure needs equal dimensions");
  }
  std::vector<Pixel> det, tru;
  for (int y = 0; y < truth.rows(); ++y) {
    for (int x = 0; x < truth.cols(); ++x) {
      if (detected(y, x)) det.push_back({x, y});
      if (truth(y, x)) tru.push_back({x, y});
    }
  }
  MatchResult r;
  const int rad = static_cast<int>(std::floor(tolerance));
  const double tol2 = tolerance * tolerance;
  // Candidate pairs within tolerance, greedily matched nearest-first.
  struct Cand {
    double d2;
    std::int32_t di;
    std::int32_t ti;
  };
  std::vector<Cand> cands;
  std::vector<std::vector<std::int32_t>> grid(
      static_cast<std::size_t>(truth.rows() * truth.cols()));
  for (std::size_t i = 0; i < tru.size(); ++i) {
    grid[static_cast<std::size_t>(tru[i].y * truth.cols() + tru[i].x)].push_back(
        static_cast<std::int32_t>(i));
  }
  for (std::size_t di = 0; di < det.size(); ++di) {
    const Pixel p = det[di];
    for (int dy = -rad; dy <= rad; ++dy) {
      for (int dx = -rad; dx <= rad; ++dx) {
        const int nx = p.x + dx, ny = p.y + dy;
        if (nx < 0 || ny < 0 || nx >= truth.cols() || ny >= truth.rows()) continue;
        const double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
        if (d2 > tol2) continue;
        for (const std::int32_t ti :
             grid[static_cast<std::size_t>(ny * truth.cols() + nx)]) {
          cands.push_back({d2, static_cast<std::int32_t>(di), ti});
        }
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.di != b.di) return a.di < b.di;
    return a.ti < b.ti;
  });
  std::vector<char> det_used(det.size(), 0), tru_used(tru.size(), 0);
  for (const Cand& c : cands) {
    if (det_used[static_cast<std::size_t>(c.di)] ||
        tru_used[static_cast<std::size_t>(c.ti)]) {
      continue;
    }
    det_used[static_cast<std::size_t>(c.di)] = 1;
    tru_used[static_cast<std::size_t>(c.ti)] = 1;
    ++r.matched;
  }
  r.unmatched_detected = static_cast<std::int64_t>(det.size()) - r.matched;
  r.unmatched_truth = static_cast<std::int64_t>(tru.size()) - r.matched;
  r.precision = det.empty() ? 0.0 : static_cast<double>(r.matched) / det.size();
  r.recall = tru.empty() ? 0.0 : static_cast<double>(r.matched) / tru.size();
  r.f = (r.precision + r.recall) > 0.0
            ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
            : 0.0;
  return r;
}

Mask pattern_ground_truth(const PatternSpec& pattern, double canny_low,
                          double canny_high, double canny_sigma) {
  return canny(synth_pattern(pattern), canny_low, canny_high, canny_sigma);
}

Mask thin_mask(const Mask& m) {
  Mask out = m;
  const int h = static_cast<int>(out.rows());
  const int w = static_cast<int>(out.cols());
  auto at = [&](int y, int x) -> int {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return out(y, x) ? 1 : 0;
  };
  bool changed = true;
  std::vector<Pixel> kill;
  while (changed) {
    changed = false;
    for (int phase = 0; phase < 2; ++phase) {
      kill.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!out(y, x)) continue;
          const int p2 = at(y - 1, x), p3 = at(y - 1, x + 1), p4 = at(y, x + 1),
                    p5 = at(y + 1, x + 1), p6 = at(y + 1, x), p7 = at(y + 1, x - 1),
                    p8 = at(y, x - 1), p9 = at(y - 1, x - 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          const int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) +
                        (p4 == 0 && p5 == 1) + (p5 == 0 && p6 == 1) +
                        (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                        (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
          if (a != 1) continue;
          const bool cond = phase == 0
                                ? (p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0)
                                : (p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0);
          if (cond) kill.push_back({x, y});
        }
      }
      for (const Pixel& p : kill) out(p.y, p.x) = 0;
      changed = changed || !kill.empty();
    }
  }
  return out;
}

MatchResult best_f_measure(const Raster& soft_map, const Mask& truth,
                           double tolerance, int max_levels) {
  std::vector<double> values;
  for (Eigen::Index i = 0; i < soft_map.size(); ++i) {
    if (soft_map.data()[i] > 0.0) values.push_back(soft_map.data()[i]);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> levels{0.0};
  if (static_cast<int>(values.size()) <= max_levels) {
    for (std::size_t i = 1; i < values.size(); ++i) {
      levels.push_back(0.5 * (values[i - 1] + values[i]));
    }
  } else {
    for (int i = 1; i < max_levels; ++i) {
      const std::size_t at = values.size() * static_cast<std::size_t>(i) /
                             static_cast<std::size_t>(max_levels);
      levels.push_back(values[at] * 0.9999);
    }
  }
  MatchResult best;
  for (const double level : levels) {
    const Mask det = thin_mask((soft_map > level).cast<std::uint8_t>());
    const MatchResult m = f_measure(det, truth, tolerance);
    if (m.f > best.f) best = m;
  }
  return best;
}

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Raster run_beam_detector(const Raster& noisy, double sigma, bool optimized,
                         const DetectorConfig& cfg) {
  DetectorParams dp;
  dp.filter = cfg.filter;
  dp.sigma = sigma;
  dp.beta = cfg.beta;
  dp.n_min = cfg.n_min;
  dp.threads = cfg.threads;
  dp.mode = optimized ? MergeMode::best_k(cfg.k) : MergeMode::basic();
  const BeamTree tree = build_beam_tree(noisy, dp);
  const std::vector<ScoredCurve> curves = collect_curves(tree);
  return build_edge_map(curves, width(noisy), height(noisy),
                        cfg.overlap_fraction);
}

}  // namespace

SweepReport snr_sweep(const PatternSpec& pattern,
                      const std::vector<double>& snr_grid, int seeds,
                      double sigma, const DetectorConfig& config,
                      std::uint64_t master_seed) {
  if (snr_grid.empty()) throw std::invalid_argument("empty SNR grid");
  if (seeds < 1) throw std::invalid_argument("need at least one seed");
  const Raster clean = synth_pattern(pattern);
  const Mask truth = pattern_ground_truth(pattern, config.canny_low,
                                          config.canny_high, config.canny_sigma);
  SweepReport report;
  for (std::size_t gi = 0; gi < snr_grid.size(); ++gi) {
    const double snr_value = snr_grid[gi];
    SweepRow row;
    row.snr = snr_value;
    std::vector<double> f_basic, f_opt, f_canny;
    double t_basic = 0.0, t_opt = 0.0, t_canny = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const Raster scaled = clean * (snr_value * sigma);
      NoiseSpec ns;
      ns.sigma = sigma;
      ns.sp_fraction = 0.01;
      ns.seed = derive_seed(master_seed, gi * 1000 + static_cast<std::uint64_t>(s));
      const Raster noisy = add_noise(scaled, ns);
      if (config.run_basic) {
        const double t0 = now_seconds();
        const Raster m = run_beam_detector(noisy, sigma, false, config);
        t_basic += now_seconds() - t0;
        f_basic.push_back(best_f_measure(m, truth).f);
      }
      if (config.run_optimized) {
        const double t0 = now_seconds();
        const Raster m = run_beam_detector(noisy, sigma, true, config);
        t_opt += now_seconds() - t0;
        f_opt.push_back(best_f_measure(m, truth).f);
      }
      if (config.run_canny) {
        const double t0 = now_seconds();
        const Mask m =
            canny(noisy, config.canny_low, config.canny_high, config.canny_sigma);
        t_canny += now_seconds() - t0;
        f_canny.push_back(f_measure(thin_mask(m), truth).f);
      }
    }
    auto cell = [&](const std::vector<double>& fs, double total) {
      SweepCell c;
      if (fs.empty()) return c;
      double sum = 0.0;
      for (double v : fs) sum += v;
      c.mean_f = sum / fs.size();
      double var = 0.0;
      for (double v : fs) var += (v - c.mean_f) * (v - c.mean_f);
      c.stderr_f = fs.size() > 1
                       ? std::sqrt(var / (fs.size() - 1) / fs.size())
                       : 0.0;
      c.mean_seconds = total / fs.size();
      return c;
    };
    row.basic = cell(f_basic, t_basic);
    row.optimized = cell(f_opt, t_opt);
    row.canny = cell(f_canny, t_canny);
    report.rows.push_back(row);
  }
  const double bands[3][2] = {{0.6, 1.0}, {1.2, 2.0}, {2.2, 2.6}};
  for (const auto& band : bands) {
    SweepRange range;
    range.lo = band[0];
    range.hi = band[1];
    int n = 0;
    for (const SweepRow& row : report.rows) {
      if (row.snr < band[0] - 1e-9 || row.snr > band[1] + 1e-9) continue;
      range.basic += row.basic.mean_f;
      range.optimized += row.optimized.mean_f;
      range.canny += row.canny.mean_f;
      ++n;
    }
    if (n > 0) {
      range.basic /= n;
      range.optimized /= n;
      range.canny /= n;
      report.ranges.push_back(range);
    }
  }
  return report;
}

std::string format_sweep(const SweepReport& r) {
  std::ostringstream os;
  os << "  snr     basic  optimized  canny\n";
  os.setf(std::ios::fixed);
  os.precision(3);
  for (const SweepRow& row : r.rows) {
    os << "  " << row.snr << "  " << row.basic.mean_f << "     "
       << row.optimized.mean_f << "  " << row.canny.mean_f << "\n";
  }
  for (const SweepRange& range : r.ranges) {
    os << "range " << range.lo << "-" << range.hi << ": basic " << range.basic
       << " optimized " << range.optimized << " canny " << range.canny << "\n";
  }
  return os.str();
}

std::string sweep_csv(const SweepReport& r) {
  std::ostringstream os;
  os << "snr,f_basic,stderr_basic,f_optimized,stderr_optimized,f_canny,"
        "stderr_canny,sec_basic,sec_optimized,sec_canny\n";
  for (const SweepRow& row : r.rows) {
    os << row.snr << "," << row.basic.mean_f << "," << row.basic.stderr_f << ","
       << row.optimized.mean_f << "," << row.optimized.stderr_f << ","
       << row.canny.mean_f << "," << row.canny.stderr_f << ","
       << row.basic.mean_seconds << "," << row.optimized.mean_seconds << ","
       << row.canny.mean_seconds << "\n";
  }
  return os.str();
}

namespace {

double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

BenchReport benchmark(const std::vector<int>& sizes, int k, int repeats,
                      int threads, std::uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("benchmark needs sizes");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) {
      throw std::invalid_argument("sizes must be ascending");
    }
  }
  BenchReport report;
  std::vector<std::pair<double, double>> basic_pts, opt_pts;
  for (const int size : sizes) {
    Raster noise(size, size);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(size)));
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
      noise.data()[i] = rng.next_normal();
    }
    for (const bool optimized : {false, true}) {
      BenchRow row;
      row.size = size;
      row.optimized = optimized;
      for (int rep = 0; rep < repeats; ++rep) {
        DetectorParams dp;
        dp.sigma = 1.0;
        dp.threads = threads;
        dp.mode = optimized ? MergeMode::best_k(k) : MergeMode::basic();
        const double t0 = now_seconds();
        const BeamTree tree = build_beam_tree(noise, dp);
        row.seconds += now_seconds() - t0;
        row.concatenations = tree.counters().concatenations;
        row.stored = tree.counters().responses_stored;
      }
      row.seconds /= repeats;
      report.rows.push_back(row);
      const double n = static_cast<double>(size) * size;
      if (optimized) {
        opt_pts.emplace_back(n, static_cast<double>(row.concatenations));
      } else {
        basic_pts.emplace_back(n, static_cast<double>(row.concatenations));
      }
    }
  }
  if (basic_pts.size() >= 2) report.basic_loglog_slope = loglog_slope(basic_pts);
  if (opt_pts.size() >= 2) report.optimized_loglog_slope = loglog_slope(opt_pts);
  return report;
}

std::string format_bench(const BenchReport& r) {
  std::ostringstream os;
  os << "  size  mode       seconds   concatenations  stored\n";
  for (const BenchRow& row : r.rows) {
    os << "  " << row.size << "  " << (row.optimized ? "optimized" : "basic    ")
       << "  " << row.seconds << "  " << row.concatenations << "  " << row.stored
       << "\n";
  }
  os << "log-log slope basic " << r.basic_loglog_slope << " optimized "
     << r.optimized_loglog_slope << "\n";
  return os.str();
}

std::string bench_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "size,mode,seconds,concatenations,stored\n";
  for (const BenchRow& row : r.rows) {
    os << row.size << "," << (row.optimized ? "optimized" : "basic") << ","
       << row.seconds << "," << row.concatenations << "," << row.stored << "\n";
  }
  return os.str();
}

}  // namespace beamcurve
