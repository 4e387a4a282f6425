#include "beamcurve/image.hpp"

#include "beamcurve/geometry.hpp"
#include "beamcurve/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace beamcurve {

namespace {

void put(Raster& img, int x, int y, double v) {
  if (x < 0 || y < 0 || x >= width(img) || y >= height(img)) {
    throw std::invalid_argument("pattern element leaves the image bounds");
  }
  img(y, x) = v;
}

void check_extent(const Raster& img, double lo_x, double lo_y, double hi_x,
                  double hi_y) {
  if (lo_x < -0.5 || lo_y < -0.5 || hi_x > width(img) - 0.5 ||
      hi_y > height(img) - 0.5) {
    throw std::invalid_argument("pattern element leaves the image bounds");
  }
}

double point_segment_dist(double px, double py, double x0, double y0,
                          double x1, double y1) {
  const double dx = x1 - x0, dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - x0) * dx + (py - y0) * dy) / len2 : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  const double ex = px - (x0 + t * dx), ey = py - (y0 + t * dy);
  return std::sqrt(ex * ex + ey * ey);
}

// Distance to a circular arc spanning [t0, t1] (radians, t1 > t0).
double point_arc_dist(double px, double py, double cx, double cy, double r,
                      double t0, double t1) {
  const double dx = px - cx, dy = py - cy;
  double a = std::atan2(dy, dx);
  while (a < t0) a += 2.0 * M_PI;
  if (a <= t1) return std::abs(std::sqrt(dx * dx + dy * dy) - r);
  const double e0x = px - (cx + r * std::cos(t0));
  const double e0y = py - (cy + r * std::sin(t0));
  const double e1x = px - (cx + r * std::cos(t1));
  const double e1y = py - (cy + r * std::sin(t1));
  return std::sqrt(std::min(e0x * e0x + e0y * e0y, e1x * e1x + e1y * e1y));
}

template <typename DistFn>
void fill_by_distance(Raster& img, double lo_x, double lo_y, double hi_x,
                      double hi_y, double half_width, double v, DistFn dist) {
  check_extent(img, lo_x - half_width, lo_y - half_width, hi_x + half_width,
               hi_y + half_width);
  const int x0 = std::max(0, static_cast<int>(std::floor(lo_x - half_width)));
  const int y0 = std::max(0, static_cast<int>(std::floor(lo_y - half_width)));
  const int x1 = std::min(width(img) - 1,
                          static_cast<int>(std::ceil(hi_x + half_width)));
  const int y1 = std::min(height(img) - 1,
                          static_cast<int>(std::ceil(hi_y + half_width)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (dist(static_cast<double>(x), static_cast<double>(y)) <= half_width) {
        img(y, x) = v;
      }
    }
  }
}

void raster_segment(Raster& img, const SegmentSpec& s) {
  if (s.width <= 1.0) {
    const Pixel a{static_cast<int>(std::lround(s.x0)),
                  static_cast<int>(std::lround(s.y0))};
    const Pixel b{static_cast<int>(std::lround(s.x1)),
                  static_cast<int>(std::lround(s.y1))};
    for (const Pixel& p : bresenham(a, b)) put(img, p.x, p.y, s.intensity);
    return;
  }
  fill_by_distance(img, std::min(s.x0, s.x1), std::min(s.y0, s.y1),
                   std::max(s.x0, s.x1), std::max(s.y0, s.y1), s.width / 2.0,
                   s.intensity, [&](double px, double py) {
                     return point_segment_dist(px, py, s.x0, s.y0, s.x1, s.y1);
                   });
}

void raster_arc_thin(Raster& img, double cx, double cy, double r, double t0,
                     double t1, double v) {
  const double step = 0.2 / std::max(r, 1.0);
  for (double t = t0; t <= t1 + step * 0.5; t += step) {
    const int x = static_cast<int>(std::lround(cx + r * std::cos(t)));
    const int y = static_cast<int>(std::lround(cy + r * std::sin(t)));
    put(img, x, y, v);
  }
}

void raster_circle(Raster& img, const CircleSpec& c) {
  if (c.width <= 1.0) {
    raster_arc_thin(img, c.cx, c.cy, c.radius, 0.0, 2.0 * M_PI, c.intensity);
    return;
  }
  fill_by_distance(img, c.cx - c.radius, c.cy - c.radius, c.cx + c.radius,
                   c.cy + c.radius, c.width / 2.0, c.intensity,
                   [&](double px, double py) {
                     const double dx = px - c.cx, dy = py - c.cy;
                     return std::abs(std::sqrt(dx * dx + dy * dy) - c.radius);
                   });
}

void raster_scurve(Raster& img, const SCurveSpec& s) {
  // Right-bulging half circle below center, left-bulging above, joined at
  // (cx, cy).
  if (s.width <= 1.0) {
    raster_arc_thin(img, s.cx, s.cy - s.radius, s.radius, -M_PI / 2.0,
                    M_PI / 2.0, s.intensity);
    raster_arc_thin(img, s.cx, s.cy + s.radius, s.radius, M_PI / 2.0,
                    3.0 * M_PI / 2.0, s.intensity);
    return;
  }
  fill_by_distance(
      img, s.cx - s.radius, s.cy - 2.0 * s.radius, s.cx + s.radius,
      s.cy + 2.0 * s.radius, s.width / 2.0, s.intensity,
      [&](double px, double py) {
        const double d1 = point_arc_dist(px, py, s.cx, s.cy - s.radius,
                                         s.radius, -M_PI / 2.0, M_PI / 2.0);
        const double d2 = point_arc_dist(px, py, s.cx, s.cy + s.radius,
                                         s.radius, M_PI / 2.0, 3.0 * M_PI / 2.0);
        return std::min(d1, d2);
      });
}

}  // namespace

Raster synth_pattern(const PatternSpec& spec) {
  if (spec.size < 1) throw std::invalid_argument("pattern size must be positive");
  Raster img = Raster::Constant(spec.size, spec.size, spec.background);
  for (const PatternElement& e : spec.elements) {
    std::visit([&](const auto& el) {
      using T = std::decay_t<decltype(el)>;
      if constexpr (std::is_same_v<T, SegmentSpec>) raster_segment(img, el);
      else if constexpr (std::is_same_v<T, CircleSpec>) raster_circle(img, el);
      else raster_scurve(img, el);
    }, e);
  }
  return img;
}

PatternSpec simulation_pattern(int size) {
  const double s = size / 129.0;
  auto c = [s](double v) { return v * s; };
  // Strokes are wider than the matched filter (width 5 vs 4 side samples)
  // so every stroke contributes two full-contrast step edges.
  const double stroke = std::max(1.0, c(5));
  PatternSpec spec;
  spec.size = size;
  spec.background = 0.0;
  spec.elements = {
      SegmentSpec{c(8), c(8), c(120), c(8), 1.0, stroke},
      SegmentSpec{c(8), c(20), c(8), c(120), 1.0, stroke},
      SegmentSpec{c(70), c(78), c(118), c(122), 1.0, stroke},
      CircleSpec{c(91), c(48), c(11), 1.0, stroke},
      CircleSpec{c(91), c(48), c(21), 1.0, stroke},
      CircleSpec{c(91), c(48), c(31), 1.0, stroke},
      SCurveSpec{c(36), c(84), c(18), 1.0, stroke},
  };
  return spec;
}

Raster add_noise(const Raster& img, const NoiseSpec& noise) {
  if (noise.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (noise.sp_fraction < 0.0 || noise.sp_fraction > 1.0) {
    throw std::invalid_argument("sp_fraction must be in [0, 1]");
  }
  const double clean_min = img.minCoeff();
  const double clean_max = img.maxCoeff();
  Rng rng(noise.seed);
  Raster out = img;
  if (noise.sigma > 0.0) {
    double* p = out.data();
    const std::ptrdiff_t n = out.size();
    for (std::ptrdiff_t i = 0; i < n; ++i) p[i] += noise.sigma * rng.next_normal();
  }
  const std::int64_t n_sp =
      static_cast<std::int64_t>(noise.sp_fraction * static_cast<double>(img.size()));
  if (n_sp > 0) {
    const double salt = noise.salt.value_or(clean_max + 3.0 * noise.sigma);
    const double pepper = noise.pepper.value_or(clean_min - 3.0 * noise.sigma);
    // Partial Fisher-Yates: first n_sp entries become a uniform sample of
    // distinct pixel indices.
    std::vector<std::int64_t> idx(img.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::int64_t i = 0; i < n_sp; ++i) {
      const std::int64_t j =
          i + static_cast<std::int64_t>(rng.next_below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      out.data()[idx[i]] = rng.next_double() < 0.5 ? salt : pepper;
    }
  }
  return out;
}

double snr(double edge_contrast, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(edge_contrast) / sigma;
}

double estimate_sigma(const Raster& img) {
  const int w = width(img), h = height(img);
  if (w < 3 || h < 3) throw std::invalid_argument("image must be at least 3x3");
  std::vector<double> lap;
  lap.reserve(static_cast<std::size_t>(w - 2) * (h - 2));
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      lap.push_back(std::abs(4.0 * img(y, x) - img(y - 1, x) - img(y + 1, x) -
                             img(y, x - 1) - img(y, x + 1)));
    }
  }
  auto mid = lap.begin() + lap.size() / 2;
  std::nth_element(lap.begin(), mid, lap.end());
  double mad = *mid;
  if (mad < 1e-12) mad = 0.0;  // constant image up to rounding residue
  // |N(0, s^2)| has median 0.6745 s; the 5-point Laplacian of unit-variance
  // i.i.d. noise has variance 20.
  return mad / (0.6744897501960817 * std::sqrt(20.0));
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  std::ostringstream os;
  os << "pattern spec parse error at line " << line << ": " << what;
  throw std::runtime_error(os.str());
}

}  // namespace

PatternSpec parse_pattern_spec(std::istream& in) {
  PatternSpec spec;
  spec.size = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    auto want = [&](int n, double* out) {
      for (int i = 0; i < n; ++i) {
        if (!(ls >> out[i])) parse_fail(lineno, "expected " + std::to_string(n) + " numbers after '" + key + "'");
      }
    };
    auto opt_width = [&]() {
      double w = 1.0;
      if (ls >> w) {
        if (w < 1.0) parse_fail(lineno, "width must be >= 1");
      }
      return w;
    };
    if (key == "size") {
      double v;
      want(1, &v);
      spec.size = static_cast<int>(v);
    } else if (key == "background") {
      want(1, &spec.background);
    } else if (key == "segment") {
      double v[5];
      want(5, v);
      spec.elements.push_back(SegmentSpec{v[0], v[1], v[2], v[3], v[4], opt_width()});
    } else if (key == "circle") {
      double v[4];
      want(4, v);
      spec.elements.push_back(CircleSpec{v[0], v[1], v[2], v[3], opt_width()});
    } else if (key == "scurve") {
      double v[4];
      want(4, v);
      spec.elements.push_back(SCurveSpec{v[0], v[1], v[2], v[3], opt_width()});
    } else {
      parse_fail(lineno, "unknown directive '" + key + "'");
    }
  }
  if (spec.size <= 0) parse_fail(lineno, "missing or invalid 'size'");
  return spec;
}

PatternSpec load_pattern_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern spec: " + path);
  return parse_pattern_spec(in);
}

std::string format_pattern_spec(const PatternSpec& spec) {
  std::ostringstream os;
  os << "size " << spec.size << "\n";
  os << "background " << spec.background << "\n";
  for (const PatternElement& e : spec.elements) {
    std::visit([&](const auto& el) {
      using T = std::decay_t<decltype(el)>;
      if constexpr (std::is_same_v<T, SegmentSpec>) {
        os << "segment " << el.x0 << " " << el.y0 << " " << el.x1 << " "
           << el.y1 << " " << el.intensity << " " << el.width << "\n";
      } else if constexpr (std::is_same_v<T, CircleSpec>) {
        os << "circle " << el.cx << " " << el.cy << " " << el.radius << " "
           << el.intensity << " " << el.width << "\n";
      } else {
        os << "scurve " << el.cx << " " << el.cy << " " << el.radius << " "
           << el.intensity << " " << el.width << "\n";
      }
    }, e);
  }
  return os.str();
}

}  // namespace beamcurve
