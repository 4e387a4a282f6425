#include "beamcurve/pgm.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace beamcurve {

PgmParseError::PgmParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

void save_pgm(const Raster& img, const std::string& path, int bits) {
  double lo = img.minCoeff();
  double hi = img.maxCoeff();
  if (hi <= lo) hi = lo + 1.0;
  save_pgm(img, path, bits, lo, hi);
}

void save_pgm(const Raster& img, const std::string& path, int bits, double lo,
              double hi) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("bits must be 8 or 16");
  if (!(hi > lo)) throw std::invalid_argument("need hi > lo");
  const int maxval = bits == 8 ? 255 : 65535;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n# range " << std::setprecision(17) << lo << " " << hi << "\n"
      << width(img) << " " << height(img) << "\n"
      << maxval << "\n";
  const double scale = maxval / (hi - lo);
  std::vector<unsigned char> row(static_cast<std::size_t>(width(img)) *
                                 (bits == 8 ? 1 : 2));
  for (int y = 0; y < height(img); ++y) {
    for (int x = 0; x < width(img); ++x) {
      double v = (img(y, x) - lo) * scale;
      if (v < 0.0) v = 0.0;
      if (v > maxval) v = maxval;
      const unsigned q = static_cast<unsigned>(std::lround(v));
      if (bits == 8) {
        row[x] = static_cast<unsigned char>(q);
      } else {
        row[2 * x] = static_cast<unsigned char>(q >> 8);  // big-endian
        row[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct Cursor {
  const std::vector<unsigned char>& buf;
  std::size_t pos = 0;
  double range_lo = 0.0;
  double range_hi = 1.0;
  bool have_range = false;

  int peek() const { return pos < buf.size() ? buf[pos] : -1; }
  int get() { return pos < buf.size() ? buf[pos++] : -1; }

  void skip_space_and_comments() {
    for (;;) {
      while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
      if (pos < buf.size() && buf[pos] == '#') {
        std::size_t end = pos;
        while (end < buf.size() && buf[end] != '\n') ++end;
        std::string comment(buf.begin() + pos + 1, buf.begin() + end);
        std::istringstream cs(comment);
        std::string tag;
        double lo, hi;
        if (cs >> tag >> lo >> hi && tag == "range") {
          range_lo = lo;
          range_hi = hi;
          have_range = true;
        }
        pos = end;
      } else {
        return;
      }
    }
  }

  long read_int() {
    skip_space_and_comments();
    if (pos >= buf.size() || !std::isdigit(buf[pos])) {
      throw PgmParseError("expected integer in PGM header", pos);
    }
    long v = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      v = v * 10 + (buf[pos] - '0');
      ++pos;
      if (v > 1'000'000'000L) throw PgmParseError("integer overflow in header", pos);
    }
    return v;
  }
};

}  // namespace

Raster load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  Cursor c{buf};
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') {
    throw PgmParseError("not a binary PGM (missing P5 magic)", 0);
  }
  c.pos = 2;
  const long w = c.read_int();
  const long h = c.read_int();
  const long maxval = c.read_int();
  if (w <= 0 || h <= 0) throw PgmParseError("non-positive dimensions", c.pos);
  if (maxval <= 0 || maxval > 65535) throw PgmParseError("bad maxval", c.pos);
  // Exactly one whitespace byte separates the header from the samples.
  const int sep = c.get();
  if (sep < 0 || !std::isspace(sep)) throw PgmParseError("missing header separator", c.pos);
  const int bytes = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * bytes;
  if (buf.size() - c.pos < need) {
    throw PgmParseError("truncated pixel data", buf.size());
  }
  Raster img(h, w);
  const double lo = c.have_range ? c.range_lo : 0.0;
  const double hi = c.have_range ? c.range_hi : 1.0;
  const double scale = (hi - lo) / maxval;
  const unsigned char* p = buf.data() + c.pos;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      unsigned q;
      if (bytes == 1) {
        q = *p++;
      } else {
        q = static_cast<unsigned>(p[0]) << 8 | p[1];
        p += 2;
      }
      img(y, x) = lo + q * scale;
    }
  }
  return img;
}

}  // namespace beamcurve
