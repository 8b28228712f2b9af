#include "tcl/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "tcl/check.hpp"
#include "tcl/text.hpp"

namespace tcl {

namespace {

inline double quantize32(double v) { return static_cast<double>(static_cast<float>(v)); }

constexpr double kPi = 3.14159265358979323846;

// seven-segment endpoints on a 16x16 canvas: top bar y=2, middle y=8,
// bottom y=14, left x=4, right x=12
struct Seg {
  double x0, y0, x1, y1;
};
constexpr Seg kSegments[7] = {
    {4, 2, 12, 2},    // A top
    {12, 2, 12, 8},   // B upper right
    {12, 8, 12, 14},  // C lower right
    {4, 14, 12, 14},  // D bottom
    {4, 8, 4, 14},    // E lower left
    {4, 2, 4, 8},     // F upper left
    {4, 8, 12, 8},    // G middle
};
constexpr std::uint8_t kDigitMask[10] = {
    0b0111111,  // 0: ABCDEF
    0b0000110,  // 1: BC
    0b1011011,  // 2: ABDEG
    0b1001111,  // 3: ABCDG
    0b1100110,  // 4: BCFG
    0b1101101,  // 5: ACDFG
    0b1111101,  // 6: ACDEFG
    0b0000111,  // 7: ABC
    0b1111111,  // 8: all
    0b1101111,  // 9: ABCDFG
};

double point_segment_dist(double px, double py, const Seg& s) {
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double wx = px - s.x0, wy = py - s.y0;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

constexpr std::size_t kSide = 16;

const double kBlobAnchors[4][8] = {
    {1.2, 0.9, 0.0, 0.0, -0.6, 0.0, 0.4, 0.0},
    {-1.1, 0.0, 1.0, 0.5, 0.0, 0.6, -0.4, 0.0},
    {0.0, -1.2, -0.8, 0.9, 0.5, 0.0, 0.0, 0.7},
    {0.5, 0.4, 0.0, -1.1, -0.9, -0.7, 0.6, -0.5},
};
constexpr double kBlobSigma = 0.35;
constexpr std::size_t kBlobDim = 8;

}  // namespace

Tensor Dataset::row(std::size_t i) const {
  check_arg(i < size(), "dataset: row index out of range");
  Tensor r = Tensor::zeros({1, dim()});
  for (std::size_t j = 0; j < dim(); ++j) r.at(0, j) = x.at(i, j);
  return r;
}

std::vector<int> stratified_labels(std::size_t n, std::size_t classes, Rng& rng) {
  check_arg(classes >= 1, "labels: need at least one class");
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
  rng.shuffle(labels);
  return labels;
}

GlyphJitter draw_glyph_jitter(Rng& rng, double base_tilt, double tilt_jitter) {
  GlyphJitter j;
  j.tilt = rng.uniform(-0.1, 0.1);
  j.scale = rng.uniform(0.9, 1.1);
  j.dx = rng.uniform(-1.0, 1.0);
  j.dy = rng.uniform(-1.0, 1.0);
  j.stroke = rng.uniform(0.8, 1.3);
  j.tilt += base_tilt + rng.uniform(-tilt_jitter, tilt_jitter);
  return j;
}

Tensor rasterize_digit(int digit, const GlyphJitter& j) {
  check_arg(digit >= 0 && digit < 10, "glyph: digit must be 0..9");
  const double c = std::cos(j.tilt), s = std::sin(j.tilt);
  Seg segs[7];
  int nsegs = 0;
  for (int k = 0; k < 7; ++k) {
    if (!(kDigitMask[digit] >> k & 1)) continue;
    const Seg& base = kSegments[k];
    auto tx = [&](double x, double y) { return 8.0 + j.scale * (c * (x - 8.0) - s * (y - 8.0)) + j.dx; };
    auto ty = [&](double x, double y) { return 8.0 + j.scale * (s * (x - 8.0) + c * (y - 8.0)) + j.dy; };
    segs[nsegs++] = {tx(base.x0, base.y0), ty(base.x0, base.y0), tx(base.x1, base.y1),
                     ty(base.x1, base.y1)};
  }

  constexpr double aa = 0.7;  // anti-alias ramp width in pixels
  Tensor img = Tensor::zeros({1, kSide * kSide});
  for (std::size_t r = 0; r < kSide; ++r)
    for (std::size_t col = 0; col < kSide; ++col) {
      const double px = static_cast<double>(col) + 0.5, py = static_cast<double>(r) + 0.5;
      double d = 1e9;
      for (int k = 0; k < nsegs; ++k) d = std::min(d, point_segment_dist(px, py, segs[k]));
      img.values[r * kSide + col] = std::clamp(1.0 - (d - j.stroke) / aa, 0.0, 1.0);
    }
  return img;
}

Dataset generate_domain(const DomainSpec& spec, std::uint64_t seed) {
  Dataset ds;
  ds.domain_id = static_cast<std::uint32_t>(spec.domain_id);
  ds.classes = static_cast<std::uint32_t>(spec.classes);
  Rng rng(seed);
  ds.labels = stratified_labels(spec.count, spec.classes, rng);

  if (spec.kind == GeneratorKind::Digits) {
    check_arg(spec.classes <= 10, "digits: at most 10 glyph classes");
    const std::size_t dim = kSide * kSide;
    ds.x = Tensor::zeros({spec.count, dim});
    for (std::size_t i = 0; i < spec.count; ++i) {
      const GlyphJitter jit = draw_glyph_jitter(rng, spec.rotation, spec.rotation_jitter);
      Tensor img = rasterize_digit(ds.labels[i], jit);
      for (double& v : img.values) v = spec.bias + spec.contrast * v;
      if (spec.background > 0) {
        // per-sample severity, skewed heavy with a thin easy tail
        const double amp = 0.95 * std::sqrt(rng.uniform());
        const double k1 = 1.0 + static_cast<double>(rng.below(3));
        const double k2 = 1.0 + static_cast<double>(rng.below(3));
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        for (std::size_t r = 0; r < kSide; ++r)
          for (std::size_t col = 0; col < kSide; ++col) {
            const double wave =
                std::sin(2.0 * kPi * (k1 * static_cast<double>(r) + k2 * static_cast<double>(col)) /
                             static_cast<double>(kSide) +
                         phase);
            const double bg = amp * (0.5 + 0.5 * wave);
            double& v = img.values[r * kSide + col];
            v = std::max(v, bg);
          }
      }
      if (spec.noise > 0.0)
        for (double& v : img.values) v += rng.gaussian(0.0, spec.noise);
      for (std::size_t jx = 0; jx < dim; ++jx)
        ds.x.at(i, jx) = quantize32(std::clamp(img.values[jx], 0.0, 1.0));
    }
    return ds;
  }

  check_arg(spec.classes == 4, "blobs: the anchor table has exactly 4 classes");
  ds.x = Tensor::zeros({spec.count, kBlobDim});
  const double angles[4] = {spec.rotation, 0.7 * spec.rotation, 1.3 * spec.rotation,
                            0.5 * spec.rotation};
  for (std::size_t i = 0; i < spec.count; ++i) {
    double z[kBlobDim];
    const auto lbl = static_cast<std::size_t>(ds.labels[i]);
    for (std::size_t j = 0; j < kBlobDim; ++j)
      z[j] = kBlobAnchors[lbl][j] + rng.gaussian(0.0, kBlobSigma);
    for (int p = 0; p < 4; ++p) {  // rotate the (2p, 2p+1) plane
      const double c = std::cos(angles[p]), s = std::sin(angles[p]);
      const double a = z[2 * p], b = z[2 * p + 1];
      z[2 * p] = c * a - s * b;
      z[2 * p + 1] = s * a + c * b;
    }
    for (std::size_t j = 0; j < kBlobDim; ++j) {
      double v = spec.scale * z[j] + spec.shift * (j % 2 == 0 ? 1.0 : -1.0);
      if (spec.noise > 0.0) v += rng.gaussian(0.0, spec.noise);
      ds.x.at(i, j) = quantize32(v);
    }
  }
  return ds;
}

AugmentPolicy weak_policy(GeneratorKind kind) {
  AugmentPolicy p;
  p.raster = kind == GeneratorKind::Digits;
  return p;
}

AugmentPolicy strong_policy(GeneratorKind kind) {
  AugmentPolicy p = weak_policy(kind);
  p.strong = true;
  return p;
}

Tensor augment(const Tensor& x, const AugmentPolicy& policy, Rng& rng) {
  check_arg(x.rank() == 2 && x.rows() == 1, "augment: expected a 1 x dim sample");
  const std::size_t dim = x.cols();
  Tensor out = x;

  if (!policy.raster) {
    for (std::size_t j = 0; j < dim; ++j) out.values[j] += rng.gaussian(0.0, policy.jitter);
    if (policy.strong) {
      for (std::size_t j = 0; j < dim; ++j)
        out.values[j] *= rng.uniform(policy.gain_lo, policy.gain_hi);
      for (std::size_t j = 0; j < dim; ++j) out.values[j] += rng.gaussian(0.0, policy.noise);
    }
    return out;
  }

  // no mirror flips: glyph identity is not mirror invariant
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim))));
  check_arg(side * side == dim, "augment: raster sample is not square");
  const int dr = static_cast<int>(rng.below(2 * policy.shift + 1)) - policy.shift;
  const int dc = static_cast<int>(rng.below(2 * policy.shift + 1)) - policy.shift;
  Tensor shifted = Tensor::zeros({1, dim});
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const long sr = static_cast<long>(r) - dr;
      const long sc = static_cast<long>(c) - dc;
      if (sr < 0 || sr >= static_cast<long>(side) || sc < 0 || sc >= static_cast<long>(side))
        continue;
      shifted.values[r * side + c] = out.values[static_cast<std::size_t>(sr) * side + sc];
    }
  out = std::move(shifted);

  if (policy.strong) {
    if (policy.bg > 0.0) {
      // occlude with a random wave from the background family so invariance to it
      // is learnable from view pairs
      const double amp = rng.uniform(0.0, policy.bg);
      const double k1 = 1.0 + static_cast<double>(rng.below(3));
      const double k2 = 1.0 + static_cast<double>(rng.below(3));
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
          const double wave =
              std::sin(2.0 * kPi * (k1 * static_cast<double>(r) + k2 * static_cast<double>(c)) /
                           static_cast<double>(side) +
                       phase);
          double& v = out.values[r * side + c];
          v = std::max(v, amp * (0.5 + 0.5 * wave));
        }
    }
    for (std::size_t j = 0; j < dim; ++j)
      out.values[j] *= rng.uniform(policy.gain_lo, policy.gain_hi);
    for (std::size_t j = 0; j < dim; ++j) out.values[j] += rng.gaussian(0.0, policy.noise);
    const auto patch = std::min<std::size_t>(static_cast<std::size_t>(policy.erase), side);
    const std::size_t top = rng.below(side - patch + 1);
    const std::size_t left = rng.below(side - patch + 1);
    for (std::size_t r = top; r < top + patch; ++r)
      for (std::size_t c = left; c < left + patch; ++c) out.values[r * side + c] = 0.0;
  }
  return out;
}

TwoViews make_views(const Tensor& x, bool is_target, const AugmentPolicy& weak,
                    const AugmentPolicy& strong, Rng& rng) {
  TwoViews v;
  v.query = augment(x, is_target ? strong : weak, rng);
  v.key = augment(x, weak, rng);
  return v;
}

DomainSpec SuiteSpec::domain(int domain_id, std::size_t count) const {
  check_arg(domain_id >= 0 && static_cast<std::size_t>(domain_id) < domains,
            "suite: domain id out of range");
  DomainSpec d;
  d.kind = kind;
  d.domain_id = domain_id;
  d.classes = classes;
  d.count = count;
  if (kind == GeneratorKind::Blobs) {
    switch (domain_id) {
      case 0: break;
      case 1:
        d.rotation = 0.5;
        d.scale = 1.1;
        d.shift = 0.3;
        d.noise = 0.02;
        break;
      case 2:
        d.rotation = 0.9;
        d.scale = 0.85;
        d.shift = 0.4;
        d.noise = 0.05;
        break;
      default: break;
    }
    return d;
  }
  switch (domain_id) {
    case 0: break;  // clean
    case 1:         // inverted
      d.bias = 1.0;
      d.contrast = -1.0;
      break;
    case 2:  // glyphs behind a bright occluding background, the target
      d.background = 1;
      d.noise = 0.05;
      break;
    case 3:  // per-sample tilt up to 15 degrees
      d.rotation_jitter = 0.2618;
      break;
    case 4:  // low contrast
      d.bias = 0.25;
      d.contrast = 0.4;
      break;
    default: break;
  }
  return d;
}

SuiteSpec suite_blobs3() {
  SuiteSpec s;
  s.name = "BLOBS-3";
  s.kind = GeneratorKind::Blobs;
  s.domains = 3;
  s.classes = 4;
  s.dim = kBlobDim;
  s.default_target = 2;
  return s;
}

SuiteSpec suite_digits5() {
  SuiteSpec s;
  s.name = "DIGITS-5";
  s.kind = GeneratorKind::Digits;
  s.domains = 5;
  s.classes = 10;
  s.dim = kSide * kSide;
  s.default_target = 2;
  return s;
}

SuiteSpec parse_suite(std::string_view name) {
  if (name == "BLOBS-3") return suite_blobs3();
  if (name == "DIGITS-5") return suite_digits5();
  throw std::invalid_argument("suite: expected BLOBS-3 or DIGITS-5, got '" + std::string(name) +
                              "'");
}

// ---- dataset file io --------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'C', 'L', 'D', 'S', '0', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

struct Cursor {
  const char* p;
  const char* end;
  void need(std::size_t n) const { check_data(p + n <= end, "dataset: truncated file"); }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() {
    need(4);
    float v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
};

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  check_arg(ds.x.rank() == 2, "dataset: x must be n x dim");
  check_arg(ds.x.rows() == ds.labels.size(), "dataset: one label per row");
  check_arg(ds.classes >= 1, "dataset: class count must be positive");
  const std::size_t n = ds.size(), dim = ds.x.cols();

  std::string buf;
  buf.append(kMagic, 8);
  put_u32(buf, static_cast<std::uint32_t>(n));
  put_u32(buf, static_cast<std::uint32_t>(dim));
  put_u32(buf, ds.classes);
  put_u32(buf, ds.domain_id);
  for (std::size_t i = 0; i < n; ++i) {
    check_arg(ds.labels[i] == kUnlabeled ||
                  (ds.labels[i] >= 0 && static_cast<std::uint32_t>(ds.labels[i]) < ds.classes),
              "dataset: label out of range");
    put_u32(buf, static_cast<std::uint32_t>(ds.labels[i]));
    for (std::size_t j = 0; j < dim; ++j) {
      const auto v = static_cast<float>(ds.x.at(i, j));
      char b[4];
      std::memcpy(b, &v, 4);
      buf.append(b, 4);
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  check_data(os.good(), "dataset: cannot open '" + path.string() + "' for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  check_data(os.good(), "dataset: short write to '" + path.string() + "'");
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "dataset: cannot open '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  check_data(buf.size() >= 8, "dataset: truncated file");
  check_data(std::memcmp(buf.data(), kMagic, 5) == 0, "dataset: bad magic");
  check_data(std::memcmp(buf.data() + 5, kMagic + 5, 3) == 0, "dataset: unsupported version");

  Cursor c{buf.data() + 8, buf.data() + buf.size()};
  const std::uint32_t n = c.u32();
  const std::uint32_t dim = c.u32();
  Dataset ds;
  ds.classes = c.u32();
  ds.domain_id = c.u32();
  check_data(ds.classes >= 1, "dataset: class count must be positive");
  check_data(dim >= 1, "dataset: dimension must be positive");
  check_data(n <= (1u << 24) && dim <= (1u << 20), "dataset: implausible header sizes");

  ds.x = Tensor::zeros({n, dim});
  ds.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::int32_t lbl = c.i32();
    check_data(lbl == kUnlabeled || (lbl >= 0 && static_cast<std::uint32_t>(lbl) < ds.classes),
               "dataset: label out of range");
    ds.labels[i] = lbl;
    for (std::uint32_t j = 0; j < dim; ++j) {
      const float v = c.f32();
      check_data(std::isfinite(v), "dataset: non-finite value");
      ds.x.at(i, j) = static_cast<double>(v);
    }
  }
  check_data(c.p == c.end, "dataset: trailing bytes after last record");
  return ds;
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  os << "label";
  for (std::size_t j = 0; j < ds.dim(); ++j) os << ",x" << j;
  os << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << ds.labels[i];
    for (std::size_t j = 0; j < ds.dim(); ++j) os << "," << fmt_double(ds.x.at(i, j));
    os << "\n";
  }
}

}  // namespace tcl
