#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tcl/rng.hpp"
#include "tcl/tensor.hpp"

namespace tcl {

inline constexpr int kUnlabeled = -1;

enum class GeneratorKind { Blobs, Digits };

// Per-domain generation recipe. Digits domains rasterize glyph strokes at
// 16x16 and then push every pixel through bias + contrast * x, optionally lay
// a structured sine background behind the glyph, and add noise. Blobs domains
// draw class Gaussians in 8-d and apply plane rotations, scaling, and a
// translation.
struct DomainSpec {
  GeneratorKind kind = GeneratorKind::Digits;
  int domain_id = 0;
  std::size_t classes = 10;
  std::size_t count = 0;
  double rotation = 0.0;         // radians; blobs: affine plane angle, digits: fixed glyph tilt
  double rotation_jitter = 0.0;  // digits: extra per-sample tilt, U(-r, r)
  double scale = 1.0;            // blobs affine scale
  double shift = 0.0;            // blobs translation magnitude, alternating sign per axis
  double contrast = 1.0;         // digits pixel map bias + contrast * x
  double bias = 0.0;
  int background = 0;            // digits: sine background pattern id, 0 = none
  double noise = 0.0;            // additive gaussian sigma after the transform
};

struct Dataset {
  std::uint32_t domain_id = 0;
  std::uint32_t classes = 0;
  Tensor x;                 // n x dim, values quantized to float32 grid
  std::vector<int> labels;  // n, class index or kUnlabeled

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return x.rank() == 2 ? x.cols() : 0; }
  Tensor row(std::size_t i) const;
};

// Uniform class marginals within one sample: round-robin labels, then a
// Fisher-Yates pass on the provided stream.
std::vector<int> stratified_labels(std::size_t n, std::size_t classes, Rng& rng);

// Per-sample glyph geometry. Draw order per sample is fixed: tilt, scale,
// dx, dy, stroke radius, extra tilt (consumed even at zero amplitude).
struct GlyphJitter {
  double tilt = 0.0;
  double scale = 1.0;
  double dx = 0.0, dy = 0.0;
  double stroke = 1.0;
};
GlyphJitter draw_glyph_jitter(Rng& rng, double base_tilt, double tilt_jitter);

// 16x16 stroke raster of one digit glyph, intensities in [0, 1].
Tensor rasterize_digit(int digit, const GlyphJitter& j);

// Deterministic given the seed: the label list is drawn first, then each
// sample's draws in row order.
Dataset generate_domain(const DomainSpec& spec, std::uint64_t seed);

struct AugmentPolicy {
  bool strong = false;
  bool raster = true;   // pixel-grid ops vs flat-vector ops
  double jitter = 0.02; // blobs weak jitter sigma
  int shift = 1;        // raster weak shift range, pixels
  double gain_lo = 0.8, gain_hi = 1.2;  // strong per-coordinate gain
  double noise = 0.1;   // strong additive sigma
  double rot = 1.05;    // raster strong rotation half-range, radians, 0 disables
  double bg = 1.0;      // raster strong occluding wave max amplitude, 0 disables
  int erase = 4;        // raster strong erase patch edge
};

AugmentPolicy weak_policy(GeneratorKind kind);
AugmentPolicy strong_policy(GeneratorKind kind);

// Raster draw order: flip coin, row shift, col shift, then for strong
// policies gain per pixel, noise per pixel, erase row, erase col. Blob draw
// order: jitter per coordinate, then for strong policies gain and noise per
// coordinate (no flip, shift, or erase on flat vectors).
Tensor augment(const Tensor& x, const AugmentPolicy& policy, Rng& rng);

// Source samples get two weak views; target samples get a strong query view
// and a weak key view. The query view is drawn first.
struct TwoViews {
  Tensor query, key;
};
TwoViews make_views(const Tensor& x, bool is_target, const AugmentPolicy& weak,
                    const AugmentPolicy& strong, Rng& rng);

// A named benchmark: BLOBS-3 (3 domains, 4 classes, 8-d) or DIGITS-5
// (5 domains, 10 classes, 16x16 rasters; domain 2 carries the noisy
// structured background and is the default adaptation target).
struct SuiteSpec {
  std::string name;
  GeneratorKind kind = GeneratorKind::Digits;
  std::size_t domains = 0;
  std::size_t classes = 0;
  std::size_t dim = 0;
  int default_target = 0;

  DomainSpec domain(int domain_id, std::size_t count) const;
};

SuiteSpec suite_blobs3();
SuiteSpec suite_digits5();
SuiteSpec parse_suite(std::string_view name);

// Little-endian binary file: magic "TCLDS001", u32 n, u32 dim, u32 classes,
// u32 domain_id, then n records of i32 label + float32 x dim.
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

// header: label,x0,...,x{dim-1}
void write_dataset_csv(std::ostream& os, const Dataset& ds);

}  // namespace tcl
