#pragma once

#include "subdeconv/model.hpp"
#include "subdeconv/rng.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace subdeconv {

enum class Shape {
  CubeSurface,
  SphereSurface,
  OrthogonalSegments,
  Spiral,
  TetrahedronEdges,
  CylinderSurface,
};

const std::array<Shape, 6>& geom3d_catalog();
std::string_view shape_name(Shape shape);
/// Throws UnknownShape.
Shape parse_shape(std::string_view name);

struct Geom3D {
  Shape shape;
};
/// 2-D density proportional to non-negative grid intensities (row 0 on top).
struct ImageDensity {
  Matrix grid;
};
/// k uniform digits on {0..k-1} plus their sum mod k.
struct AllKIndependent {
  int k;
};
/// Uniform direction times a radius uniform on [0, 1].
struct Spherical {
  int dim;
};
/// Independent uniform coordinates.
struct Uniform {
  int dim;
};
/// s(t) = F s(t-1) + e(t) with uniform innovations; F must be stable.
struct StereoAR {
  Matrix coefficients;
};

struct SourceSpec {
  std::variant<Geom3D, ImageDensity, AllKIndependent, Spherical, Uniform, StereoAR> kind;

  int dim() const;
};

/// Plain-text PGM (P2) grayscale grid.
ImageDensity read_pgm(std::istream& in);
ImageDensity read_pgm_file(const std::string& path);
ImageDensity letter_density(char letter);

/// Draws T samples before standardization (d x T).
Matrix draw_raw(const SourceSpec& spec, int count, Rng& rng);

/// Zero mean and identity empirical covariance (symmetric inverse square root).
Matrix standardize(const Matrix& raw);

SampleMatrix gen_component(const SourceSpec& spec, int count, RngSeed seed);

struct Source {
  SampleMatrix samples;
  BlockStructure blocks;
};

/// Component 0 draws from `seed` itself, component m > 0 from split(seed, m).
Source gen_source(std::span<const SourceSpec> specs, int count, RngSeed seed);

enum class MixingDistribution { Normal, Uniform01 };

FirFilter gen_random_fir(int dx, int ds, int order, RngSeed seed,
                         MixingDistribution dist = MixingDistribution::Normal);

/// x(t) = sum_l H_l s(t-l); the first L time steps are dropped.
SampleMatrix apply_fir(const FirFilter& filter, const SampleMatrix& source);

/// Haar-distributed orthogonal matrix from the QR decomposition of a normal matrix.
Matrix random_orthogonal(int dim, RngSeed seed);

}  // namespace subdeconv
