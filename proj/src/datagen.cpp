#include "subdeconv/datagen.hpp"

#include "subdeconv/error.hpp"
#include "subdeconv/font.hpp"
#include "subdeconv/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

namespace subdeconv {

namespace {

constexpr std::array<Shape, 6> kCatalog = {Shape::CubeSurface,      Shape::SphereSurface,
                                           Shape::OrthogonalSegments, Shape::Spiral,
                                           Shape::TetrahedronEdges, Shape::CylinderSurface};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_spec(const SourceSpec& spec) {
  std::visit(Overloaded{
                 [](const Geom3D&) {},
                 [](const ImageDensity& img) {
                   if (img.grid.size() == 0) fail(ErrorCode::EmptyImage, "image grid is empty");
                   if (!img.grid.allFinite() || img.grid.minCoeff() < 0.0)
                     fail(ErrorCode::InvalidArgument, "image intensities must be finite and >= 0");
                   if (img.grid.sum() <= 0.0) fail(ErrorCode::EmptyImage, "image density is all zero");
                 },
                 [](const AllKIndependent& a) {
                   if (a.k < 2) fail(ErrorCode::InvalidArgument, "all-k-independent needs k >= 2");
                 },
                 [](const Spherical& s) {
                   if (s.dim < 1) fail(ErrorCode::NonPositiveDimension, "spherical dim must be >= 1");
                 },
                 [](const Uniform& u) {
                   if (u.dim < 1) fail(ErrorCode::NonPositiveDimension, "uniform dim must be >= 1");
                 },
                 [](const StereoAR& ar) {
                   const Matrix& f = ar.coefficients;
                   if (f.rows() < 1 || f.rows() != f.cols())
                     fail(ErrorCode::InvalidArgument, "AR coefficient matrix must be square");
                   const double radius = Eigen::EigenSolver<Matrix>(f, false).eigenvalues().cwiseAbs().maxCoeff();
                   if (!(radius < 1.0))
                     fail(ErrorCode::InvalidArgument, "AR coefficient matrix is not stable");
                 },
             },
             spec.kind);
}

Vector draw_shape(Shape shape, Rng& rng) {
  Vector p(3);
  switch (shape) {
    case Shape::CubeSurface: {
      const auto face = rng.below(6);
      const int axis = static_cast<int>(face / 2);
      p(axis) = (face % 2) ? 1.0 : -1.0;
      p((axis + 1) % 3) = rng.uniform(-1.0, 1.0);
      p((axis + 2) % 3) = rng.uniform(-1.0, 1.0);
      break;
    }
    case Shape::SphereSurface: {
      double n = 0.0;
      do {
        for (int i = 0; i < 3; ++i) p(i) = rng.normal();
        n = p.norm();
      } while (n < 1e-12);
      p /= n;
      break;
    }
    case Shape::OrthogonalSegments: {
      p.setZero();
      const auto axis = rng.below(3);
      p(static_cast<Eigen::Index>(axis)) = rng.uniform(-1.0, 1.0);
      break;
    }
    case Shape::Spiral: {
      // Constant-speed helix: uniform parameter is uniform arclength.
      const double theta = rng.uniform(0.0, 4.0 * std::numbers::pi);
      p << std::cos(theta), std::sin(theta), 0.3 * (theta - 2.0 * std::numbers::pi);
      break;
    }
    case Shape::TetrahedronEdges: {
      static const double v[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
      static const int edges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
      const auto e = rng.below(6);
      const double t = rng.uniform();
      for (int i = 0; i < 3; ++i) p(i) = (1.0 - t) * v[edges[e][0]][i] + t * v[edges[e][1]][i];
      break;
    }
    case Shape::CylinderSurface: {
      // Radius 1, z in [-1, 1]: lateral area 4*pi, caps 2*pi in total.
      const double u = rng.uniform(0.0, 6.0);
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      if (u < 4.0) {
        p << std::cos(phi), std::sin(phi), rng.uniform(-1.0, 1.0);
      } else {
        const double r = std::sqrt(rng.uniform());
        p << r * std::cos(phi), r * std::sin(phi), (u < 5.0) ? 1.0 : -1.0;
      }
      break;
    }
  }
  return p;
}

Matrix draw_image(const Matrix& grid, int count, Rng& rng) {
  const Eigen::Index rows = grid.rows();
  const Eigen::Index cols = grid.cols();
  std::vector<double> cdf(grid.size());
  double acc = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      acc += grid(r, c);
      cdf[r * cols + c] = acc;
    }
  Matrix x(2, count);
  for (int t = 0; t < count; ++t) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto cell = static_cast<Eigen::Index>(it - cdf.begin());
    const Eigen::Index r = cell / cols;
    const Eigen::Index c = cell % cols;
    x(0, t) = static_cast<double>(c) + rng.uniform();
    x(1, t) = static_cast<double>(rows - 1 - r) + rng.uniform();
  }
  return x;
}

}  // namespace

const std::array<Shape, 6>& geom3d_catalog() { return kCatalog; }

std::string_view shape_name(Shape shape) {
  switch (shape) {
    case Shape::CubeSurface: return "cube";
    case Shape::SphereSurface: return "sphere";
    case Shape::OrthogonalSegments: return "segments";
    case Shape::Spiral: return "spiral";
    case Shape::TetrahedronEdges: return "tetrahedron";
    case Shape::CylinderSurface: return "cylinder";
  }
  return "unknown";
}

Shape parse_shape(std::string_view name) {
  for (Shape s : kCatalog)
    if (shape_name(s) == name) return s;
  fail(ErrorCode::UnknownShape, "unknown 3-D shape '" + std::string(name) + "'");
}

int SourceSpec::dim() const {
  return std::visit(Overloaded{
                        [](const Geom3D&) { return 3; },
                        [](const ImageDensity&) { return 2; },
                        [](const AllKIndependent& a) { return a.k + 1; },
                        [](const Spherical& s) { return s.dim; },
                        [](const Uniform& u) { return u.dim; },
                        [](const StereoAR& ar) { return static_cast<int>(ar.coefficients.rows()); },
                    },
                    kind);
}

ImageDensity read_pgm(std::istream& in) {
  std::vector<long> tokens;
  std::string magic;
  std::string line;
  bool have_magic = false;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (!have_magic) {
        magic = tok;
        have_magic = true;
        continue;
      }
      try {
        tokens.push_back(std::stol(tok));
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "non-numeric PGM token '" + tok + "'");
      }
    }
  }
  if (magic != "P2") fail(ErrorCode::ParseError, "only plain PGM (P2) is supported");
  if (tokens.size() < 3) fail(ErrorCode::ParseError, "truncated PGM header");
  const long width = tokens[0];
  const long height = tokens[1];
  const long maxval = tokens[2];
  if (width <= 0 || height <= 0 || maxval <= 0) fail(ErrorCode::ParseError, "bad PGM header");
  if (static_cast<long>(tokens.size()) != 3 + width * height)
    fail(ErrorCode::ParseError, "PGM pixel count does not match its header");
  ImageDensity img{Matrix(height, width)};
  for (long r = 0; r < height; ++r)
    for (long c = 0; c < width; ++c) {
      const long v = tokens[3 + r * width + c];
      if (v < 0 || v > maxval) fail(ErrorCode::ParseError, "PGM value out of range");
      img.grid(r, c) = static_cast<double>(v);
    }
  return img;
}

ImageDensity read_pgm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return read_pgm(in);
}

ImageDensity letter_density(char letter) { return ImageDensity{render_letter(letter)}; }

Matrix draw_raw(const SourceSpec& spec, int count, Rng& rng) {
  if (count < 1) fail(ErrorCode::TooFewSamples, "need T >= 1 samples");
  check_spec(spec);
  return std::visit(
      Overloaded{
          [&](const Geom3D& g) {
            Matrix x(3, count);
            for (int t = 0; t < count; ++t) x.col(t) = draw_shape(g.shape, rng);
            return x;
          },
          [&](const ImageDensity& img) { return draw_image(img.grid, count, rng); },
          [&](const AllKIndependent& a) {
            Matrix x(a.k + 1, count);
            for (int t = 0; t < count; ++t) {
              std::uint64_t sum = 0;
              for (int i = 0; i < a.k; ++i) {
                const auto u = rng.below(static_cast<std::uint64_t>(a.k));
                x(i, t) = static_cast<double>(u);
                sum += u;
              }
              x(a.k, t) = static_cast<double>(sum % static_cast<std::uint64_t>(a.k));
            }
            return x;
          },
          [&](const Spherical& s) {
            Matrix x(s.dim, count);
            for (int t = 0; t < count; ++t) {
              Vector v(s.dim);
              double n = 0.0;
              do {
                for (int i = 0; i < s.dim; ++i) v(i) = rng.normal();
                n = v.norm();
              } while (n < 1e-12);
              x.col(t) = v * (rng.uniform() / n);
            }
            return x;
          },
          [&](const Uniform& u) {
            Matrix x(u.dim, count);
            for (int t = 0; t < count; ++t)
              for (int i = 0; i < u.dim; ++i) x(i, t) = rng.uniform(-1.0, 1.0);
            return x;
          },
          [&](const StereoAR& ar) {
            const Matrix& f = ar.coefficients;
            const Eigen::Index d = f.rows();
            constexpr int kBurnIn = 200;
            Vector state = Vector::Zero(d);
            Matrix x(d, count);
            for (int t = -kBurnIn; t < count; ++t) {
              Vector e(d);
              for (Eigen::Index i = 0; i < d; ++i) e(i) = rng.uniform(-1.0, 1.0);
              state = f * state + e;
              if (t >= 0) x.col(t) = state;
            }
            return x;
          },
      },
      spec.kind);
}

Matrix standardize(const Matrix& raw) {
  const Vector mean = raw.rowwise().mean();
  const Matrix centered = raw.colwise() - mean;
  const Matrix cov = kernels::centered_covariance(raw);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 1e-12 * std::max(1.0, lambda.maxCoeff())))
    fail(ErrorCode::DegenerateSamples, "component covariance is singular; cannot standardize");
  const Matrix inv_sqrt =
      eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return inv_sqrt * centered;
}

SampleMatrix gen_component(const SourceSpec& spec, int count, RngSeed seed) {
  Rng rng(seed);
  return SampleMatrix(standardize(draw_raw(spec, count, rng)));
}

Source gen_source(std::span<const SourceSpec> specs, int count, RngSeed seed) {
  if (specs.empty()) fail(ErrorCode::EmptyPartition, "need at least one source component");
  std::vector<int> dims;
  for (const auto& s : specs) dims.push_back(s.dim());
  BlockStructure blocks = validate_block_structure(dims);
  Matrix data(blocks.total_dim(), count);
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const RngSeed stream = (m == 0) ? seed : split(seed, m);
    const SampleMatrix comp = gen_component(specs[m], count, stream);
    data.middleRows(blocks.offset(static_cast<int>(m)), comp.dim()) = comp.data();
  }
  return Source{SampleMatrix(std::move(data)), std::move(blocks)};
}

FirFilter gen_random_fir(int dx, int ds, int order, RngSeed seed, MixingDistribution dist) {
  if (dx < 1 || ds < 1) fail(ErrorCode::NonPositiveDimension, "FIR dimensions must be >= 1");
  if (order < 0) fail(ErrorCode::InvalidArgument, "FIR order must be >= 0");
  Rng rng(seed);
  std::vector<Matrix> taps;
  for (int l = 0; l <= order; ++l) {
    Matrix h(dx, ds);
    for (int i = 0; i < dx; ++i)
      for (int j = 0; j < ds; ++j)
        h(i, j) = (dist == MixingDistribution::Normal) ? rng.normal() : rng.uniform();
    taps.push_back(std::move(h));
  }
  return FirFilter(std::move(taps));
}

SampleMatrix apply_fir(const FirFilter& filter, const SampleMatrix& source) {
  if (source.dim() != filter.cols())
    fail(ErrorCode::DimMismatch, "source dim does not match the filter's column count");
  if (source.count() <= filter.order())
    fail(ErrorCode::TooFewSamples, "need more than L samples to convolve");
  return SampleMatrix(kernels::fir_convolve(filter.taps(), source.data()));
}

Matrix random_orthogonal(int dim, RngSeed seed) {
  if (dim < 1) fail(ErrorCode::NonPositiveDimension, "orthogonal matrix dim must be >= 1");
  Rng rng(seed);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

}  // namespace subdeconv
