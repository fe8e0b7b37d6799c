#pragma once

// Nonnegative forward operators H with the three access patterns the sweep
// needs: full application, sparse row access and column sums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "hrlsgs/errors.hpp"

namespace hrlsgs {

/// Weights below this are treated as underflow and dropped from rows.
inline constexpr double kRowWeightFloor = 1e-14;

/// Sparse row: strictly increasing column ids and their positive weights.
struct OperatorRow {
  std::vector<std::size_t> indices;
  std::vector<double> weights;

  bool empty() const noexcept { return indices.empty(); }
  std::size_t size() const noexcept { return indices.size(); }
  void clear() noexcept {
    indices.clear();
    weights.clear();
  }
};

namespace detail {

// Sort by column, merge duplicates, drop underflowed weights.
inline void canonicalize_row(std::vector<std::pair<std::size_t, double>>& taps, OperatorRow& out) {
  std::sort(taps.begin(), taps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out.clear();
  for (std::size_t k = 0; k < taps.size();) {
    const std::size_t j = taps[k].first;
    double w = 0.0;
    for (; k < taps.size() && taps[k].first == j; ++k) w += taps[k].second;
    if (w >= kRowWeightFloor) {
      out.indices.push_back(j);
      out.weights.push_back(w);
    }
  }
}

}  // namespace detail

/// Abstract nonnegative m x n operator.
class ForwardOperator {
 public:
  virtual ~ForwardOperator() = default;

  virtual std::size_t rows() const noexcept = 0;
  virtual std::size_t cols() const noexcept = 0;
  virtual std::string describe() const = 0;

  /// out_i = sum_j h_ij x_j, no intensity scale.
  virtual void apply_into(std::span<const double> x, std::span<double> out) const {
    OperatorRow r;
    for (std::size_t i = 0; i < rows(); ++i) {
      row_into(i, r);
      double acc = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) acc += r.weights[k] * x[r.indices[k]];
      out[i] = acc;
    }
  }

  /// Fill `out` with row i; `out` is reused to avoid per-row allocation.
  virtual void row_into(std::size_t i, OperatorRow& out) const = 0;

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != cols()) {
      throw ParameterError("apply: input length " + std::to_string(x.size()) + " does not match " +
                           std::to_string(cols()) + " columns");
    }
    std::vector<double> out(rows());
    apply_into(x, out);
    return out;
  }

  OperatorRow row(std::size_t i) const {
    if (i >= rows()) throw ParameterError("row: index " + std::to_string(i) + " out of range");
    OperatorRow r;
    row_into(i, r);
    return r;
  }

  /// sum_i h_ij, computed once.
  const std::vector<double>& col_sums() const {
    std::call_once(col_sums_once_, [this] { col_sums_ = compute_col_sums(); });
    return col_sums_;
  }

 protected:
  virtual std::vector<double> compute_col_sums() const {
    std::vector<double> cs(cols(), 0.0);
    OperatorRow r;
    for (std::size_t i = 0; i < rows(); ++i) {
      row_into(i, r);
      for (std::size_t k = 0; k < r.size(); ++k) cs[r.indices[k]] += r.weights[k];
    }
    return cs;
  }

 private:
  mutable std::once_flag col_sums_once_;
  mutable std::vector<double> col_sums_;
};

class IdentityOperator final : public ForwardOperator {
 public:
  explicit IdentityOperator(std::size_t n) : n_(n) {
    if (n == 0) throw ParameterError("IdentityOperator: size must be positive");
  }
  std::size_t rows() const noexcept override { return n_; }
  std::size_t cols() const noexcept override { return n_; }
  std::string describe() const override { return "identity(" + std::to_string(n_) + ")"; }
  void apply_into(std::span<const double> x, std::span<double> out) const override {
    std::copy(x.begin(), x.end(), out.begin());
  }
  void row_into(std::size_t i, OperatorRow& out) const override {
    out.clear();
    out.indices.push_back(i);
    out.weights.push_back(1.0);
  }

 protected:
  std::vector<double> compute_col_sums() const override { return std::vector<double>(n_, 1.0); }

 private:
  std::size_t n_;
};

/// Row-major 2-D stencil with odd dimensions, centered.
struct Kernel2D {
  std::size_t height = 1;
  std::size_t width = 1;
  std::vector<double> data{1.0};

  double mass() const noexcept {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
  }
};

/// Normalized isotropic Gaussian stencil of odd size.
inline Kernel2D gaussian_kernel(std::size_t size, double sigma) {
  if (size % 2 == 0 || size == 0) throw ParameterError("gaussian_kernel: size must be odd");
  if (!(sigma > 0.0)) throw ParameterError("gaussian_kernel: sigma must be positive");
  Kernel2D k{size, size, std::vector<double>(size * size)};
  const double c = static_cast<double>(size / 2);
  double total = 0.0;
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) {
      const double da = static_cast<double>(a) - c;
      const double db = static_cast<double>(b) - c;
      const double v = std::exp(-(da * da + db * db) / (2.0 * sigma * sigma));
      k.data[a * size + b] = v;
      total += v;
    }
  }
  for (double& v : k.data) v /= total;
  return k;
}

enum class Boundary { Periodic, ZeroPad };

/// 2-D convolution y(r,c) = sum_{a,b} k(a,b) x(r - a + ca, c - b + cb).
/// Rows are generated on the fly from the stencil.
class ConvolutionOperator final : public ForwardOperator {
 public:
  ConvolutionOperator(Kernel2D kernel, std::size_t height, std::size_t width, Boundary boundary = Boundary::Periodic)
      : kernel_(std::move(kernel)), height_(height), width_(width), boundary_(boundary) {
    if (height == 0 || width == 0) throw ParameterError("ConvolutionOperator: empty image shape");
    if (kernel_.height % 2 == 0 || kernel_.width % 2 == 0) {
      throw ParameterError("ConvolutionOperator: kernel dimensions must be odd");
    }
    if (kernel_.data.size() != kernel_.height * kernel_.width) {
      throw ParameterError("ConvolutionOperator: kernel data size mismatch");
    }
    for (double v : kernel_.data) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("ConvolutionOperator: kernel entries must be >= 0");
    }
    if (!(kernel_.mass() > 0.0)) throw ParameterError("ConvolutionOperator: kernel must have positive mass");
    for (std::size_t a = 0; a < kernel_.height; ++a) {
      for (std::size_t b = 0; b < kernel_.width; ++b) {
        const double w = kernel_.data[a * kernel_.width + b];
        if (w > 0.0) {
          taps_.push_back({static_cast<long>(a) - static_cast<long>(kernel_.height / 2),
                           static_cast<long>(b) - static_cast<long>(kernel_.width / 2), w});
        }
      }
    }
  }

  std::size_t rows() const noexcept override { return height_ * width_; }
  std::size_t cols() const noexcept override { return height_ * width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  Boundary boundary() const noexcept { return boundary_; }
  const Kernel2D& kernel() const noexcept { return kernel_; }

  std::string describe() const override {
    return "convolution(" + std::to_string(kernel_.height) + "x" + std::to_string(kernel_.width) + " on " +
           std::to_string(height_) + "x" + std::to_string(width_) +
           (boundary_ == Boundary::Periodic ? ", periodic)" : ", zero-pad)");
  }

  void apply_into(std::span<const double> x, std::span<double> out) const override {
    const long H = static_cast<long>(height_), W = static_cast<long>(width_);
    for (long r = 0; r < H; ++r) {
      for (long c = 0; c < W; ++c) {
        double acc = 0.0;
        for (const auto& t : taps_) {
          long rr = r - t.dr, cc = c - t.dc;
          if (!wrap(rr, H) || !wrap(cc, W)) continue;
          acc += t.w * x[static_cast<std::size_t>(rr * W + cc)];
        }
        out[static_cast<std::size_t>(r * W + c)] = acc;
      }
    }
  }

  void row_into(std::size_t i, OperatorRow& out) const override {
    const long H = static_cast<long>(height_), W = static_cast<long>(width_);
    const long r = static_cast<long>(i) / W, c = static_cast<long>(i) % W;
    thread_local std::vector<std::pair<std::size_t, double>> scratch;
    scratch.clear();
    for (const auto& t : taps_) {
      long rr = r - t.dr, cc = c - t.dc;
      if (!wrap(rr, H) || !wrap(cc, W)) continue;
      scratch.emplace_back(static_cast<std::size_t>(rr * W + cc), t.w);
    }
    detail::canonicalize_row(scratch, out);
  }

 protected:
  std::vector<double> compute_col_sums() const override {
    if (boundary_ == Boundary::Periodic) {
      double m = 0.0;
      for (const auto& t : taps_) m += t.w;
      return std::vector<double>(rows(), m);
    }
    return ForwardOperator::compute_col_sums();
  }

 private:
  struct Tap {
    long dr, dc;
    double w;
  };

  bool wrap(long& v, long n) const noexcept {
    if (v >= 0 && v < n) return true;
    if (boundary_ == Boundary::ZeroPad) return false;
    v %= n;
    if (v < 0) v += n;
    return true;
  }

  Kernel2D kernel_;
  std::size_t height_, width_;
  Boundary boundary_;
  std::vector<Tap> taps_;
};

/// Materialized sparse operator in compressed-row form.
class SparseOperator : public ForwardOperator {
 public:
  SparseOperator(std::size_t ncols, const std::vector<OperatorRow>& rows) : ncols_(ncols) {
    if (ncols == 0) throw ParameterError("SparseOperator: need at least one column");
    row_ptr_.reserve(rows.size() + 1);
    row_ptr_.push_back(0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.indices.size() != r.weights.size()) throw ParameterError("SparseOperator: row length mismatch");
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (r.indices[k] >= ncols) throw ParameterError("SparseOperator: column index out of range");
        if (k > 0 && r.indices[k] <= r.indices[k - 1]) {
          throw ParameterError("SparseOperator: row indices must be strictly increasing");
        }
        if (!(r.weights[k] > 0.0) || !std::isfinite(r.weights[k])) {
          throw ParameterError("SparseOperator: row weights must be positive");
        }
        indices_.push_back(r.indices[k]);
        weights_.push_back(r.weights[k]);
      }
      row_ptr_.push_back(indices_.size());
    }
  }

  /// Row-major dense m x n matrix; zeros are dropped.
  static std::shared_ptr<SparseOperator> from_dense(std::size_t m, std::size_t n, std::span<const double> values) {
    if (values.size() != m * n) throw ParameterError("from_dense: value count does not match m x n");
    std::vector<OperatorRow> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = values[i * n + j];
        if (v < 0.0) throw ParameterError("from_dense: negative entry");
        if (v >= kRowWeightFloor) {
          rows[i].indices.push_back(j);
          rows[i].weights.push_back(v);
        }
      }
    }
    return std::make_shared<SparseOperator>(n, rows);
  }

  std::size_t rows() const noexcept override { return row_ptr_.size() - 1; }
  std::size_t cols() const noexcept override { return ncols_; }
  std::size_t nonzeros() const noexcept { return indices_.size(); }
  std::string describe() const override {
    return "sparse(" + std::to_string(rows()) + "x" + std::to_string(ncols_) + ", nnz=" + std::to_string(nonzeros()) +
           ")";
  }

  void apply_into(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += weights_[k] * x[indices_[k]];
      out[i] = acc;
    }
  }

  void row_into(std::size_t i, OperatorRow& out) const override {
    out.indices.assign(indices_.begin() + static_cast<long>(row_ptr_[i]),
                       indices_.begin() + static_cast<long>(row_ptr_[i + 1]));
    out.weights.assign(weights_.begin() + static_cast<long>(row_ptr_[i]),
                       weights_.begin() + static_cast<long>(row_ptr_[i + 1]));
  }

 private:
  std::size_t ncols_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> indices_;
  std::vector<double> weights_;
};

/// Parallel-beam acquisition geometry on a unit-pixel grid centered at the origin.
///
/// Pixel (r, c) covers x in [c - W/2, c + 1 - W/2) and y in (H/2 - r - 1, H/2 - r].
/// A ray at angle a and detector offset t is {t n + s d}, d = (cos a, sin a),
/// n = (-sin a, cos a); detector k sits at t = (k - (D - 1)/2) * spacing.
struct ProjectorGeometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> angles;
  std::size_t detector_count = 0;
  double detector_spacing = 1.0;

  /// Detector count used when none is configured: ceil(width * sqrt 2).
  static std::size_t default_detectors(std::size_t width) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(width) * std::numbers::sqrt2));
  }

  /// `count` angles uniformly spread over [0, pi).
  static std::vector<double> uniform_angles(std::size_t count) {
    std::vector<double> a(count);
    for (std::size_t k = 0; k < count; ++k) a[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    return a;
  }
};

inline void write_geometry(std::ostream& os, const ProjectorGeometry& g) {
  os << "# hrlsgs projector geometry v1\n";
  os << "height " << g.height << "\n";
  os << "width " << g.width << "\n";
  os << "detector_count " << g.detector_count << "\n";
  os << std::setprecision(17) << "detector_spacing " << g.detector_spacing << "\n";
  os << "angles " << g.angles.size() << "\n";
  for (double a : g.angles) os << std::setprecision(17) << a << "\n";
}

inline ProjectorGeometry read_geometry(std::istream& is) {
  ProjectorGeometry g;
  std::string line;
  std::size_t n_angles = 0;
  bool have_angles = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "height") ls >> g.height;
    else if (key == "width") ls >> g.width;
    else if (key == "detector_count") ls >> g.detector_count;
    else if (key == "detector_spacing") ls >> g.detector_spacing;
    else if (key == "angles") {
      ls >> n_angles;
      have_angles = true;
      break;
    } else {
      throw ConfigError("read_geometry: unknown key '" + key + "'");
    }
    if (ls.fail()) throw ConfigError("read_geometry: malformed line '" + line + "'");
  }
  if (!have_angles) throw ConfigError("read_geometry: missing angle list");
  g.angles.resize(n_angles);
  for (auto& a : g.angles) {
    if (!(is >> a)) throw ConfigError("read_geometry: truncated angle list");
  }
  return g;
}

/// Sparse parallel-beam projector with exact ray-pixel intersection lengths.
class ProjectorOperator final : public SparseOperator {
 public:
  struct Ray {
    std::size_t angle;
    std::size_t detector;
  };

  ProjectorOperator(ProjectorGeometry geometry, const std::vector<OperatorRow>& rows, std::vector<Ray> rays,
                    std::vector<Ray> dropped)
      : SparseOperator(geometry.height * geometry.width, rows),
        geometry_(std::move(geometry)),
        rays_(std::move(rays)),
        dropped_(std::move(dropped)) {}

  const ProjectorGeometry& geometry() const noexcept { return geometry_; }
  /// (angle, detector) of each kept row, in row order.
  const std::vector<Ray>& rays() const noexcept { return rays_; }
  /// Rays that missed the grid and were dropped.
  const std::vector<Ray>& dropped() const noexcept { return dropped_; }

  std::string describe() const override {
    return "projector(" + std::to_string(geometry_.height) + "x" + std::to_string(geometry_.width) + ", " +
           std::to_string(geometry_.angles.size()) + " angles, " + std::to_string(geometry_.detector_count) +
           " detectors, " + std::to_string(rows()) + " rays)";
  }

 private:
  ProjectorGeometry geometry_;
  std::vector<Ray> rays_;
  std::vector<Ray> dropped_;
};

/// Intersection lengths of one ray with the pixel grid (Siddon-style traversal).
inline OperatorRow trace_ray(const ProjectorGeometry& g, double angle, double offset) {
  const double H = static_cast<double>(g.height), W = static_cast<double>(g.width);
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double px = -offset * dy, py = offset * dx;  // t * n
  constexpr double parallel_eps = 1e-15;
  constexpr double inf = std::numeric_limits<double>::infinity();

  double s_lo = -inf, s_hi = inf;
  const bool vertical_lines_cross = std::fabs(dx) >= parallel_eps;
  const bool horizontal_lines_cross = std::fabs(dy) >= parallel_eps;
  if (vertical_lines_cross) {
    const double s1 = (-W / 2 - px) / dx, s2 = (W / 2 - px) / dx;
    s_lo = std::max(s_lo, std::min(s1, s2));
    s_hi = std::min(s_hi, std::max(s1, s2));
  } else if (!(px >= -W / 2 && px < W / 2)) {
    return {};
  }
  if (horizontal_lines_cross) {
    const double s1 = (-H / 2 - py) / dy, s2 = (H / 2 - py) / dy;
    s_lo = std::max(s_lo, std::min(s1, s2));
    s_hi = std::min(s_hi, std::max(s1, s2));
  } else if (!(py > -H / 2 && py <= H / 2)) {
    return {};
  }
  if (!(s_hi > s_lo)) return {};

  std::vector<double> cuts{s_lo, s_hi};
  if (vertical_lines_cross) {
    for (std::size_t c = 1; c < g.width; ++c) {
      const double s = (static_cast<double>(c) - W / 2 - px) / dx;
      if (s > s_lo && s < s_hi) cuts.push_back(s);
    }
  }
  if (horizontal_lines_cross) {
    for (std::size_t r = 1; r < g.height; ++r) {
      const double s = (H / 2 - static_cast<double>(r) - py) / dy;
      if (s > s_lo && s < s_hi) cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<std::pair<std::size_t, double>> taps;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 0.0) continue;
    const double sm = 0.5 * (cuts[k] + cuts[k + 1]);
    const double x = px + sm * dx, y = py + sm * dy;
    const double cf = std::floor(x + W / 2), rf = std::floor(H / 2 - y);
    if (cf < 0 || cf >= W || rf < 0 || rf >= H) continue;
    taps.emplace_back(static_cast<std::size_t>(rf) * g.width + static_cast<std::size_t>(cf), len);
  }
  OperatorRow row;
  detail::canonicalize_row(taps, row);
  return row;
}

/// Assemble the projector; rays that miss the grid are recorded and dropped.
inline std::shared_ptr<ProjectorOperator> build_projector(ProjectorGeometry g) {
  if (g.height == 0 || g.width == 0) throw ParameterError("build_projector: grid must be nonempty");
  if (g.angles.empty()) throw ParameterError("build_projector: need at least one angle");
  if (g.detector_count == 0) g.detector_count = ProjectorGeometry::default_detectors(g.width);
  if (!(g.detector_spacing > 0.0)) throw ParameterError("build_projector: detector spacing must be positive");

  std::vector<OperatorRow> rows;
  std::vector<ProjectorOperator::Ray> rays, dropped;
  rows.reserve(g.angles.size() * g.detector_count);
  const double center = (static_cast<double>(g.detector_count) - 1.0) / 2.0;
  for (std::size_t a = 0; a < g.angles.size(); ++a) {
    for (std::size_t k = 0; k < g.detector_count; ++k) {
      const double t = (static_cast<double>(k) - center) * g.detector_spacing;
      OperatorRow r = trace_ray(g, g.angles[a], t);
      if (r.empty()) {
        dropped.push_back({a, k});
        continue;
      }
      rows.push_back(std::move(r));
      rays.push_back({a, k});
    }
  }
  if (rows.empty()) throw ModelError("build_projector: no ray intersects the grid");
  return std::make_shared<ProjectorOperator>(std::move(g), rows, std::move(rays), std::move(dropped));
}

}  // namespace hrlsgs
