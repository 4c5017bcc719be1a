#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nlsnet/error.hpp"
#include "nlsnet/expression.hpp"
#include "nlsnet/field.hpp"

namespace nlsnet {

using Coeffs = std::vector<double>;

struct LibraryEntry {
  std::string name;
  std::function<double(double)> fn;
};

/// Ordered set of candidate functions g_1..g_NL for V = sum_i c_i g_i.
class Library {
 public:
  Library() = default;
  explicit Library(std::vector<LibraryEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (entries_[i].name == entries_[j].name)
          throw Error(ErrorKind::invalid_argument, "duplicate library entry '" + entries_[i].name + "'");
  }

  std::size_t size() const { return entries_.size(); }
  const LibraryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<LibraryEntry>& entries() const { return entries_; }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return i;
    throw Error(ErrorKind::config, "library has no entry named '" + name + "'");
  }

  /// Sub-library with the named entries, in the order given.
  Library select(const std::vector<std::string>& names) const {
    std::vector<LibraryEntry> out;
    for (const auto& n : names) out.push_back(entries_[index_of(n)]);
    return Library(std::move(out));
  }

 private:
  std::vector<LibraryEntry> entries_;
};

/// {x, sin x, cos x, x^2, sin^2 x, cos^2 x, e^-x, e^-2x, e^-x^2, e^-2x^2},
/// in this order. The names parse as expressions of the config grammar.
inline Library default_library() {
  return Library({
      {"x", [](double x) { return x; }},
      {"sin(x)", [](double x) { return std::sin(x); }},
      {"cos(x)", [](double x) { return std::cos(x); }},
      {"x^2", [](double x) { return x * x; }},
      {"sin(x)^2", [](double x) { const double s = std::sin(x); return s * s; }},
      {"cos(x)^2", [](double x) { const double c = std::cos(x); return c * c; }},
      {"exp(-x)", [](double x) { return std::exp(-x); }},
      {"exp(-2*x)", [](double x) { return std::exp(-2.0 * x); }},
      {"exp(-x^2)", [](double x) { return std::exp(-x * x); }},
      {"exp(-2*x^2)", [](double x) { return std::exp(-2.0 * x * x); }},
  });
}

inline Library library_from_expressions(const std::vector<std::pair<std::string, std::string>>& defs) {
  std::vector<LibraryEntry> out;
  for (const auto& [name, text] : defs) {
    auto expr = Expression::parse(text);
    out.push_back({name, [expr](double x) { return expr(x); }});
  }
  return Library(std::move(out));
}

/// Phi in R^{M x NL}, column-major, column i = g_i sampled on the grid.
/// `column_scale` records any normalization: the columns stored here equal
/// the raw samples divided by column_scale[i].
struct DictionaryMatrix {
  Grid1D grid;
  std::vector<std::string> names;
  std::vector<double> data;
  std::vector<double> column_scale;

  std::size_t rows() const { return grid.M; }
  std::size_t cols() const { return names.size(); }

  std::span<const double> column(std::size_t i) const {
    return std::span<const double>(data).subspan(i * rows(), rows());
  }
  double operator()(std::size_t r, std::size_t c) const { return data[c * rows() + r]; }

  /// Maps coefficients of this (possibly normalized) matrix onto the raw
  /// library columns.
  Coeffs to_raw(std::span<const double> c) const {
    Coeffs out(c.begin(), c.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= column_scale[i];
    return out;
  }
  Coeffs from_raw(std::span<const double> c) const {
    Coeffs out(c.begin(), c.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= column_scale[i];
    return out;
  }
};

inline DictionaryMatrix assemble(const Library& lib, const Grid1D& grid) {
  DictionaryMatrix phi{grid, {}, std::vector<double>(grid.M * lib.size()),
                       std::vector<double>(lib.size(), 1.0)};
  for (std::size_t i = 0; i < lib.size(); ++i) {
    phi.names.push_back(lib[i].name);
    for (std::size_t r = 0; r < grid.M; ++r) {
      const double x = grid.point(r);
      const double v = lib[i].fn(x);
      if (!std::isfinite(v))
        throw Error(ErrorKind::nonfinite_sample,
                    "library entry '" + lib[i].name + "' is nonfinite at x = " + std::to_string(x));
      phi.data[i * grid.M + r] = v;
    }
  }
  return phi;
}

/// Copy with every column scaled to unit Euclidean norm (zero columns untouched).
inline DictionaryMatrix normalize_columns(const DictionaryMatrix& phi) {
  DictionaryMatrix out = phi;
  for (std::size_t i = 0; i < phi.cols(); ++i) {
    const double n = std::sqrt(norm_sq(phi.column(i)));
    const double s = n > 0.0 ? n : 1.0;
    out.column_scale[i] = phi.column_scale[i] * s;
    for (std::size_t r = 0; r < phi.rows(); ++r) out.data[i * phi.rows() + r] /= s;
  }
  return out;
}

/// V = Phi c.
inline std::vector<double> synthesize(const DictionaryMatrix& phi, std::span<const double> c) {
  if (c.size() != phi.cols())
    throw Error(ErrorKind::dimension_mismatch, "coefficient count differs from library size");
  std::vector<double> v(phi.rows(), 0.0);
  for (std::size_t i = 0; i < phi.cols(); ++i) {
    if (c[i] == 0.0) continue;
    const auto col = phi.column(i);
    for (std::size_t r = 0; r < phi.rows(); ++r) v[r] += c[i] * col[r];
  }
  return v;
}

/// Phi^T v.
inline std::vector<double> transpose_apply(const DictionaryMatrix& phi, std::span<const double> v) {
  if (v.size() != phi.rows())
    throw Error(ErrorKind::dimension_mismatch, "vector length differs from dictionary rows");
  std::vector<double> out(phi.cols(), 0.0);
  for (std::size_t i = 0; i < phi.cols(); ++i) {
    const auto col = phi.column(i);
    double s = 0.0;
    for (std::size_t r = 0; r < phi.rows(); ++r) s += col[r] * v[r];
    out[i] = s;
  }
  return out;
}

/// Proximal map of theta |c|_1.
inline Coeffs soft_threshold(std::span<const double> c, double theta) {
  if (!(theta >= 0.0)) throw Error(ErrorKind::invalid_argument, "threshold must be non-negative");
  Coeffs out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double mag = std::abs(c[i]) - theta;
    out[i] = mag > 0.0 ? std::copysign(mag, c[i]) : 0.0;
  }
  return out;
}

/// sigma_max / sigma_min of Phi; infinite when Phi is rank deficient.
inline double condition_number(const DictionaryMatrix& phi) {
  Eigen::Map<const Eigen::MatrixXd> m(phi.data.data(), static_cast<Eigen::Index>(phi.rows()),
                                      static_cast<Eigen::Index>(phi.cols()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : INFINITY;
}

}  // namespace nlsnet
