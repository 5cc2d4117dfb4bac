// Dense vector/matrix arithmetic and seeded sampling shared by every module.
// Everything is 64-bit floating point; shapes are validated at the public
// entry points and violations throw ShapeError with both shapes in the text.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace advseq {

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied parameters or inputs (negative variance, empty text,
// out-of-range token ids, infeasible generator settings, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content (bad magic, truncated payload, unparsable CSV).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem-level failures: file missing, not writable, short read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failure during training (loss became non-finite).
class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec {
  std::vector<double> data;

  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0) : data(n, fill) {}
  Vec(std::initializer_list<double> init) : data(init) {}

  std::size_t dim() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool operator==(const Vec&) const = default;
};

// Row-major dense matrix.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  bool operator==(const Mat&) const = default;
};

inline std::string shape_str(const Mat& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

inline bool is_finite(const Vec& v) {
  return std::all_of(v.data.begin(), v.data.end(),
                     [](double x) { return std::isfinite(x); });
}

inline bool is_finite(const Mat& m) {
  return std::all_of(m.data.begin(), m.data.end(),
                     [](double x) { return std::isfinite(x); });
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// ---- elementwise vector ops ----

inline Vec add(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim())
    throw ShapeError("add: vector dims differ, " + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()));
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim())
    throw ShapeError("sub: vector dims differ, " + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()));
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(const Vec& a, double s) {
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] * s;
  return r;
}

inline void add_inplace(Vec& dst, const Vec& x) {
  if (dst.dim() != x.dim())
    throw ShapeError("add_inplace: vector dims differ, " +
                     std::to_string(dst.dim()) + " vs " + std::to_string(x.dim()));
  for (std::size_t i = 0; i < dst.dim(); ++i) dst[i] += x[i];
}

// dst += s * x
inline void axpy(Vec& dst, double s, const Vec& x) {
  if (dst.dim() != x.dim())
    throw ShapeError("axpy: vector dims differ, " + std::to_string(dst.dim()) +
                     " vs " + std::to_string(x.dim()));
  for (std::size_t i = 0; i < dst.dim(); ++i) dst[i] += s * x[i];
}

inline Vec hadamard(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim())
    throw ShapeError("hadamard: vector dims differ, " + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()));
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] * b[i];
  return r;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim())
    throw ShapeError("dot: vector dims differ, " + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec r(a.dim() + b.dim());
  std::copy(a.data.begin(), a.data.end(), r.data.begin());
  std::copy(b.data.begin(), b.data.end(), r.data.begin() + a.dim());
  return r;
}

inline Vec slice(const Vec& v, std::size_t lo, std::size_t hi) {
  Vec r(hi - lo);
  std::copy(v.data.begin() + lo, v.data.begin() + hi, r.data.begin());
  return r;
}

inline double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v.data) s += std::fabs(x);
  return s;
}

inline double linf_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v.data) s = std::max(s, std::fabs(x));
  return s;
}

inline std::size_t argmax(const Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.dim(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// ---- matrix ops ----

inline Vec matvec(const Mat& m, const Vec& v) {
  if (m.cols != v.dim())
    throw ShapeError("matvec: " + shape_str(m) + " * vector of dim " +
                     std::to_string(v.dim()));
  Vec r(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    const double* row = m.data.data() + i * m.cols;
    for (std::size_t k = 0; k < m.cols; ++k) s += row[k] * v[k];
    r[i] = s;
  }
  return r;
}

// m^T * v without materializing the transpose.
inline Vec matvec_t(const Mat& m, const Vec& v) {
  if (m.rows != v.dim())
    throw ShapeError("matvec_t: " + shape_str(m) + "^T * vector of dim " +
                     std::to_string(v.dim()));
  Vec r(m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + i * m.cols;
    for (std::size_t k = 0; k < m.cols; ++k) r[k] += row[k] * v[i];
  }
  return r;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
  Mat r(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

// Scale column k of m by d[k]; used for diag(d) applied from the right.
inline Mat scale_cols(const Mat& m, const Vec& d) {
  if (m.cols != d.dim())
    throw ShapeError("scale_cols: " + shape_str(m) + " with diag of dim " +
                     std::to_string(d.dim()));
  Mat r = m;
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t k = 0; k < r.cols; ++k) r(i, k) *= d[k];
  return r;
}

// dst += u * v^T
inline void outer_acc(Mat& dst, const Vec& u, const Vec& v) {
  if (dst.rows != u.dim() || dst.cols != v.dim())
    throw ShapeError("outer_acc: " + shape_str(dst) + " += outer(" +
                     std::to_string(u.dim()) + ", " + std::to_string(v.dim()) + ")");
  for (std::size_t i = 0; i < u.dim(); ++i) {
    if (u[i] == 0.0) continue;
    for (std::size_t j = 0; j < v.dim(); ++j) dst(i, j) += u[i] * v[j];
  }
}

inline void add_inplace(Mat& dst, const Mat& x) {
  if (dst.rows != x.rows || dst.cols != x.cols)
    throw ShapeError("add_inplace: " + shape_str(dst) + " vs " + shape_str(x));
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += x.data[i];
}

inline void axpy(Mat& dst, double s, const Mat& x) {
  if (dst.rows != x.rows || dst.cols != x.cols)
    throw ShapeError("axpy: " + shape_str(dst) + " vs " + shape_str(x));
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += s * x.data[i];
}

// ---- activations ----

inline Vec tanh_vec(const Vec& v) {
  Vec r(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) r[i] = std::tanh(v[i]);
  return r;
}

inline Vec sigmoid_vec(const Vec& v) {
  Vec r(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    const double x = v[i];
    if (x >= 0.0) {
      r[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      r[i] = e / (1.0 + e);
    }
  }
  return r;
}

// Max-subtracted softmax; stable for entries anywhere in double range.
inline Vec softmax(const Vec& v) {
  if (v.dim() == 0) throw ShapeError("softmax: empty vector");
  double m = v[0];
  for (double x : v.data) m = std::max(m, x);
  Vec r(v.dim());
  double z = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    r[i] = std::exp(v[i] - m);
    z += r[i];
  }
  for (std::size_t i = 0; i < v.dim(); ++i) r[i] /= z;
  return r;
}

// log(sum exp(v)), max-subtracted.
inline double logsumexp(const Vec& v) {
  if (v.dim() == 0) throw ShapeError("logsumexp: empty vector");
  double m = v[0];
  for (double x : v.data) m = std::max(m, x);
  double z = 0.0;
  for (double x : v.data) z += std::exp(x - m);
  return m + std::log(z);
}

// ---- seeded sampling ----
//
// splitmix64 state advance with explicit Box-Muller on top. Both are fully
// specified here so a given seed yields the same stream on every platform;
// the standard library distributions are implementation-defined and would
// break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // inclusive integer range
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  double next_normal(double mu, double sigma2) {
    if (sigma2 < 0.0) throw ConfigError("next_normal: negative variance");
    if (sigma2 == 0.0) return mu;
    if (has_spare_) {
      has_spare_ = false;
      return mu + std::sqrt(sigma2) * spare_;
    }
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mu + std::sqrt(sigma2) * r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Label-derived child seed: FNV-1a over the label mixed with the root seed.
// Fixed labels keep per-module streams independent of each other.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  std::uint64_t z = h ^ (root + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Vec normal_sample(Rng& rng, double mu, double sigma2, std::size_t n) {
  if (sigma2 < 0.0) throw ConfigError("normal_sample: negative variance");
  Vec r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = rng.next_normal(mu, sigma2);
  return r;
}

}  // namespace advseq
