// SPDX-License-Identifier: Apache-2.0
//
// Dataset representation, distance metrics, file ingestion (fvecs, CSV,
// native LIDB1) and seeded synthetic generators.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lidbench/error.hpp"

namespace lidbench {

static_assert(std::endian::native == std::endian::little,
              "binary formats are read and written as little-endian host data");

using PointId = std::uint32_t;
using Fingerprint = std::uint64_t;

enum class Metric : std::uint8_t { euclidean = 0, angular = 1 };

inline std::string_view to_string(Metric m) {
  return m == Metric::euclidean ? "euclidean" : "angular";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "angular") return Metric::angular;
  throw ValidationError("unknown metric '" + std::string(s) + "'");
}

namespace detail {

inline double squared_l2(std::span<const float> x, std::span<const float> y) {
  const std::size_t d = x.size();
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const double t0 = double(x[i]) - y[i];
    const double t1 = double(x[i + 1]) - y[i + 1];
    const double t2 = double(x[i + 2]) - y[i + 2];
    const double t3 = double(x[i + 3]) - y[i + 3];
    a0 += t0 * t0;
    a1 += t1 * t1;
    a2 += t2 * t2;
    a3 += t3 * t3;
  }
  for (; i < d; ++i) {
    const double t = double(x[i]) - y[i];
    a0 += t * t;
  }
  return (a0 + a1) + (a2 + a3);
}

inline double dot(std::span<const float> x, std::span<const float> y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += double(x[i]) * y[i];
  return s;
}

}  // namespace detail

/// Euclidean distance, or angular distance 1 - cos(x, y) in [0, 2].
/// Accumulates in double; the result is a pure function of the inputs.
inline double distance_unchecked(Metric metric, std::span<const float> x,
                                 std::span<const float> y) {
  if (metric == Metric::euclidean) return std::sqrt(detail::squared_l2(x, y));
  double xy = 0, xx = 0, yy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += double(x[i]) * y[i];
    xx += double(x[i]) * x[i];
    yy += double(y[i]) * y[i];
  }
  return std::clamp(1.0 - xy / std::sqrt(xx * yy), 0.0, 2.0);
}

inline double distance(Metric metric, std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size())
    throw ValidationError("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
  if (metric == Metric::angular && (detail::dot(x, x) == 0.0 || detail::dot(y, y) == 0.0))
    throw ValidationError("angular distance of a zero-norm vector");
  return distance_unchecked(metric, x, y);
}

namespace detail {

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("malformed number '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("malformed integer '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

/// 64-bit FNV-1a over the metric tag, shape and raw float payload.
inline Fingerprint fingerprint_of(Metric metric, std::size_t n, std::size_t d,
                                  std::span<const float> values) {
  Fingerprint h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  const auto tag = static_cast<std::uint8_t>(metric);
  const std::uint64_t shape[2] = {n, d};
  mix(&tag, 1);
  mix(shape, sizeof shape);
  mix(values.data(), values.size_bytes());
  return h;
}

inline std::string fingerprint_hex(Fingerprint f) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, f >>= 4) s[i] = digits[f & 0xf];
  return s;
}

inline Fingerprint parse_fingerprint(std::string_view s) {
  Fingerprint f = 0;
  if (s.size() != 16) throw ValidationError("fingerprint must be 16 hex digits");
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), f, 16);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ValidationError("malformed fingerprint '" + std::string(s) + "'");
  return f;
}

/// Immutable n x d row-major float matrix with a metric tag. Ids are the
/// row indices 0..n-1.
class Dataset {
 public:
  Dataset(std::string name, Metric metric, std::size_t dim, std::vector<float> values)
      : name_(std::move(name)), metric_(metric), dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) throw ValidationError("dataset dimensionality must be >= 1");
    if (values_.empty()) throw ValidationError("dataset must contain at least one point");
    if (values_.size() % dim_ != 0)
      throw ValidationError("value count is not a multiple of the dimensionality");
    n_ = values_.size() / dim_;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto r = row(i);
      if (!std::all_of(r.begin(), r.end(), [](float v) { return std::isfinite(v); }))
        throw ValidationError("row " + std::to_string(i) + " has a non-finite entry");
      if (metric_ == Metric::angular && detail::dot(r, r) == 0.0)
        throw ValidationError("row " + std::to_string(i) + " has zero norm under angular metric");
    }
    fingerprint_ = fingerprint_of(metric_, n_, dim_, values_);
  }

  const std::string& name() const { return name_; }
  Metric metric() const { return metric_; }
  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  Fingerprint fingerprint() const { return fingerprint_; }
  std::span<const float> values() const { return values_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }

  /// Rows `ids` in the given order, as a new dataset.
  Dataset select(std::span<const PointId> ids, std::string name) const {
    std::vector<float> out;
    out.reserve(ids.size() * dim_);
    for (PointId id : ids) {
      if (id >= n_) throw ValidationError("point id " + std::to_string(id) + " out of range");
      const auto r = row(id);
      out.insert(out.end(), r.begin(), r.end());
    }
    return Dataset(std::move(name), metric_, dim_, std::move(out));
  }

 private:
  std::string name_;
  Metric metric_;
  std::size_t dim_;
  std::size_t n_ = 0;
  std::vector<float> values_;
  Fingerprint fingerprint_ = 0;
};

namespace detail {

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return bytes;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

template <class T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

}  // namespace detail

/// fvecs: records of (int32 d, d x float32), little-endian.
inline Dataset load_fvecs(const std::filesystem::path& path, Metric metric) {
  const auto bytes = detail::read_file(path);
  std::vector<float> values;
  std::int32_t dim = -1;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4) throw ValidationError("truncated fvecs record header");
    const auto d = detail::load_le<std::int32_t>(bytes.data() + pos);
    if (d <= 0) throw ValidationError("fvecs record has non-positive dimension");
    if (dim != -1 && d != dim)
      throw ValidationError("inconsistent fvecs dimension: " + std::to_string(dim) + " then " +
                            std::to_string(d));
    dim = d;
    pos += 4;
    const std::size_t payload = std::size_t(d) * 4;
    if (bytes.size() - pos < payload) throw ValidationError("truncated fvecs record");
    const std::size_t old = values.size();
    values.resize(old + std::size_t(d));
    std::memcpy(values.data() + old, bytes.data() + pos, payload);
    pos += payload;
  }
  if (values.empty()) throw ValidationError("fvecs file '" + path.string() + "' is empty");
  return Dataset(path.stem().string(), metric, std::size_t(dim), std::move(values));
}

inline void write_fvecs(const std::filesystem::path& path, const Dataset& data) {
  auto out = detail::open_for_write(path);
  const auto d = static_cast<std::int32_t>(data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(data.row(i).data()), std::streamsize(data.dim() * 4));
  }
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

/// One point per line, comma-separated decimals, no header. Blank lines are
/// skipped.
inline Dataset load_csv(const std::filesystem::path& path, Metric metric) {
  const auto bytes = detail::read_file(path);
  const std::string_view text(bytes.data(), bytes.size());
  std::vector<float> values;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t fields = 0;
    std::size_t f = 0;
    while (true) {
      std::size_t comma = line.find(',', f);
      std::string_view field = line.substr(f, comma == std::string_view::npos ? line.npos : comma - f);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      float v = 0;
      auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || p != field.data() + field.size())
        throw ValidationError("line " + std::to_string(line_no) + ": malformed number '" +
                              std::string(field) + "'");
      if (!std::isfinite(v))
        throw ValidationError("line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    if (dim == 0) dim = fields;
    if (fields != dim)
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " fields, got " + std::to_string(fields));
  }
  if (values.empty()) throw ValidationError("csv file '" + path.string() + "' has no rows");
  return Dataset(path.stem().string(), metric, dim, std::move(values));
}

inline constexpr std::array<char, 5> kNativeMagic = {'L', 'I', 'D', 'B', '1'};

/// Native format: "LIDB1", u32 n, u32 d, u8 metric tag, then n*d f32.
inline void write_native(const std::filesystem::path& path, const Dataset& data) {
  auto out = detail::open_for_write(path);
  const auto n = static_cast<std::uint32_t>(data.size());
  const auto d = static_cast<std::uint32_t>(data.dim());
  const auto tag = static_cast<std::uint8_t>(data.metric());
  out.write(kNativeMagic.data(), kNativeMagic.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&tag), 1);
  out.write(reinterpret_cast<const char*>(data.values().data()),
            std::streamsize(data.values().size_bytes()));
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline Dataset load_native(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  constexpr std::size_t header = 5 + 4 + 4 + 1;
  if (bytes.size() < header || !std::equal(kNativeMagic.begin(), kNativeMagic.end(), bytes.begin()))
    throw ValidationError("'" + path.string() + "' is not a LIDB1 file");
  const auto n = detail::load_le<std::uint32_t>(bytes.data() + 5);
  const auto d = detail::load_le<std::uint32_t>(bytes.data() + 9);
  const auto tag = static_cast<std::uint8_t>(bytes[13]);
  if (tag > 1) throw ValidationError("unknown metric tag " + std::to_string(tag));
  const std::size_t payload = std::size_t(n) * d * 4;
  if (bytes.size() - header != payload)
    throw ValidationError("LIDB1 payload size does not match header");
  std::vector<float> values(std::size_t(n) * d);
  std::memcpy(values.data(), bytes.data() + header, payload);
  return Dataset(path.stem().string(), static_cast<Metric>(tag), d, std::move(values));
}

enum class SyntheticKind { uniform_ball, uniform_cube, gaussian_mixture };

inline SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "uniform-ball") return SyntheticKind::uniform_ball;
  if (s == "uniform-cube") return SyntheticKind::uniform_cube;
  if (s == "gaussian-mixture") return SyntheticKind::gaussian_mixture;
  throw ValidationError("unknown synthetic kind '" + std::string(s) + "'");
}

inline std::string_view to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::uniform_ball: return "uniform-ball";
    case SyntheticKind::uniform_cube: return "uniform-cube";
    case SyntheticKind::gaussian_mixture: return "gaussian-mixture";
  }
  return "?";
}

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::uniform_ball;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t clusters = 1;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic in `spec`. Gaussian-mixture centers are drawn in the unit
/// cube before any point is sampled.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw ValidationError("synthetic n and d must be >= 1");
  if (spec.kind == SyntheticKind::gaussian_mixture && spec.clusters == 0)
    throw ValidationError("gaussian-mixture needs at least one cluster");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma))
    throw ValidationError("sigma must be a finite nonnegative number");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> values(spec.n * spec.d);
  std::vector<double> buf(spec.d);

  switch (spec.kind) {
    case SyntheticKind::uniform_cube:
      for (auto& v : values) v = static_cast<float>(unit(rng));
      break;
    case SyntheticKind::uniform_ball:
      for (std::size_t i = 0; i < spec.n; ++i) {
        double norm2 = 0;
        do {
          norm2 = 0;
          for (auto& b : buf) {
            b = normal(rng);
            norm2 += b * b;
          }
        } while (norm2 == 0);
        const double radius = std::pow(unit(rng), 1.0 / double(spec.d));
        const double scale = radius / std::sqrt(norm2);
        float* out = values.data() + i * spec.d;
        for (std::size_t j = 0; j < spec.d; ++j) out[j] = static_cast<float>(buf[j] * scale);
        // float rounding can push a radius near 1 just past the unit sphere
        std::span<const float> r(out, spec.d);
        while (detail::dot(r, r) > 1.0)
          for (std::size_t j = 0; j < spec.d; ++j) out[j] = std::nextafter(out[j], 0.0f);
      }
      break;
    case SyntheticKind::gaussian_mixture: {
      std::vector<double> centers(spec.clusters * spec.d);
      for (auto& c : centers) c = unit(rng);
      std::uniform_int_distribution<std::size_t> pick(0, spec.clusters - 1);
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double* c = centers.data() + pick(rng) * spec.d;
        for (std::size_t j = 0; j < spec.d; ++j) {
          const double noise = spec.sigma > 0 ? spec.sigma * normal(rng) : 0.0;
          values[i * spec.d + j] = static_cast<float>(c[j] + noise);
        }
      }
      break;
    }
  }
  std::string name = std::string(to_string(spec.kind)) + "-n" + std::to_string(spec.n) + "-d" +
                     std::to_string(spec.d) + "-s" + std::to_string(spec.seed);
  return Dataset(std::move(name), Metric::euclidean, spec.d, std::move(values));
}

}  // namespace lidbench
