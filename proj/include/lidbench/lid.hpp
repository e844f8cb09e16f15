// SPDX-License-Identifier: Apache-2.0
//
// Local intrinsic dimensionality: the maximum-likelihood estimate from k-NN
// distances, whole-dataset profiles, and their distribution summaries.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lidbench/data.hpp"
#include "lidbench/oracle.hpp"
#include "lidbench/parallel.hpp"

namespace lidbench {

inline constexpr double kLidInfinity = std::numeric_limits<double>::infinity();

/// MLE of the local intrinsic dimensionality from ascending k-NN distances:
///   -( (1/k') * sum_i ln(r_i / r_k) )^-1
/// over the k' strictly positive entries (zeros are exact duplicates and are
/// dropped). Returns +inf when every retained distance equals r_k.
inline double estimate_lid(std::span<const double> distances) {
  if (distances.empty()) throw ValidationError("estimate_lid: empty distance list");
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] >= 0.0) || !std::isfinite(distances[i]))
      throw ValidationError("estimate_lid: distances must be finite and nonnegative");
    if (i > 0 && distances[i] < distances[i - 1])
      throw ValidationError("estimate_lid: distances must be sorted ascending");
  }
  const double rk = distances.back();
  if (rk == 0.0) throw ValidationError("estimate_lid: all distances are zero");
  const auto first_positive = std::upper_bound(distances.begin(), distances.end(), 0.0);
  const auto retained = static_cast<std::size_t>(distances.end() - first_positive);
  if (retained < 2) throw ValidationError("estimate_lid: fewer than 2 positive distances");

  double log_sum = 0.0;
  for (auto it = first_positive; it != distances.end(); ++it) log_sum += std::log(*it / rk);
  if (log_sum == 0.0) return kLidInfinity;
  return -double(retained) / log_sum;
}

/// Per-point LID values for a dataset. A point is degenerate when fewer than
/// two positive neighbor distances remain; its value is +inf.
struct LidProfile {
  std::size_t k = 100;
  Fingerprint fingerprint = 0;
  std::vector<double> values;
  std::vector<std::uint32_t> dropped_zeros;

  std::size_t size() const { return values.size(); }
  bool degenerate(std::size_t i) const { return dropped_zeros[i] + 2 > k; }
  bool finite(std::size_t i) const { return std::isfinite(values[i]); }

  friend bool operator==(const LidProfile&, const LidProfile&) = default;
};

inline LidProfile lid_profile(const Dataset& data, std::size_t k = 100) {
  if (k < 2) throw ValidationError("lid k must be >= 2");
  if (data.size() < k + 1)
    throw ValidationError("lid profile needs n >= k + 1 (n=" + std::to_string(data.size()) +
                          ", k=" + std::to_string(k) + ")");
  LidProfile profile;
  profile.k = k;
  profile.fingerprint = data.fingerprint();
  profile.values.assign(data.size(), kLidInfinity);
  profile.dropped_zeros.assign(data.size(), 0);
  detail::parallel_for(data.size(), [&](std::size_t i) {
    const auto knn = knn_scan(data, data.row(i), k, PointId(i));
    std::vector<double> dists(knn.size());
    std::transform(knn.begin(), knn.end(), dists.begin(), [](const Neighbor& n) { return n.dist; });
    profile.dropped_zeros[i] =
        std::uint32_t(std::upper_bound(dists.begin(), dists.end(), 0.0) - dists.begin());
    if (profile.dropped_zeros[i] + 2 > k) return;  // degenerate, stays +inf
    profile.values[i] = estimate_lid(dists);
  });
  return profile;
}

/// Linear interpolation between closest ranks over sorted values.
inline double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("percentile of empty sequence");
  const double pos = p * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return counts.empty() ? 0.0 : (hi - lo) / double(counts.size()); }
};

/// Fixed-width bins over [lo, hi]; the last bin is closed on the right.
inline std::size_t bin_index(double v, double lo, double hi, std::size_t bins) {
  if (hi <= lo) return 0;
  const double t = (v - lo) / (hi - lo) * double(bins);
  if (!(t > 0)) return 0;
  return std::min(static_cast<std::size_t>(t), bins - 1);
}

inline Histogram make_histogram(std::span<const double> values, double lo, double hi,
                                std::size_t bins) {
  Histogram h{lo, hi, std::vector<std::size_t>(std::max<std::size_t>(bins, 1), 0)};
  for (double v : values) ++h.counts[bin_index(v, lo, hi, h.counts.size())];
  return h;
}

struct LidSummary {
  double avg = 0.0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t finite_count = 0;
  std::size_t infinite_count = 0;    // all +inf values, degenerate ones included
  std::size_t degenerate_count = 0;
  Histogram histogram;
};

/// Finite values only; +inf points are counted, never averaged.
inline LidSummary lid_summary(const LidProfile& profile, std::size_t bins = 40) {
  std::vector<double> finite;
  LidSummary s;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile.finite(i))
      finite.push_back(profile.values[i]);
    else
      ++s.infinite_count;
    if (profile.degenerate(i)) ++s.degenerate_count;
  }
  if (finite.empty()) throw ValidationError("lid summary: no finite LID values");
  std::sort(finite.begin(), finite.end());
  s.finite_count = finite.size();
  double sum = 0.0;
  for (double v : finite) sum += v;
  s.avg = sum / double(finite.size());
  s.median = percentile_sorted(finite, 0.5);
  s.p25 = percentile_sorted(finite, 0.25);
  s.p75 = percentile_sorted(finite, 0.75);
  s.min = finite.front();
  s.max = finite.back();
  s.histogram = make_histogram(finite, s.min, s.max, bins);
  return s;
}

/// Columnar text: "# k=<k> fingerprint=<hex>", "id,lid,dropped_zeros", rows.
inline void write_profile(const std::filesystem::path& path, const LidProfile& profile) {
  auto out = detail::open_for_write(path);
  out << "# k=" << profile.k << " fingerprint=" << fingerprint_hex(profile.fingerprint) << "\n";
  out << "id,lid,dropped_zeros\n";
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << i << ',' << detail::format_double(profile.values[i]) << ',' << profile.dropped_zeros[i]
        << '\n';
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline LidProfile read_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  LidProfile profile;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# k=", 0) != 0)
    throw ValidationError("profile '" + path.string() + "' lacks the k/fingerprint header");
  const auto fp_pos = line.find(" fingerprint=");
  if (fp_pos == std::string::npos) throw ValidationError("profile header lacks fingerprint");
  profile.k = detail::parse_int<std::size_t>(std::string_view(line).substr(4, fp_pos - 4));
  profile.fingerprint = parse_fingerprint(std::string_view(line).substr(fp_pos + 13));
  if (!std::getline(in, line) || line != "id,lid,dropped_zeros")
    throw ValidationError("profile '" + path.string() + "' lacks the column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ValidationError("malformed profile row '" + line + "'");
    const std::string_view sv(line);
    if (detail::parse_int<std::size_t>(sv.substr(0, c1)) != profile.values.size())
      throw ValidationError("profile ids must be consecutive from 0");
    const double v = detail::parse_double(sv.substr(c1 + 1, c2 - c1 - 1));
    if (!(v > 0)) throw ValidationError("profile LID values must be positive");
    profile.values.push_back(v);
    profile.dropped_zeros.push_back(detail::parse_int<std::uint32_t>(sv.substr(c2 + 1)));
  }
  if (profile.values.empty()) throw ValidationError("profile '" + path.string() + "' is empty");
  return profile;
}

}  // namespace lidbench
