#pragma once

// Separation quality metrics on waveform pairs. All accumulation happens in
// double precision. Framewise variants evaluate the matching global metric on
// equal-length frames and aggregate the survivors.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/stem.hpp"
#include "mdx/waveform.hpp"

namespace mdx {

enum class Aggregation { Mean, Median };

inline constexpr std::string_view aggregation_name(Aggregation a) {
  return a == Aggregation::Mean ? "mean" : "median";
}

// Ratios that would be infinite are clamped to this magnitude.
inline constexpr double kClampDb = 120.0;

struct MetricConfig {
  double epsilon = 1e-7;
  std::optional<double> frame_length;  // seconds
  std::optional<double> hop_length;    // seconds
  Aggregation aggregation = Aggregation::Mean;
  double silent_frame_energy_floor = 1e-12;

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidInputError("epsilon must be positive");
    if (frame_length && !(*frame_length > 0.0)) throw InvalidInputError("frame length must be positive");
    if (hop_length && !(*hop_length > 0.0)) throw InvalidInputError("hop length must be positive");
    if (frame_length && hop_length && *hop_length > *frame_length)
      throw InvalidInputError("hop length must not exceed frame length");
    if (!(silent_frame_energy_floor >= 0.0)) throw InvalidInputError("energy floor must be non-negative");
  }

  MetricConfig with_frames(double frame_s, double hop_s, Aggregation agg) const {
    MetricConfig c = *this;
    c.frame_length = frame_s;
    c.hop_length = hop_s;
    c.aggregation = agg;
    return c;
  }
};

enum class MetricId {
  GlobalSdr,
  FramewiseSdr,
  GlobalMae,
  FramewiseMae,
  GlobalMse,
  FramewiseMse,
  GlobalSiSdr,
  FramewiseSiSdr,
  BssEvalV3Sdr,
  BssEvalV3FramewiseSdr,  // 30 s frames, 15 s hop
  BssEvalV4FramewiseSdr,  // 1 s frames, 1 s hop
};

// A metric together with the aggregation used when it is framewise.
struct MetricKey {
  MetricId id;
  Aggregation aggregation = Aggregation::Mean;
  auto operator<=>(const MetricKey&) const = default;
};

inline constexpr bool is_framewise(MetricId id) {
  switch (id) {
    case MetricId::FramewiseSdr:
    case MetricId::FramewiseMae:
    case MetricId::FramewiseMse:
    case MetricId::FramewiseSiSdr:
    case MetricId::BssEvalV3FramewiseSdr:
    case MetricId::BssEvalV4FramewiseSdr:
      return true;
    default:
      return false;
  }
}

// The global metric evaluated on each frame.
inline constexpr MetricId base_metric(MetricId id) {
  switch (id) {
    case MetricId::FramewiseSdr: return MetricId::GlobalSdr;
    case MetricId::FramewiseMae: return MetricId::GlobalMae;
    case MetricId::FramewiseMse: return MetricId::GlobalMse;
    case MetricId::FramewiseSiSdr: return MetricId::GlobalSiSdr;
    case MetricId::BssEvalV3FramewiseSdr:
    case MetricId::BssEvalV4FramewiseSdr: return MetricId::BssEvalV3Sdr;
    default: return id;
  }
}

inline constexpr bool higher_is_better(MetricId id) {
  MetricId b = base_metric(id);
  return b != MetricId::GlobalMae && b != MetricId::GlobalMse;
}

inline constexpr std::string_view metric_name(MetricId id) {
  switch (id) {
    case MetricId::GlobalSdr: return "global_sdr";
    case MetricId::FramewiseSdr: return "framewise_sdr";
    case MetricId::GlobalMae: return "global_mae";
    case MetricId::FramewiseMae: return "framewise_mae";
    case MetricId::GlobalMse: return "global_mse";
    case MetricId::FramewiseMse: return "framewise_mse";
    case MetricId::GlobalSiSdr: return "global_si_sdr";
    case MetricId::FramewiseSiSdr: return "framewise_si_sdr";
    case MetricId::BssEvalV3Sdr: return "bsseval_v3_sdr";
    case MetricId::BssEvalV3FramewiseSdr: return "bsseval_v3_framewise_sdr";
    case MetricId::BssEvalV4FramewiseSdr: return "bsseval_v4_framewise_sdr";
  }
  return "?";
}

inline std::string metric_key_name(const MetricKey& k) {
  std::string s(metric_name(k.id));
  if (is_framewise(k.id)) s += "_" + std::string(aggregation_name(k.aggregation));
  return s;
}

// Every metric the comparison suite reports, in output order.
inline const std::vector<MetricKey>& suite_keys() {
  static const std::vector<MetricKey> keys = {
      {MetricId::GlobalSdr},
      {MetricId::FramewiseSdr, Aggregation::Mean},
      {MetricId::GlobalMae},
      {MetricId::FramewiseMae, Aggregation::Mean},
      {MetricId::GlobalMse},
      {MetricId::FramewiseMse, Aggregation::Mean},
      {MetricId::BssEvalV3Sdr},
      {MetricId::BssEvalV3FramewiseSdr, Aggregation::Mean},
      {MetricId::BssEvalV3FramewiseSdr, Aggregation::Median},
      {MetricId::BssEvalV4FramewiseSdr, Aggregation::Mean},
      {MetricId::BssEvalV4FramewiseSdr, Aggregation::Median},
      {MetricId::GlobalSiSdr},
      {MetricId::FramewiseSiSdr, Aggregation::Mean},
  };
  return keys;
}

inline std::optional<MetricKey> parse_metric_key(std::string_view name) {
  for (const auto& k : suite_keys())
    if (metric_key_name(k) == name) return k;
  return std::nullopt;
}

// Frame length and hop (seconds) the suite uses for a framewise metric.
inline std::pair<double, double> suite_framing(MetricId id) {
  if (id == MetricId::BssEvalV3FramewiseSdr) return {30.0, 15.0};
  return {1.0, 1.0};
}

// Per-stem values feeding the per-song average. Only evaluated stems carry a
// value.
struct StemScores {
  std::map<StemKind, double> values;
  std::set<StemKind> evaluated;

  static StemScores from(std::map<StemKind, double> v) {
    StemScores s;
    for (const auto& [k, x] : v) s.evaluated.insert(k);
    s.values = std::move(v);
    return s;
  }
};

namespace metrics_detail {

inline double clamp_db(double v) { return std::clamp(v, -kClampDb, kClampDb); }

struct Range {
  std::size_t begin = 0;
  std::size_t count = 0;
};

inline double ref_energy(const Waveform& ref, Range r) {
  double e = 0.0;
  for (std::size_t c = 0; c < ref.channels(); ++c) {
    auto ch = ref.channel(c).subspan(r.begin, r.count);
    for (double v : ch) e += v * v;
  }
  return e;
}

inline double error_energy(const Waveform& ref, const Waveform& est, Range r) {
  double e = 0.0;
  for (std::size_t c = 0; c < ref.channels(); ++c) {
    auto a = ref.channel(c).subspan(r.begin, r.count);
    auto b = est.channel(c).subspan(r.begin, r.count);
    for (std::size_t n = 0; n < a.size(); ++n) {
      double d = a[n] - b[n];
      e += d * d;
    }
  }
  return e;
}

inline double sdr(const Waveform& ref, const Waveform& est, Range r, double eps) {
  return 10.0 * std::log10((ref_energy(ref, r) + eps) / (error_energy(ref, est, r) + eps));
}

inline double bss_v3(const Waveform& ref, const Waveform& est, Range r) {
  double num = ref_energy(ref, r);
  if (num == 0.0) throw UndefinedMetricError("BSS Eval SDR is undefined for a silent reference");
  double den = error_energy(ref, est, r);
  if (den == 0.0) return kClampDb;
  return clamp_db(10.0 * std::log10(num / den));
}

template <bool Squared>
double mean_error(const Waveform& ref, const Waveform& est, Range r) {
  if (r.count == 0) throw InvalidInputError("error metrics need at least one frame");
  double acc = 0.0;
  for (std::size_t c = 0; c < ref.channels(); ++c) {
    auto a = ref.channel(c).subspan(r.begin, r.count);
    auto b = est.channel(c).subspan(r.begin, r.count);
    for (std::size_t n = 0; n < a.size(); ++n) {
      double d = a[n] - b[n];
      acc += Squared ? d * d : std::abs(d);
    }
  }
  return acc / static_cast<double>(ref.channels() * r.count);
}

// Unclamped; may return +/-infinity.
inline double si_sdr_raw(const Waveform& ref, const Waveform& est, Range r, double floor) {
  double ss = 0.0, se = 0.0;
  for (std::size_t c = 0; c < ref.channels(); ++c) {
    auto a = ref.channel(c).subspan(r.begin, r.count);
    auto b = est.channel(c).subspan(r.begin, r.count);
    for (std::size_t n = 0; n < a.size(); ++n) {
      ss += a[n] * a[n];
      se += a[n] * b[n];
    }
  }
  if (ss <= floor) throw UndefinedMetricError("SI-SDR is undefined for a silent reference");
  const double alpha = se / ss;
  double target = 0.0, residual = 0.0;
  for (std::size_t c = 0; c < ref.channels(); ++c) {
    auto a = ref.channel(c).subspan(r.begin, r.count);
    auto b = est.channel(c).subspan(r.begin, r.count);
    for (std::size_t n = 0; n < a.size(); ++n) {
      double t = alpha * a[n];
      double d = b[n] - t;
      target += t * t;
      residual += d * d;
    }
  }
  if (target == 0.0) return -std::numeric_limits<double>::infinity();
  if (residual == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target / residual);
}

inline double evaluate(MetricId base, const Waveform& ref, const Waveform& est, Range r,
                       const MetricConfig& cfg) {
  switch (base) {
    case MetricId::GlobalSdr: return sdr(ref, est, r, cfg.epsilon);
    case MetricId::GlobalMae: return mean_error<false>(ref, est, r);
    case MetricId::GlobalMse: return mean_error<true>(ref, est, r);
    case MetricId::GlobalSiSdr: return clamp_db(si_sdr_raw(ref, est, r, cfg.silent_frame_energy_floor));
    case MetricId::BssEvalV3Sdr: return bss_v3(ref, est, r);
    default: throw InvalidInputError("not a global metric");
  }
}

inline std::size_t seconds_to_frames(double seconds, int sample_rate) {
  double n = std::round(seconds * sample_rate);
  if (n < 1.0) throw InvalidInputError("frame or hop shorter than one sample");
  return static_cast<std::size_t>(n);
}

}  // namespace metrics_detail

inline void require_pair(const Waveform& ref, const Waveform& est) {
  Waveform::require_same_shape(ref, est, "metric");
}

// 10 log10((sum ||s||^2 + eps) / (sum ||s - s_hat||^2 + eps)).
inline double global_sdr(const Waveform& reference, const Waveform& estimate,
                         const MetricConfig& cfg = {}) {
  require_pair(reference, estimate);
  cfg.validate();
  return metrics_detail::sdr(reference, estimate, {0, reference.frames()}, cfg.epsilon);
}

inline double global_mae(const Waveform& reference, const Waveform& estimate) {
  require_pair(reference, estimate);
  return metrics_detail::mean_error<false>(reference, estimate, {0, reference.frames()});
}

inline double global_mse(const Waveform& reference, const Waveform& estimate) {
  require_pair(reference, estimate);
  return metrics_detail::mean_error<true>(reference, estimate, {0, reference.frames()});
}

// Channels are concatenated into one vector before projecting.
inline double si_sdr_unclamped(const Waveform& reference, const Waveform& estimate,
                               const MetricConfig& cfg = {}) {
  require_pair(reference, estimate);
  return metrics_detail::si_sdr_raw(reference, estimate, {0, reference.frames()},
                                    cfg.silent_frame_energy_floor);
}

inline double si_sdr(const Waveform& reference, const Waveform& estimate, const MetricConfig& cfg = {}) {
  return metrics_detail::clamp_db(si_sdr_unclamped(reference, estimate, cfg));
}

// Projection-free BSS Eval SDR: the SDR ratio without the epsilon terms.
inline double bsseval_v3_sdr(const Waveform& reference, const Waveform& estimate,
                             const MetricConfig& cfg = {}) {
  (void)cfg;
  require_pair(reference, estimate);
  return metrics_detail::bss_v3(reference, estimate, {0, reference.frames()});
}

inline double sdr_song(const StemScores& scores) {
  if (scores.evaluated.empty()) throw InvalidInputError("no evaluated stems to average");
  double sum = 0.0;
  for (StemKind k : scores.evaluated) {
    auto it = scores.values.find(k);
    if (it == scores.values.end())
      throw InvalidInputError("evaluated stem " + std::string(stem_name(k)) + " has no value");
    sum += it->second;
  }
  for (const auto& [k, v] : scores.values)
    if (!scores.evaluated.count(k))
      throw InvalidInputError("stem " + std::string(stem_name(k)) + " has a value but is not evaluated");
  return sum / static_cast<double>(scores.evaluated.size());
}

inline double aggregate(std::vector<double> values, Aggregation agg) {
  if (values.empty()) throw UndefinedMetricError("nothing to aggregate");
  if (agg == Aggregation::Mean) {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Per-frame values of the base metric; std::nullopt marks a skipped frame
// (silent reference or undefined metric). Partial trailing frames are dropped.
inline std::vector<std::optional<double>> framewise_values(MetricId metric, const Waveform& reference,
                                                           const Waveform& estimate,
                                                           const MetricConfig& cfg) {
  require_pair(reference, estimate);
  cfg.validate();
  if (!cfg.frame_length || !cfg.hop_length)
    throw InvalidInputError("framewise metrics need a frame length and a hop length");
  const std::size_t frame = metrics_detail::seconds_to_frames(*cfg.frame_length, reference.sample_rate());
  const std::size_t hop = metrics_detail::seconds_to_frames(*cfg.hop_length, reference.sample_rate());
  if (reference.frames() < frame) throw InvalidInputError("signal is shorter than one frame");

  const MetricId base = base_metric(metric);
  std::vector<std::optional<double>> out;
  for (std::size_t start = 0; start + frame <= reference.frames(); start += hop) {
    metrics_detail::Range r{start, frame};
    if (metrics_detail::ref_energy(reference, r) <= cfg.silent_frame_energy_floor) {
      out.emplace_back();
      continue;
    }
    try {
      out.emplace_back(metrics_detail::evaluate(base, reference, estimate, r, cfg));
    } catch (const UndefinedMetricError&) {
      out.emplace_back();
    }
  }
  return out;
}

inline double framewise(MetricId metric, const Waveform& reference, const Waveform& estimate,
                        const MetricConfig& cfg) {
  std::vector<double> kept;
  for (const auto& v : framewise_values(metric, reference, estimate, cfg))
    if (v) kept.push_back(*v);
  if (kept.empty()) throw UndefinedMetricError("no frame survived the silence and definedness checks");
  return aggregate(std::move(kept), cfg.aggregation);
}

// Evaluates one metric, global or framewise, as the comparison suite does.
inline double evaluate_metric(const MetricKey& key, const Waveform& reference, const Waveform& estimate,
                              const MetricConfig& cfg = {}) {
  if (is_framewise(key.id)) {
    auto [frame, hop] = suite_framing(key.id);
    return framewise(key.id, reference, estimate, cfg.with_frames(frame, hop, key.aggregation));
  }
  switch (key.id) {
    case MetricId::GlobalSdr: return global_sdr(reference, estimate, cfg);
    case MetricId::GlobalMae: return global_mae(reference, estimate);
    case MetricId::GlobalMse: return global_mse(reference, estimate);
    case MetricId::GlobalSiSdr: return si_sdr(reference, estimate, cfg);
    case MetricId::BssEvalV3Sdr: return bsseval_v3_sdr(reference, estimate, cfg);
    default: throw InvalidInputError("unknown metric");
  }
}

// Undefined entries (silent references, signals shorter than a frame) are
// left out of the result rather than stored as numbers.
inline std::map<MetricKey, double> metric_suite(const Waveform& reference, const Waveform& estimate,
                                                const MetricConfig& cfg = {}) {
  require_pair(reference, estimate);
  cfg.validate();
  std::map<MetricKey, double> out;
  for (const auto& key : suite_keys()) {
    try {
      out[key] = evaluate_metric(key, reference, estimate, cfg);
    } catch (const UndefinedMetricError&) {
    } catch (const InvalidInputError&) {
      if (!is_framewise(key.id)) throw;
    }
  }
  return out;
}

}  // namespace mdx
