#pragma once

// Oracle separators that peek at the reference stems: a single-channel soft
// Wiener filter (power ratio mask per channel and bin) and a 2x2 spatial
// multichannel Wiener filter. Both run frame by frame over the STFT so only a
// small window of spectra is resident at once.

#include <cmath>
#include <complex>
#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/stem.hpp"
#include "mdx/stft.hpp"
#include "mdx/waveform.hpp"

namespace mdx {

struct OracleConfig {
  std::size_t fft_size = 4096;
  std::size_t hop = 1024;
  double mwf_regularization = 1e-10;
  double mask_exponent = 2.0;
  // Added to the SWF mask denominator.
  double swf_floor = 1e-20;
  // Covariances average over frames t-context .. t+context.
  std::size_t covariance_context = 0;

  StftConfig stft() const { return {fft_size, hop}; }

  void validate() const {
    stft().validate();
    if (!(mwf_regularization > 0.0)) throw InvalidInputError("mwf_regularization must be positive");
    if (!(mask_exponent > 0.0)) throw InvalidInputError("mask_exponent must be positive");
    if (!(swf_floor > 0.0)) throw InvalidInputError("swf_floor must be positive");
  }
};

enum class OracleKind { Swf, Mwf, Baseline };

inline constexpr std::string_view oracle_name(OracleKind k) {
  switch (k) {
    case OracleKind::Swf: return "swf";
    case OracleKind::Mwf: return "mwf";
    case OracleKind::Baseline: return "baseline";
  }
  return "?";
}

// Soft masks for one bin: mask_k = power_k / (sum_j power_j + floor). Masks
// are nudged toward zero if rounding pushes their running sum above 1, so
// sum_k mask_k <= 1 holds exactly when summed in index order.
inline void swf_masks(std::span<const double> power, double floor, std::span<double> masks) {
  double denom = floor;
  for (double p : power) denom += p;
  for (std::size_t k = 0; k < power.size(); ++k) masks[k] = power[k] / denom;
  for (;;) {
    double sum = 0.0;
    for (double m : masks) sum += m;
    if (sum <= 1.0) break;
    for (double& m : masks) m = std::nextafter(m, 0.0);
  }
}

namespace oracle_detail {

inline void check_inputs(const Waveform& mixture, const StemWaveforms& refs) {
  if (refs.empty()) throw InvalidInputError("oracle needs at least one reference stem");
  for (const auto& [k, w] : refs)
    Waveform::require_same_shape(mixture, w, "oracle reference " + std::string(stem_name(k)));
}

struct FrameSpectra {
  // [stem][channel] -> bins
  std::vector<std::vector<std::vector<cplx>>> stems;
};

}  // namespace oracle_detail

inline StemWaveforms ideal_swf(const Waveform& mixture, const StemWaveforms& references,
                               const OracleConfig& cfg = {}) {
  using namespace oracle_detail;
  cfg.validate();
  check_inputs(mixture, references);
  if (mixture.frames() <= cfg.fft_size) throw InvalidInputError("waveform must be longer than fft_size");

  const FrameLayout layout(cfg.stft(), mixture.frames());
  const std::size_t bins = layout.bins();
  const std::size_t nstems = references.size();
  std::vector<const Waveform*> refs;
  for (const auto& [k, w] : references) refs.push_back(&w);

  FrameAnalyzer an(layout);
  StemWaveforms out;
  for (const auto& [k, w] : references) out.emplace(k, Waveform(mixture.channels(), mixture.frames(), mixture.sample_rate()));

  std::vector<cplx> mix(bins), masked(bins);
  std::vector<std::vector<cplx>> spec(nstems, std::vector<cplx>(bins));
  std::vector<double> power(nstems), masks(nstems);
  std::vector<std::vector<double>> mask_table(nstems, std::vector<double>(bins));

  for (std::size_t c = 0; c < mixture.channels(); ++c) {
    std::vector<OverlapAdder> ola(nstems, OverlapAdder(layout));
    for (std::size_t t = 0; t < layout.frames; ++t) {
      an.analyze(mixture.channel(c), t, mix);
      for (std::size_t k = 0; k < nstems; ++k) an.analyze(refs[k]->channel(c), t, spec[k]);
      for (std::size_t f = 0; f < bins; ++f) {
        for (std::size_t k = 0; k < nstems; ++k) {
          double mag2 = std::norm(spec[k][f]);
          power[k] = cfg.mask_exponent == 2.0 ? mag2 : std::pow(std::sqrt(mag2), cfg.mask_exponent);
        }
        swf_masks(power, cfg.swf_floor, masks);
        for (std::size_t k = 0; k < nstems; ++k) mask_table[k][f] = masks[k];
      }
      for (std::size_t k = 0; k < nstems; ++k) {
        for (std::size_t f = 0; f < bins; ++f) masked[f] = mask_table[k][f] * mix[f];
        ola[k].add(masked, t);
      }
    }
    std::size_t k = 0;
    for (auto& [kind, w] : out) ola[k++].finish(w.channel(c));
  }
  return out;
}

// Requires exactly two channels (closed-form 2x2 inversion).
inline StemWaveforms ideal_mwf(const Waveform& mixture, const StemWaveforms& references,
                               const OracleConfig& cfg = {}) {
  using namespace oracle_detail;
  cfg.validate();
  check_inputs(mixture, references);
  if (mixture.channels() != 2) throw InvalidInputError("multichannel Wiener filter needs a stereo mixture");
  if (mixture.frames() <= cfg.fft_size) throw InvalidInputError("waveform must be longer than fft_size");

  const FrameLayout layout(cfg.stft(), mixture.frames());
  const std::size_t bins = layout.bins();
  const std::size_t nstems = references.size();
  const std::size_t ctx = cfg.covariance_context;
  std::vector<const Waveform*> refs;
  for (const auto& [k, w] : references) refs.push_back(&w);

  FrameAnalyzer an(layout);
  auto analyze_refs = [&](std::size_t t) {
    FrameSpectra fs;
    fs.stems.assign(nstems, std::vector<std::vector<cplx>>(2, std::vector<cplx>(bins)));
    for (std::size_t k = 0; k < nstems; ++k)
      for (std::size_t c = 0; c < 2; ++c) an.analyze(refs[k]->channel(c), t, fs.stems[k][c]);
    return fs;
  };

  // window holds spectra for frames [first, first + window.size()).
  std::deque<FrameSpectra> window;
  std::size_t first = 0;
  std::size_t next = 0;

  std::vector<std::vector<OverlapAdder>> ola(nstems, std::vector<OverlapAdder>(2, OverlapAdder(layout)));
  std::vector<std::vector<cplx>> mix(2, std::vector<cplx>(bins));
  std::vector<std::vector<std::vector<cplx>>> est(nstems, std::vector<std::vector<cplx>>(2, std::vector<cplx>(bins)));
  // Per-stem covariance for one bin: r11, r22 real; r12 complex.
  std::vector<double> r11(nstems), r22(nstems);
  std::vector<cplx> r12(nstems);

  for (std::size_t t = 0; t < layout.frames; ++t) {
    const std::size_t lo = t >= ctx ? t - ctx : 0;
    const std::size_t hi = std::min(layout.frames - 1, t + ctx);
    while (next <= hi) {
      window.push_back(analyze_refs(next));
      ++next;
    }
    while (first < lo) {
      window.pop_front();
      ++first;
    }
    const double count = static_cast<double>(hi - lo + 1);
    for (std::size_t c = 0; c < 2; ++c) an.analyze(mixture.channel(c), t, mix[c]);

    for (std::size_t f = 0; f < bins; ++f) {
      double a11 = 0.0, a22 = 0.0;
      cplx a12 = 0.0;
      for (std::size_t k = 0; k < nstems; ++k) {
        double s11 = 0.0, s22 = 0.0;
        cplx s12 = 0.0;
        for (std::size_t tau = lo; tau <= hi; ++tau) {
          const auto& st = window[tau - first].stems[k];
          const cplx x = st[0][f], y = st[1][f];
          s11 += std::norm(x);
          s22 += std::norm(y);
          s12 += x * std::conj(y);
        }
        r11[k] = s11 / count;
        r22[k] = s22 / count;
        r12[k] = s12 / count;
        a11 += r11[k];
        a22 += r22[k];
        a12 += r12[k];
      }
      const double trace = a11 + a22;
      if (!(trace > 0.0)) {
        for (std::size_t k = 0; k < nstems; ++k) est[k][0][f] = est[k][1][f] = 0.0;
        continue;
      }
      const double lambda = cfg.mwf_regularization * trace;
      a11 += lambda;
      a22 += lambda;
      const double det = a11 * a22 - std::norm(a12);
      // inv(A) = [a22, -a12; -conj(a12), a11] / det; apply to the mixture first.
      const cplx x0 = mix[0][f], x1 = mix[1][f];
      const cplx v0 = (a22 * x0 - a12 * x1) / det;
      const cplx v1 = (-std::conj(a12) * x0 + a11 * x1) / det;
      for (std::size_t k = 0; k < nstems; ++k) {
        est[k][0][f] = r11[k] * v0 + r12[k] * v1;
        est[k][1][f] = std::conj(r12[k]) * v0 + r22[k] * v1;
      }
    }
    for (std::size_t k = 0; k < nstems; ++k)
      for (std::size_t c = 0; c < 2; ++c) ola[k][c].add(est[k][c], t);
  }

  StemWaveforms out;
  std::size_t k = 0;
  for (const auto& [kind, w] : references) {
    Waveform y(2, mixture.frames(), mixture.sample_rate());
    for (std::size_t c = 0; c < 2; ++c) ola[k][c].finish(y.channel(c));
    out.emplace(kind, std::move(y));
    ++k;
  }
  return out;
}

// Lower-bound system: the mixture itself as every stem's estimate.
inline StemWaveforms mixture_baseline(const Waveform& mixture) {
  StemWaveforms out;
  for (StemKind k : kAllStems) out.emplace(k, mixture);
  return out;
}

inline StemWaveforms run_oracle(OracleKind kind, const Waveform& mixture, const StemWaveforms& references,
                                const OracleConfig& cfg = {}) {
  switch (kind) {
    case OracleKind::Swf: return ideal_swf(mixture, references, cfg);
    case OracleKind::Mwf: return ideal_mwf(mixture, references, cfg);
    case OracleKind::Baseline: return mixture_baseline(mixture);
  }
  throw InvalidInputError("unknown oracle kind");
}

}  // namespace mdx
