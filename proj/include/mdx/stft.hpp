#pragma once

// Short-time Fourier transform with a periodic Hann window. The signal is
// zero-padded by fft_size/2 at the front (and enough at the back) so every
// input sample is covered by a frame with nonzero window weight; the inverse
// divides the overlap-added output by the summed squared window, which makes
// istft(stft(x)) == x up to rounding for any hop < fft_size.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/fft.hpp"
#include "mdx/waveform.hpp"

namespace mdx {

struct StftConfig {
  std::size_t fft_size = 4096;
  std::size_t hop = 1024;

  void validate() const {
    if (fft_size < 2 || !is_power_of_two(fft_size))
      throw InvalidInputError("fft_size must be a power of two >= 2");
    if (hop == 0 || hop > fft_size) throw InvalidInputError("hop must be in [1, fft_size]");
  }
};

inline std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

// Frame geometry shared by the analysis and synthesis sides.
struct FrameLayout {
  std::size_t fft_size = 0;
  std::size_t hop = 0;
  std::size_t signal_length = 0;
  std::size_t frames = 0;

  FrameLayout(const StftConfig& cfg, std::size_t length)
      : fft_size(cfg.fft_size), hop(cfg.hop), signal_length(length) {
    cfg.validate();
    frames = (length + fft_size / 2 - 1) / hop + 1;
  }

  std::size_t pad() const { return fft_size / 2; }
  std::size_t bins() const { return fft_size / 2 + 1; }
  // Offset of frame t's first sample relative to signal sample 0.
  std::ptrdiff_t frame_start(std::size_t t) const {
    return static_cast<std::ptrdiff_t>(t * hop) - static_cast<std::ptrdiff_t>(pad());
  }
};

// Windowed analysis of single frames.
class FrameAnalyzer {
 public:
  explicit FrameAnalyzer(const FrameLayout& layout)
      : layout_(layout), window_(periodic_hann(layout.fft_size)), fft_(layout.fft_size), buf_(layout.fft_size) {}

  void analyze(std::span<const double> channel, std::size_t t, std::span<cplx> out) {
    const std::ptrdiff_t start = layout_.frame_start(t);
    const auto len = static_cast<std::ptrdiff_t>(channel.size());
    for (std::size_t i = 0; i < layout_.fft_size; ++i) {
      std::ptrdiff_t n = start + static_cast<std::ptrdiff_t>(i);
      buf_[i] = (n >= 0 && n < len) ? channel[static_cast<std::size_t>(n)] * window_[i] : 0.0;
    }
    fft_.forward(buf_, out);
  }

 private:
  FrameLayout layout_;
  std::vector<double> window_;
  RealFft fft_;
  std::vector<double> buf_;
};

// Weighted overlap-add for one output channel.
class OverlapAdder {
 public:
  explicit OverlapAdder(const FrameLayout& layout)
      : layout_(layout), window_(periodic_hann(layout.fft_size)), fft_(layout.fft_size),
        buf_(layout.fft_size), acc_(padded_length(layout), 0.0), norm_(padded_length(layout), 0.0) {}

  void add(std::span<const cplx> spectrum, std::size_t t) {
    fft_.inverse(spectrum, buf_);
    const std::size_t base = t * layout_.hop;
    for (std::size_t i = 0; i < layout_.fft_size; ++i) {
      acc_[base + i] += buf_[i] * window_[i];
      norm_[base + i] += window_[i] * window_[i];
    }
  }

  // Writes the normalized signal into `out` (signal_length samples).
  void finish(std::span<double> out) const {
    const std::size_t pad = layout_.pad();
    for (std::size_t n = 0; n < layout_.signal_length; ++n) {
      double w = norm_[n + pad];
      if (!(w > 1e-12)) throw InvalidInputError("window overlap leaves a sample unrecoverable");
      out[n] = acc_[n + pad] / w;
    }
  }

 private:
  static std::size_t padded_length(const FrameLayout& l) { return (l.frames - 1) * l.hop + l.fft_size; }

  FrameLayout layout_;
  std::vector<double> window_;
  RealFft fft_;
  std::vector<double> buf_;
  std::vector<double> acc_;
  std::vector<double> norm_;
};

// Complex STFT bins, logically [channel][freq][time]; stored time-major per
// channel so each frame's spectrum is contiguous.
class Spectrogram {
 public:
  Spectrogram(std::size_t channels, const FrameLayout& layout, int sample_rate)
      : channels_(channels), layout_(layout), sample_rate_(sample_rate),
        bins_(channels * layout.frames * layout.bins()) {}

  std::size_t channels() const { return channels_; }
  std::size_t freq_bins() const { return layout_.bins(); }
  std::size_t time_frames() const { return layout_.frames; }
  std::size_t fft_size() const { return layout_.fft_size; }
  std::size_t hop() const { return layout_.hop; }
  std::size_t signal_length() const { return layout_.signal_length; }
  int sample_rate() const { return sample_rate_; }
  const FrameLayout& layout() const { return layout_; }
  static constexpr const char* window() { return "hann-periodic"; }

  cplx& at(std::size_t c, std::size_t f, std::size_t t) { return bins_[index(c, t) + f]; }
  const cplx& at(std::size_t c, std::size_t f, std::size_t t) const { return bins_[index(c, t) + f]; }

  std::span<cplx> frame(std::size_t c, std::size_t t) { return {bins_.data() + index(c, t), freq_bins()}; }
  std::span<const cplx> frame(std::size_t c, std::size_t t) const {
    return {bins_.data() + index(c, t), freq_bins()};
  }

 private:
  std::size_t index(std::size_t c, std::size_t t) const { return (c * layout_.frames + t) * layout_.bins(); }

  std::size_t channels_;
  FrameLayout layout_;
  int sample_rate_;
  std::vector<cplx> bins_;
};

inline Spectrogram stft(const Waveform& w, const StftConfig& cfg = {}) {
  cfg.validate();
  if (w.frames() <= cfg.fft_size) throw InvalidInputError("waveform must be longer than fft_size");
  FrameLayout layout(cfg, w.frames());
  Spectrogram sp(w.channels(), layout, w.sample_rate());
  FrameAnalyzer an(layout);
  for (std::size_t c = 0; c < w.channels(); ++c)
    for (std::size_t t = 0; t < layout.frames; ++t) an.analyze(w.channel(c), t, sp.frame(c, t));
  return sp;
}

inline Waveform istft(const Spectrogram& sp) {
  const FrameLayout& layout = sp.layout();
  if (sp.channels() == 0 || layout.frames != FrameLayout(StftConfig{layout.fft_size, layout.hop}, layout.signal_length).frames)
    throw InvalidInputError("spectrogram dimensions are inconsistent");
  Waveform out(sp.channels(), layout.signal_length, sp.sample_rate());
  for (std::size_t c = 0; c < sp.channels(); ++c) {
    OverlapAdder ola(layout);
    for (std::size_t t = 0; t < layout.frames; ++t) ola.add(sp.frame(c, t), t);
    ola.finish(out.channel(c));
  }
  return out;
}

}  // namespace mdx
