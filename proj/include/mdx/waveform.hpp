#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/stem.hpp"

namespace mdx {

// Multichannel time-domain audio, stored channel-major in double precision.
// Samples are dimensionless with full scale at +/-1.0. Every sample is
// finite and every channel has the same number of frames.
class Waveform {
 public:
  Waveform() = default;

  // Silent waveform of the given shape.
  Waveform(std::size_t channels, std::size_t frames, int sample_rate)
      : channels_(channels), frames_(frames), sample_rate_(sample_rate),
        data_(channels * frames, 0.0) {
    check_shape();
  }

  // `channel_major` holds channel 0's frames, then channel 1's, and so on.
  Waveform(std::size_t channels, int sample_rate, std::vector<double> channel_major)
      : channels_(channels), sample_rate_(sample_rate), data_(std::move(channel_major)) {
    if (channels_ == 0) throw InvalidInputError("waveform needs at least one channel");
    if (data_.size() % channels_ != 0)
      throw InvalidInputError("sample count is not a multiple of the channel count");
    frames_ = data_.size() / channels_;
    check_shape();
    check_finite();
  }

  static Waveform from_channels(const std::vector<std::vector<double>>& chans, int sample_rate) {
    if (chans.empty()) throw InvalidInputError("waveform needs at least one channel");
    std::vector<double> flat;
    flat.reserve(chans.size() * chans.front().size());
    for (const auto& c : chans) {
      if (c.size() != chans.front().size())
        throw InvalidInputError("channels have different frame counts");
      flat.insert(flat.end(), c.begin(), c.end());
    }
    return Waveform(chans.size(), sample_rate, std::move(flat));
  }

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  int sample_rate() const { return sample_rate_; }
  bool empty() const { return frames_ == 0; }

  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * frames_, frames_};
  }
  // Mutable access; callers must keep samples finite.
  std::span<double> channel(std::size_t c) { return {data_.data() + c * frames_, frames_}; }

  double at(std::size_t c, std::size_t n) const { return data_[c * frames_ + n]; }
  double& at(std::size_t c, std::size_t n) { return data_[c * frames_ + n]; }

  std::span<const double> samples() const { return data_; }

  bool same_shape(const Waveform& o) const {
    return channels_ == o.channels_ && frames_ == o.frames_ && sample_rate_ == o.sample_rate_;
  }

  Waveform scaled(double gain) const {
    Waveform out = *this;
    for (double& v : out.data_) v *= gain;
    out.check_finite();
    return out;
  }

  Waveform& operator+=(const Waveform& o) {
    require_same_shape(*this, o, "waveform sum");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  friend bool operator==(const Waveform&, const Waveform&) = default;

  void check_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) throw InvalidInputError("waveform contains a non-finite sample");
  }

  static void require_same_shape(const Waveform& a, const Waveform& b, const std::string& what) {
    if (!a.same_shape(b))
      throw InvalidInputError(what + ": shape mismatch (" + describe(a) + " vs " + describe(b) + ")");
  }

  static std::string describe(const Waveform& w) {
    return std::to_string(w.channels_) + "ch x " + std::to_string(w.frames_) + " @ " +
           std::to_string(w.sample_rate_) + " Hz";
  }

 private:
  void check_shape() const {
    if (channels_ == 0) throw InvalidInputError("waveform needs at least one channel");
    if (sample_rate_ <= 0) throw InvalidInputError("sample rate must be positive");
  }

  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  int sample_rate_ = 0;
  std::vector<double> data_;
};

// Per-stem audio, e.g. the references or estimates of one song.
using StemWaveforms = std::map<StemKind, Waveform>;

}  // namespace mdx
