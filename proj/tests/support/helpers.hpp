#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "mdx/waveform.hpp"

namespace testing_support {

inline mdx::Waveform random_waveform(std::mt19937_64& rng, std::size_t channels, std::size_t frames,
                                     double scale = 1.0, int sr = 44100) {
  std::normal_distribution<double> d(0.0, scale);
  mdx::Waveform w(channels, frames, sr);
  for (std::size_t c = 0; c < channels; ++c)
    for (double& v : w.channel(c)) v = d(rng);
  return w;
}

inline mdx::Waveform add_noise(const mdx::Waveform& w, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> d(0.0, sigma);
  mdx::Waveform out = w;
  for (std::size_t c = 0; c < out.channels(); ++c)
    for (double& v : out.channel(c)) v += d(rng);
  return out;
}

// 16-bit PCM writer (the library itself only writes float files).
// Samples are rounded to the nearest step of 1/32768 and clipped.
inline void write_pcm16(const mdx::Waveform& w, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) f.put(static_cast<char>(v >> (8 * i)));
  };
  auto u16 = [&](std::uint16_t v) {
    f.put(static_cast<char>(v));
    f.put(static_cast<char>(v >> 8));
  };
  const auto ch = static_cast<std::uint16_t>(w.channels());
  const auto data = static_cast<std::uint32_t>(w.frames() * ch * 2);
  const auto sr = static_cast<std::uint32_t>(w.sample_rate());
  f.write("RIFF", 4);
  u32(36 + data);
  f.write("WAVEfmt ", 8);
  u32(16);
  u16(1);
  u16(ch);
  u32(sr);
  u32(sr * ch * 2);
  u16(static_cast<std::uint16_t>(ch * 2));
  u16(16);
  f.write("data", 4);
  u32(data);
  for (std::size_t n = 0; n < w.frames(); ++n)
    for (std::size_t c = 0; c < w.channels(); ++c) {
      double q = std::clamp(std::round(w.at(c, n) * 32768.0), -32768.0, 32767.0);
      u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "mdx") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
