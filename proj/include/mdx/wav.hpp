#pragma once

// RIFF/WAVE reader and writer. Reads PCM16, PCM24 and IEEE float32 (plain or
// WAVE_FORMAT_EXTENSIBLE); always writes IEEE float32.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/waveform.hpp"

namespace mdx {

namespace wav_detail {

inline constexpr std::uint16_t kFormatPcm = 0x0001;
inline constexpr std::uint16_t kFormatFloat = 0x0003;
inline constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

inline FormatChunk parse_fmt(const unsigned char* p, std::uint32_t size, const std::string& path) {
  if (size < 16) throw FormatError(path + ": fmt chunk too short");
  FormatChunk f;
  f.format = le16(p);
  f.channels = le16(p + 2);
  f.sample_rate = le32(p + 4);
  f.block_align = le16(p + 12);
  f.bits = le16(p + 14);
  if (f.format == kFormatExtensible) {
    if (size < 40) throw FormatError(path + ": extensible fmt chunk too short");
    // First two bytes of the subformat GUID carry the plain format tag.
    f.format = le16(p + 24);
  }
  return f;
}

// Decodes one sample from little-endian bytes.
inline double decode(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    float v;
    std::uint32_t raw = le32(p);
    std::memcpy(&v, &raw, sizeof v);
    return static_cast<double>(v);
  }
  if (bits == 16) return static_cast<std::int16_t>(le16(p)) / 32768.0;
  std::int32_t v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) << 8 |
                                             static_cast<std::uint32_t>(p[1]) << 16 |
                                             static_cast<std::uint32_t>(p[2]) << 24) >> 8;
  return v / 8388608.0;
}

}  // namespace wav_detail

// Parses an in-memory WAVE image. `name` only labels error messages.
inline Waveform decode_wav(const std::vector<unsigned char>& bytes, const std::string& name) {
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError(name + ": not a RIFF/WAVE file");

  std::optional<FormatChunk> fmt;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  bool data_truncated = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t size = le32(hdr + 4);
    std::size_t body = pos + 8;
    std::size_t available = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size > available) throw FormatError(name + ": fmt chunk runs past end of file");
      fmt = parse_fmt(bytes.data() + body, size, name);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
      if (size > available) {
        data_truncated = true;
        data_size = available;
      }
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!fmt) throw FormatError(name + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(name + ": missing data chunk");

  const bool pcm = fmt->format == kFormatPcm && (fmt->bits == 16 || fmt->bits == 24);
  const bool flt = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm && !flt)
    throw UnsupportedCodecError(name + ": unsupported encoding (format tag " +
                                std::to_string(fmt->format) + ", " + std::to_string(fmt->bits) +
                                " bits)");
  if (fmt->channels == 0) throw FormatError(name + ": zero channels");
  if (fmt->sample_rate == 0) throw FormatError(name + ": zero sample rate");
  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  if (fmt->block_align != frame_bytes) throw FormatError(name + ": inconsistent block alignment");
  if (data_truncated || data_size % frame_bytes != 0)
    throw CorruptFileError(name + ": truncated data chunk");

  const std::size_t channels = fmt->channels;
  const std::size_t frames = data_size / frame_bytes;
  std::vector<double> samples(channels * frames);
  for (std::size_t n = 0; n < frames; ++n)
    for (std::size_t c = 0; c < channels; ++c)
      samples[c * frames + n] =
          decode(data + n * frame_bytes + c * bytes_per_sample, fmt->format, fmt->bits);
  try {
    return Waveform(channels, static_cast<int>(fmt->sample_rate), std::move(samples));
  } catch (const InvalidInputError& e) {
    throw CorruptFileError(name + ": " + e.what());
  }
}

inline Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return decode_wav(bytes, path.string());
}

// Float32 WAVE image of `w`. Samples are rounded to the nearest float, so
// waveforms whose samples are already float-representable round-trip exactly.
inline std::vector<unsigned char> encode_wav(const Waveform& w) {
  using namespace wav_detail;
  if (w.channels() == 0 || w.frames() == 0)
    throw InvalidInputError("cannot write a waveform with no frames");
  const std::uint64_t data_bytes = std::uint64_t{4} * w.channels() * w.frames();
  if (data_bytes > 0xFFFFFFFFull - 64) throw InvalidInputError("waveform too large for RIFF");

  std::vector<unsigned char> out;
  out.reserve(static_cast<std::size_t>(data_bytes) + 58);
  put_tag(out, "RIFF");
  put32(out, static_cast<std::uint32_t>(4 + (8 + 18) + (8 + 4) + 8 + data_bytes));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 18);
  put16(out, kFormatFloat);
  put16(out, static_cast<std::uint16_t>(w.channels()));
  put32(out, static_cast<std::uint32_t>(w.sample_rate()));
  put32(out, static_cast<std::uint32_t>(w.sample_rate() * 4 * w.channels()));
  put16(out, static_cast<std::uint16_t>(4 * w.channels()));
  put16(out, 32);
  put16(out, 0);
  put_tag(out, "fact");
  put32(out, 4);
  put32(out, static_cast<std::uint32_t>(w.frames()));
  put_tag(out, "data");
  put32(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t n = 0; n < w.frames(); ++n)
    for (std::size_t c = 0; c < w.channels(); ++c) {
      float v = static_cast<float>(w.at(c, n));
      if (!std::isfinite(v)) throw InvalidInputError("sample exceeds the float32 range");
      put32(out, std::bit_cast<std::uint32_t>(v));
    }
  return out;
}

inline void write_wav(const Waveform& w, const std::filesystem::path& path) {
  auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace mdx
