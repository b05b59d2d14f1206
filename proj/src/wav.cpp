#include "aligncheck/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "aligncheck/errors.hpp"
#include "aligncheck/util.hpp"

namespace aligncheck {

namespace {

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 |
         static_cast<std::uint32_t>(b[off + 3]) << 24;
}

std::uint16_t read_u16(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | b[off + 1] << 8);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
  b.push_back((v >> 16) & 0xff);
  b.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
}

}  // namespace

std::vector<double> compute_frame_rms(const std::vector<float>& samples,
                                      int sample_rate_hz) {
  const auto frame_len =
      static_cast<std::size_t>(kRmsFrameS * sample_rate_hz);
  std::vector<double> rms;
  if (frame_len == 0) return rms;
  const std::size_t n_frames = samples.size() / frame_len;
  rms.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    const std::size_t base = f * frame_len;
    for (std::size_t i = 0; i < frame_len; ++i) {
      const double s = samples[base + i];
      acc += s * s;
    }
    rms.push_back(std::sqrt(acc / static_cast<double>(frame_len)));
  }
  return rms;
}

AudioTrack read_wav_mono(const std::vector<std::uint8_t>& bytes,
                         ChannelPolicy policy) {
  if (bytes.size() < 12) throw TruncatedFileError("WAV: missing RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw UnsupportedFormatError("WAV: not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    char id[5] = {0};
    std::memcpy(id, bytes.data() + off, 4);
    const std::uint32_t size = read_u32(bytes, off + 4);
    const std::size_t body = off + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (body + 16 > bytes.size()) throw TruncatedFileError("WAV: fmt chunk cut short");
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = size;
      if (data_off + data_len > bytes.size()) {
        throw TruncatedFileError("WAV: data chunk extends past end of file");
      }
    }
    off = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_off == 0) {
    throw TruncatedFileError("WAV: missing fmt or data chunk");
  }
  if (format != 1) {
    throw UnsupportedFormatError("WAV: compressed audio not supported (format " +
                                 std::to_string(format) + ")");
  }
  if (bits != 16) {
    throw UnsupportedFormatError("WAV: only 16-bit PCM supported, got " +
                                 std::to_string(bits) + "-bit");
  }
  if (channels != 1 && channels != 2) {
    throw UnsupportedFormatError("WAV: expected 1 or 2 channels, got " +
                                 std::to_string(channels));
  }
  if (rate == 0) throw UnsupportedFormatError("WAV: zero sample rate");

  const std::size_t bytes_per_frame = 2u * channels;
  const std::size_t n = data_len / bytes_per_frame;

  AudioTrack track;
  track.sample_rate_hz = static_cast<int>(rate);
  track.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t base = data_off + i * bytes_per_frame;
    std::int16_t l, r = 0;
    std::memcpy(&l, bytes.data() + base, 2);
    if (channels == 2) std::memcpy(&r, bytes.data() + base + 2, 2);
    double v;
    if (channels == 1) {
      v = l / 32768.0;
    } else {
      switch (policy) {
        case ChannelPolicy::Left: v = l / 32768.0; break;
        case ChannelPolicy::Right: v = r / 32768.0; break;
        default: v = 0.5 * (l + r) / 32768.0; break;
      }
    }
    track.samples.push_back(static_cast<float>(v));
  }
  track.frame_rms = compute_frame_rms(track.samples, track.sample_rate_hz);
  return track;
}

AudioTrack read_wav_file(const std::string& path, ChannelPolicy policy) {
  const std::string raw = util::read_file(path);
  std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
  AudioTrack t = read_wav_mono(bytes, policy);
  return t;
}

std::vector<std::uint8_t> encode_wav_mono(const std::vector<float>& samples,
                                          int sample_rate_hz) {
  std::vector<std::uint8_t> out;
  const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_len);
  for (float s : samples) {
    double v = std::min(1.0, std::max(-1.0, static_cast<double>(s)));
    const auto q = static_cast<std::int16_t>(std::lrint(v * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void write_wav_file(const std::string& path, const std::vector<float>& samples,
                    int sample_rate_hz) {
  const auto bytes = encode_wav_mono(samples, sample_rate_hz);
  util::write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace aligncheck
