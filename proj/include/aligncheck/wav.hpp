#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aligncheck {

inline constexpr double kRmsFrameS = 0.010;

// Decoded mono audio with per-frame RMS over non-overlapping 10 ms frames.
struct AudioTrack {
  std::string rec_id;
  int sample_rate_hz = 0;
  std::vector<float> samples;      // normalized to [-1, 1]
  std::vector<double> frame_rms;   // floor(n / (0.010 * rate)) frames

  double duration_s() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

enum class ChannelPolicy { Mix, Left, Right };

std::vector<double> compute_frame_rms(const std::vector<float>& samples,
                                      int sample_rate_hz);

// PCM 16-bit RIFF/WAVE, 1 or 2 channels. Throws UnsupportedFormatError or
// TruncatedFileError.
AudioTrack read_wav_mono(const std::vector<std::uint8_t>& bytes,
                         ChannelPolicy policy = ChannelPolicy::Mix);
AudioTrack read_wav_file(const std::string& path,
                         ChannelPolicy policy = ChannelPolicy::Mix);

std::vector<std::uint8_t> encode_wav_mono(const std::vector<float>& samples,
                                          int sample_rate_hz);
void write_wav_file(const std::string& path, const std::vector<float>& samples,
                    int sample_rate_hz);

}  // namespace aligncheck
