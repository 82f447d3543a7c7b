#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace veilkit {

struct AudioBuffer {
    std::vector<double> samples;  // mono, [-1, 1]
    std::uint32_t rate = 16000;   // samples per second
};

struct VoiceInterval {
    std::size_t start = 0;  // sample indices, [start, end)
    std::size_t end = 0;
    friend bool operator==(const VoiceInterval&, const VoiceInterval&) = default;
};

// ---------------------------------------------------------------------------
// Voice activity detection (adaptive energy rule)

struct VadParams {
    double frame_ms = 20.0;
    // A frame is voiced when its RMS exceeds the median frame RMS by this
    // margin...
    double threshold_db = 6.0;
    // ...or exceeds this absolute level outright — otherwise a recording
    // that is voice from end to end would estimate its own voice as the
    // noise floor and detect nothing.
    double voice_floor_dbfs = -30.0;
    std::size_t hangover_frames = 4;  // extends voiced runs to catch trailing energy
};

std::vector<VoiceInterval> detect_voice(const AudioBuffer& buf, const VadParams& params = {});

// Complement of `intervals` within [0, length).
std::vector<VoiceInterval> complement_intervals(const std::vector<VoiceInterval>& intervals,
                                                std::size_t length);

// ---------------------------------------------------------------------------
// Noise profile and spectral gating

struct NoiseProfile {
    std::vector<double> magnitude;  // fft_size/2 + 1 bins, mean magnitude
    std::size_t fft_size = 1024;
    std::size_t hop = 256;
    std::string window = "hann";
};

// Mean per-bin magnitude over analysis windows lying fully inside non-voice
// intervals. Throws InsufficientNoiseError when not even one window fits
// (callers should fall back to pass-through).
NoiseProfile noise_profile(const AudioBuffer& buf, const std::vector<VoiceInterval>& nonvoice,
                           std::size_t fft_size = 1024, std::size_t hop = 256);

// STFT -> attenuate bins whose magnitude falls below gate_factor times the
// profile magnitude by reduction_db (phase untouched) -> inverse STFT.
// Output length equals input length.
AudioBuffer spectral_gate(const AudioBuffer& buf, const NoiseProfile& profile,
                          double reduction_db = 30.0, double gate_factor = 4.0);

// ---------------------------------------------------------------------------
// Full cleaning pipeline

struct CleanParams {
    VadParams vad;
    std::size_t fft_size = 1024;
    std::size_t hop = 256;
    double reduction_db = 30.0;
    double gate_factor = 4.0;
    // Overrides the energy VAD with externally supplied voice intervals
    // (e.g. from a dedicated model, via the JSON intervals file).
    std::vector<VoiceInterval> voice_intervals_override;
    bool use_override = false;
};

struct CleanResult {
    AudioBuffer out;
    bool passthrough = false;  // insufficient non-voice material; out == input
};

CleanResult clean(const AudioBuffer& buf, const CleanParams& params = {});

// ---------------------------------------------------------------------------
// Primitives shared with the tests

// Iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse);

std::vector<double> hann_window(std::size_t n);

// Analysis/synthesis pair with perfect reconstruction for hop = fft_size/4.
std::vector<std::vector<std::complex<double>>> stft(const std::vector<double>& samples,
                                                    std::size_t fft_size, std::size_t hop);
std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& frames,
                          std::size_t fft_size, std::size_t hop, std::size_t length);

// ---------------------------------------------------------------------------
// WAV I/O (RIFF PCM 16-bit; stereo is down-mixed by averaging)

AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& buf);

// {"intervals": [{"start": seconds, "end": seconds}, ...]}
std::vector<VoiceInterval> read_intervals_json(const std::string& path, std::uint32_t rate,
                                               std::size_t length);

} // namespace veilkit
