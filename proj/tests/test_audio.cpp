#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "veilkit/audio.hpp"
#include "veilkit/errors.hpp"
#include "veilkit/rng.hpp"

using namespace veilkit;

namespace {

constexpr std::uint32_t kRate = 16000;

AudioBuffer silence(double seconds) {
    return {std::vector<double>(static_cast<std::size_t>(seconds * kRate), 0.0), kRate};
}

void add_tone(AudioBuffer& buf, double hz, double amplitude, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to && i < buf.samples.size(); ++i)
        buf.samples[i] += amplitude * std::sin(2.0 * std::numbers::pi * hz *
                                               static_cast<double>(i) / buf.rate);
}

void add_noise(AudioBuffer& buf, double amplitude, Rng& rng) {
    for (auto& s : buf.samples) s += amplitude * (2.0 * rng.unit() - 1.0);
}

double rms(const std::vector<double>& v) {
    double acc = 0.0;
    for (const double s : v) acc += s * s;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// Energy near `hz` vs energy elsewhere, over a Hann-windowed power-of-two
// block from the middle of the region. The window keeps off-bin tone leakage
// out of the "rest" bucket so the measurement sees the noise floor.
double tone_band_snr_db(const AudioBuffer& buf, double hz, std::size_t from, std::size_t to) {
    const std::size_t n = 4096;
    REQUIRE(to - from >= n);
    const std::size_t start = from + (to - from - n) / 2;
    const auto window = hann_window(n);
    std::vector<std::complex<double>> frame(n);
    for (std::size_t i = 0; i < n; ++i) frame[i] = buf.samples[start + i] * window[i];
    fft(frame, false);
    const double bin_hz = static_cast<double>(buf.rate) / static_cast<double>(n);
    const std::size_t tone_bin = static_cast<std::size_t>(hz / bin_hz + 0.5);
    double tone_energy = 0.0, rest_energy = 0.0;
    for (std::size_t b = 1; b <= n / 2; ++b) {
        const double e = std::norm(frame[b]);
        if (b + 6 >= tone_bin && b <= tone_bin + 6) tone_energy += e;
        else rest_energy += e;
    }
    return 10.0 * std::log10(tone_energy / rest_energy);
}

} // namespace

TEST_CASE("stft round trip reconstructs the signal") {
    Rng rng(1);
    AudioBuffer buf = silence(0.7);
    add_tone(buf, 440.0, 0.4, 0, buf.samples.size());
    add_noise(buf, 0.1, rng);

    const auto frames = stft(buf.samples, 1024, 256);
    const auto back = istft(frames, 1024, 256, buf.samples.size());
    REQUIRE(back.size() == buf.samples.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i)
        max_err = std::max(max_err, std::abs(back[i] - buf.samples[i]));
    CHECK(max_err < 1e-6);
}

TEST_CASE("fft matches the analytic transform of a pure tone") {
    const std::size_t n = 256;
    std::vector<std::complex<double>> data(n);
    for (std::size_t i = 0; i < n; ++i)
        data[i] = std::cos(2.0 * std::numbers::pi * 8.0 * static_cast<double>(i) /
                           static_cast<double>(n));
    fft(data, false);
    // A cosine at bin 8 concentrates n/2 in bins 8 and n-8.
    for (std::size_t b = 0; b <= n / 2; ++b) {
        const double expected = (b == 8) ? n / 2.0 : 0.0;
        CHECK(std::abs(std::abs(data[b]) - expected) < 1e-9);
    }
    std::vector<std::complex<double>> odd(3);
    CHECK_THROWS_AS(fft(odd, false), ConfigError);
}

TEST_CASE("vad: silence yields no intervals") {
    CHECK(detect_voice(silence(1.0)).empty());
    CHECK(detect_voice(AudioBuffer{{}, kRate}).empty());
}

TEST_CASE("vad: silence|tone|silence yields one interval over the tone") {
    AudioBuffer buf = silence(3.0);
    const std::size_t second = kRate;
    add_tone(buf, 220.0, 0.9, second, 2 * second);

    const VadParams params;
    const auto intervals = detect_voice(buf, params);
    REQUIRE(intervals.size() == 1);

    const auto frame_len = static_cast<std::size_t>(params.frame_ms / 1000.0 * kRate);
    const std::size_t slack = (2 + params.hangover_frames) * frame_len;
    CHECK(intervals[0].start >= second - 2 * frame_len);
    CHECK(intervals[0].start <= second + 2 * frame_len);
    CHECK(intervals[0].end >= 2 * second - 2 * frame_len);
    CHECK(intervals[0].end <= 2 * second + slack);
}

TEST_CASE("vad: an all-voiced constant tone covers the whole buffer") {
    AudioBuffer buf = silence(1.0);
    add_tone(buf, 220.0, 0.9, 0, buf.samples.size());
    const auto intervals = detect_voice(buf);
    REQUIRE(intervals.size() == 1);
    CHECK(intervals[0].start == 0);
    CHECK(intervals[0].end == buf.samples.size());
}

TEST_CASE("interval complement") {
    CHECK(complement_intervals({}, 10) == std::vector<VoiceInterval>{{0, 10}});
    CHECK(complement_intervals({{0, 10}}, 10).empty());
    CHECK(complement_intervals({{2, 4}, {6, 8}}, 10) ==
          std::vector<VoiceInterval>{{0, 2}, {4, 6}, {8, 10}});
}

TEST_CASE("noise profile: flat for white noise, zero for silence, error when starved") {
    Rng rng(2);
    AudioBuffer noise = silence(1.0);
    add_noise(noise, 0.2, rng);
    const auto profile = noise_profile(noise, {{0, noise.samples.size()}}, 1024, 256);
    REQUIRE(profile.magnitude.size() == 513);
    // Wide statistical check: interior bins stay within a factor of the median.
    std::vector<double> interior(profile.magnitude.begin() + 8, profile.magnitude.end() - 8);
    std::vector<double> sorted = interior;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (const double m : interior) {
        CHECK(m > median * 0.3);
        CHECK(m < median * 3.0);
    }

    const auto zero = noise_profile(silence(0.5), {{0, 4000}}, 1024, 256);
    for (const double m : zero.magnitude) CHECK(m == 0.0);

    CHECK_THROWS_AS(noise_profile(noise, {}, 1024, 256), InsufficientNoiseError);
    CHECK_THROWS_AS(noise_profile(noise, {{0, 512}}, 1024, 256), InsufficientNoiseError);
}

TEST_CASE("spectral gate with a zero profile passes the signal through") {
    Rng rng(3);
    AudioBuffer buf = silence(0.5);
    add_tone(buf, 330.0, 0.5, 0, buf.samples.size());
    add_noise(buf, 0.05, rng);

    NoiseProfile zero;
    zero.magnitude.assign(513, 0.0);
    const auto out = spectral_gate(buf, zero, 30.0, 4.0);
    REQUIRE(out.samples.size() == buf.samples.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        max_err = std::max(max_err, std::abs(out.samples[i] - buf.samples[i]));
    CHECK(max_err < 1e-6);
}

TEST_CASE("gating pure noise with its own profile removes nearly all energy") {
    Rng rng(4);
    AudioBuffer noise = silence(1.0);
    add_noise(noise, 0.1, rng);
    const auto profile = noise_profile(noise, {{0, noise.samples.size()}}, 1024, 256);
    const auto out = spectral_gate(noise, profile, 60.0, 4.0);
    CHECK(rms(out.samples) <= 0.05 * rms(noise.samples));
}

TEST_CASE("clean improves the tone-band snr by at least 10 dB") {
    Rng rng(5);
    AudioBuffer buf = silence(3.0);
    const std::size_t second = kRate;
    add_tone(buf, 220.0, 0.5, second, 2 * second);
    add_noise(buf, 0.01, rng);

    const auto before = tone_band_snr_db(buf, 220.0, second, 2 * second);
    const auto result = clean(buf);
    CHECK_FALSE(result.passthrough);
    REQUIRE(result.out.samples.size() == buf.samples.size());
    const auto after = tone_band_snr_db(result.out, 220.0, second, 2 * second);
    CHECK(after - before >= 10.0);
}

TEST_CASE("clean maps silence to silence and preserves length") {
    const auto result = clean(silence(1.0));
    REQUIRE(result.out.samples.size() == static_cast<std::size_t>(kRate));
    // No voice, whole signal is noise material: gating silence stays silent.
    for (const double s : result.out.samples) CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("clean passes through when everything is voiced") {
    AudioBuffer buf = silence(1.0);
    add_tone(buf, 220.0, 0.9, 0, buf.samples.size());
    const auto result = clean(buf);
    CHECK(result.passthrough);
    CHECK(result.out.samples == buf.samples);
}

TEST_CASE("clean honors externally supplied voice intervals") {
    Rng rng(6);
    AudioBuffer buf = silence(2.0);
    add_tone(buf, 220.0, 0.5, 0, kRate);
    add_noise(buf, 0.01, rng);

    CleanParams params;
    params.use_override = true;
    params.voice_intervals_override = {{0, kRate}};  // noise estimated from the rest
    const auto result = clean(buf, params);
    CHECK_FALSE(result.passthrough);
    CHECK(result.out.samples.size() == buf.samples.size());
}

TEST_CASE("clean is deterministic") {
    Rng rng(7);
    AudioBuffer buf = silence(1.5);
    add_tone(buf, 300.0, 0.4, kRate / 2, kRate);
    add_noise(buf, 0.02, rng);
    const auto a = clean(buf);
    const auto b = clean(buf);
    CHECK(a.out.samples == b.out.samples);
}

TEST_CASE("gating never increases total energy") {
    Rng rng(8);
    for (int iter = 0; iter < 5; ++iter) {
        AudioBuffer buf = silence(0.8);
        add_tone(buf, 100.0 + 70.0 * iter, 0.3, kRate / 4, kRate / 2);
        add_noise(buf, 0.01 + 0.01 * iter, rng);
        const auto result = clean(buf);
        CHECK(rms(result.out.samples) <= rms(buf.samples) * (1.0 + 1e-9));
    }
}

TEST_CASE("wav round trip is bit-exact for pass-through") {
    Rng rng(9);
    AudioBuffer buf = silence(0.25);
    add_tone(buf, 500.0, 0.7, 0, buf.samples.size());
    add_noise(buf, 0.05, rng);
    // Quantize to exactly representable 16-bit values first.
    for (auto& s : buf.samples)
        s = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0) / 32768.0;
    for (auto& s : buf.samples) s = std::min(s, 32767.0 / 32768.0);

    const std::string path = "test_roundtrip.wav";
    write_wav(path, buf);
    const auto read_back = read_wav(path);
    CHECK(read_back.rate == kRate);
    REQUIRE(read_back.samples.size() == buf.samples.size());
    for (std::size_t i = 0; i < buf.samples.size(); ++i)
        CHECK(read_back.samples[i] == buf.samples[i]);

    // Writing the read-back signal reproduces the file byte for byte.
    const std::string path2 = "test_roundtrip2.wav";
    write_wav(path2, read_back);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("wav reader rejects non-pcm input and downmixes stereo") {
    const std::string path = "test_bad.wav";
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a wav at all";
    }
    CHECK_THROWS_AS(read_wav(path), DataError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_wav("does_not_exist.wav"), DataError);

    // Hand-built stereo file: L = 8192, R = 0 -> mono mean 4096/32768.
    const std::string stereo_path = "test_stereo.wav";
    {
        std::string bytes = "RIFF";
        auto u32 = [&](std::uint32_t v) {
            for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
        };
        auto u16 = [&](std::uint16_t v) {
            bytes.push_back(static_cast<char>(v & 0xFF));
            bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
        };
        const std::uint32_t frames = 100;
        u32(36 + frames * 4);
        bytes += "WAVEfmt ";
        u32(16);
        u16(1);
        u16(2);  // stereo
        u32(8000);
        u32(8000 * 4);
        u16(4);
        u16(16);
        bytes += "data";
        u32(frames * 4);
        for (std::uint32_t f = 0; f < frames; ++f) {
            u16(8192);  // left
            u16(0);     // right
        }
        std::ofstream out(stereo_path, std::ios::binary);
        out << bytes;
    }
    const auto mono = read_wav(stereo_path);
    CHECK(mono.rate == 8000);
    REQUIRE(mono.samples.size() == 100);
    for (const double s : mono.samples) CHECK(s == doctest::Approx(4096.0 / 32768.0));
    std::remove(stereo_path.c_str());
}

TEST_CASE("intervals json loads seconds and clamps to the signal") {
    const std::string path = "test_intervals.json";
    {
        std::ofstream out(path);
        out << R"({"intervals":[{"start":0.0,"end":0.5},{"start":0.9,"end":99.0}]})";
    }
    const auto intervals = read_intervals_json(path, kRate, 2 * kRate);
    REQUIRE(intervals.size() == 2);
    CHECK(intervals[0].start == 0);
    CHECK(intervals[0].end == kRate / 2);
    CHECK(intervals[1].end == 2 * kRate);
    std::remove(path.c_str());
}
