#include "veilkit/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "veilkit/errors.hpp"

namespace veilkit {

namespace {

constexpr double kSilenceFloorDb = -200.0;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double rms_db(const double* samples, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += samples[i] * samples[i];
    const double rms = std::sqrt(acc / static_cast<double>(n));
    if (rms <= 0.0) return kSilenceFloorDb;
    return std::max(20.0 * std::log10(rms), kSilenceFloorDb);
}

} // namespace

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw ConfigError("fft size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : data) x /= static_cast<double>(n);
    }
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    return w;
}

std::vector<std::vector<std::complex<double>>> stft(const std::vector<double>& samples,
                                                    std::size_t fft_size, std::size_t hop) {
    if (!is_power_of_two(fft_size)) throw ConfigError("stft: fft_size must be a power of two");
    if (hop == 0 || fft_size % hop != 0) throw ConfigError("stft: hop must divide fft_size");

    // Zero-pad both ends so every original sample sees a full window sum.
    const std::size_t pad = fft_size;
    const std::size_t padded_len = samples.size() + 2 * pad;
    const auto window = hann_window(fft_size);

    std::vector<std::vector<std::complex<double>>> frames;
    for (std::size_t start = 0; start + fft_size <= padded_len; start += hop) {
        std::vector<std::complex<double>> frame(fft_size);
        for (std::size_t i = 0; i < fft_size; ++i) {
            const std::size_t idx = start + i;
            const double x = (idx >= pad && idx - pad < samples.size()) ? samples[idx - pad] : 0.0;
            frame[i] = x * window[i];
        }
        fft(frame, false);
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& frames,
                          std::size_t fft_size, std::size_t hop, std::size_t length) {
    const std::size_t pad = fft_size;
    const auto window = hann_window(fft_size);

    // Hann^2 at 75% overlap sums to a constant 1.5 away from the padded ends.
    const double norm = 1.5 * (static_cast<double>(fft_size / 4) / static_cast<double>(hop));

    std::vector<double> acc(length + 2 * pad, 0.0);
    std::size_t start = 0;
    for (const auto& spectrum : frames) {
        std::vector<std::complex<double>> frame = spectrum;
        fft(frame, true);
        for (std::size_t i = 0; i < fft_size && start + i < acc.size(); ++i)
            acc[start + i] += frame[i].real() * window[i];
        start += hop;
    }
    std::vector<double> out(length);
    for (std::size_t i = 0; i < length; ++i) out[i] = acc[i + pad] / norm;
    return out;
}

std::vector<VoiceInterval> detect_voice(const AudioBuffer& buf, const VadParams& params) {
    if (buf.rate == 0) throw ConfigError("detect_voice: zero sample rate");
    if (buf.samples.empty()) return {};
    const std::size_t frame_len = static_cast<std::size_t>(
        params.frame_ms / 1000.0 * static_cast<double>(buf.rate));
    if (frame_len == 0) throw ConfigError("detect_voice: frame shorter than one sample");

    const std::size_t n_frames = (buf.samples.size() + frame_len - 1) / frame_len;
    std::vector<double> frame_db(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t begin = f * frame_len;
        const std::size_t len = std::min(frame_len, buf.samples.size() - begin);
        frame_db[f] = rms_db(buf.samples.data() + begin, len);
    }

    std::vector<double> sorted = frame_db;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median_db = sorted[sorted.size() / 2];

    std::vector<bool> voiced(n_frames, false);
    for (std::size_t f = 0; f < n_frames; ++f)
        voiced[f] = frame_db[f] > median_db + params.threshold_db ||
                    frame_db[f] > params.voice_floor_dbfs;

    // Hangover: keep marking frames voiced for a while after a voiced one.
    std::size_t hang = 0;
    for (std::size_t f = 0; f < n_frames; ++f) {
        if (voiced[f]) {
            hang = params.hangover_frames;
        } else if (hang > 0) {
            voiced[f] = true;
            --hang;
        }
    }

    std::vector<VoiceInterval> intervals;
    for (std::size_t f = 0; f < n_frames; ++f) {
        if (!voiced[f]) continue;
        const std::size_t begin = f * frame_len;
        std::size_t g = f;
        while (g + 1 < n_frames && voiced[g + 1]) ++g;
        const std::size_t end = std::min((g + 1) * frame_len, buf.samples.size());
        intervals.push_back({begin, end});
        f = g;
    }
    return intervals;
}

std::vector<VoiceInterval> complement_intervals(const std::vector<VoiceInterval>& intervals,
                                                std::size_t length) {
    std::vector<VoiceInterval> sorted = intervals;
    std::sort(sorted.begin(), sorted.end(),
              [](const VoiceInterval& a, const VoiceInterval& b) { return a.start < b.start; });
    std::vector<VoiceInterval> out;
    std::size_t cursor = 0;
    for (const auto& iv : sorted) {
        if (iv.start > cursor) out.push_back({cursor, std::min(iv.start, length)});
        cursor = std::max(cursor, iv.end);
    }
    if (cursor < length) out.push_back({cursor, length});
    return out;
}

NoiseProfile noise_profile(const AudioBuffer& buf, const std::vector<VoiceInterval>& nonvoice,
                           std::size_t fft_size, std::size_t hop) {
    if (!is_power_of_two(fft_size)) throw ConfigError("noise_profile: fft_size must be a power of two");
    if (hop == 0) throw ConfigError("noise_profile: zero hop");

    NoiseProfile profile;
    profile.fft_size = fft_size;
    profile.hop = hop;
    profile.magnitude.assign(fft_size / 2 + 1, 0.0);

    const auto window = hann_window(fft_size);
    std::size_t windows_used = 0;
    for (const auto& iv : nonvoice) {
        if (iv.end > buf.samples.size() || iv.start >= iv.end) continue;
        if (iv.end - iv.start < fft_size) continue;
        for (std::size_t start = iv.start; start + fft_size <= iv.end; start += hop) {
            std::vector<std::complex<double>> frame(fft_size);
            for (std::size_t i = 0; i < fft_size; ++i)
                frame[i] = buf.samples[start + i] * window[i];
            fft(frame, false);
            for (std::size_t b = 0; b <= fft_size / 2; ++b)
                profile.magnitude[b] += std::abs(frame[b]);
            ++windows_used;
        }
    }
    if (windows_used == 0)
        throw InsufficientNoiseError(
            "noise_profile: non-voice intervals cannot fit one analysis frame of " +
            std::to_string(fft_size) + " samples; skip filtering and pass the signal through");
    for (auto& m : profile.magnitude) m /= static_cast<double>(windows_used);
    return profile;
}

AudioBuffer spectral_gate(const AudioBuffer& buf, const NoiseProfile& profile,
                          double reduction_db, double gate_factor) {
    if (profile.magnitude.size() != profile.fft_size / 2 + 1)
        throw ConfigError("spectral_gate: profile bin count does not match its fft_size");

    const std::size_t fft_size = profile.fft_size;
    const std::size_t hop = profile.hop;
    const double gain = std::pow(10.0, -reduction_db / 20.0);

    auto frames = stft(buf.samples, fft_size, hop);
    for (auto& frame : frames) {
        for (std::size_t b = 0; b <= fft_size / 2; ++b) {
            if (std::abs(frame[b]) < gate_factor * profile.magnitude[b]) {
                frame[b] *= gain;
                // mirror bin keeps conjugate symmetry, so the inverse stays real
                if (b != 0 && b != fft_size / 2) frame[fft_size - b] *= gain;
            }
        }
    }
    AudioBuffer out;
    out.rate = buf.rate;
    out.samples = istft(frames, fft_size, hop, buf.samples.size());
    return out;
}

CleanResult clean(const AudioBuffer& buf, const CleanParams& params) {
    if (buf.samples.empty()) return {buf, false};

    const std::vector<VoiceInterval> voice =
        params.use_override ? params.voice_intervals_override : detect_voice(buf, params.vad);
    const auto nonvoice = complement_intervals(voice, buf.samples.size());

    NoiseProfile profile;
    try {
        profile = noise_profile(buf, nonvoice, params.fft_size, params.hop);
    } catch (const InsufficientNoiseError&) {
        return {buf, true};
    }
    return {spectral_gate(buf, profile, params.reduction_db, params.gate_factor), false};
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) {
    return std::uint16_t(p[0] | (p[1] << 8));
}
void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

} // namespace

AudioBuffer read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw DataError(path + ": not a RIFF/WAVE file");

    std::uint16_t channels = 0, bits = 0, format = 0;
    std::uint32_t rate = 0;
    std::size_t data_off = 0, data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const std::uint32_t chunk_len = read_u32(p + off + 4);
        const bool is_fmt = std::memcmp(p + off, "fmt ", 4) == 0;
        const bool is_data = std::memcmp(p + off, "data", 4) == 0;
        const std::size_t body = off + 8;
        if (is_fmt && body + 16 <= bytes.size()) {
            format = read_u16(p + body);
            channels = read_u16(p + body + 2);
            rate = read_u32(p + body + 4);
            bits = read_u16(p + body + 14);
        } else if (is_data) {
            data_off = body;
            data_len = std::min<std::size_t>(chunk_len, bytes.size() - body);
        }
        off = body + chunk_len + (chunk_len & 1);
    }

    if (format != 1 || bits != 16)
        throw DataError(path + ": only 16-bit PCM WAV is supported");
    if (channels == 0 || rate == 0 || data_off == 0)
        throw DataError(path + ": missing fmt or data chunk");

    const std::size_t frames = data_len / (2 * channels);
    AudioBuffer buf;
    buf.rate = rate;
    buf.samples.reserve(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
            const std::size_t i = data_off + (f * channels + c) * 2;
            const std::int16_t v =
                static_cast<std::int16_t>(std::uint16_t(p[i] | (p[i + 1] << 8)));
            acc += static_cast<double>(v) / 32768.0;
        }
        buf.samples.push_back(acc / channels);
    }
    return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buf) {
    if (buf.rate == 0) throw ConfigError("write_wav: zero sample rate");
    std::string out;
    const std::uint32_t data_len = static_cast<std::uint32_t>(buf.samples.size() * 2);
    out += "RIFF";
    put_u32(out, 36 + data_len);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, buf.rate);
    put_u32(out, buf.rate * 2);  // byte rate
    put_u16(out, 2);             // block align
    put_u16(out, 16);            // bits
    out += "data";
    put_u32(out, data_len);
    for (const double s : buf.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const long v = std::lround(clamped * 32768.0);
        const std::int16_t pcm = static_cast<std::int16_t>(std::clamp<long>(v, -32768, 32767));
        put_u16(out, static_cast<std::uint16_t>(pcm));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write WAV file " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::vector<VoiceInterval> read_intervals_json(const std::string& path, std::uint32_t rate,
                                               std::size_t length) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open intervals file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    std::vector<VoiceInterval> out;
    for (const auto& iv : j.at("intervals")) {
        const double s = iv.at("start").get<double>();
        const double e = iv.at("end").get<double>();
        if (s < 0.0 || e < s) throw DataError(path + ": bad interval");
        const auto a = static_cast<std::size_t>(s * rate);
        const auto b = std::min(static_cast<std::size_t>(e * rate), length);
        if (a < b) out.push_back({a, b});
    }
    return out;
}

} // namespace veilkit
