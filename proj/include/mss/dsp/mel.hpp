#pragma once

#include "mss/core/error.hpp"
#include "mss/core/matrix.hpp"
#include "mss/dsp/audio.hpp"
#include "mss/dsp/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace mss::dsp {

inline constexpr double kLogFloor = 1e-5;

struct MelConfig {
    int sample_rate = kDefaultSampleRate;
    double frame_shift_ms = 12.5;
    int n_fft = 1024;
    int win_length = 1024;
    int n_mels = 80;
    double fmin = 0.0;
    double fmax = 12000.0;
    double log_floor = kLogFloor;

    /// Hop in samples: round(frame_shift_ms * sample_rate / 1000).
    [[nodiscard]] int hop() const {
        return static_cast<int>(std::lround(frame_shift_ms * sample_rate / 1000.0));
    }
    [[nodiscard]] int bins() const { return n_fft / 2 + 1; }

    void validate() const {
        if (sample_rate <= 0) throw InvalidInput("sample_rate must be positive");
        if (n_fft < 2 || win_length < 1 || win_length > n_fft) {
            throw InvalidInput("need 1 <= win_length <= n_fft and n_fft >= 2");
        }
        if (hop() < 1) throw InvalidInput("frame shift shorter than one sample");
        if (n_mels < 1) throw InvalidInput("n_mels must be positive");
        if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
            throw InvalidInput("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");
        }
        if (!(log_floor > 0.0)) throw InvalidInput("log floor must be positive");
    }
};

/// T x M matrix of natural-log mel magnitudes.
struct MelSpectrogram {
    Matrix frames;
    double frame_shift_ms = 12.5;

    [[nodiscard]] Index num_frames() const { return frames.rows(); }
    [[nodiscard]] Index n_mels() const { return frames.cols(); }

    bool operator==(const MelSpectrogram& o) const {
        return frame_shift_ms == o.frame_shift_ms && frames.rows() == o.frames.rows() &&
               frames.cols() == o.frames.cols() && frames == o.frames;
    }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Centre frequencies (Hz) of the n_mels triangular bands.
inline std::vector<double> mel_center_frequencies(int n_mels, double fmin, double fmax) {
    const double lo = hz_to_mel(fmin);
    const double hi = hz_to_mel(fmax);
    std::vector<double> centers(static_cast<std::size_t>(n_mels));
    for (int m = 0; m < n_mels; ++m) {
        centers[static_cast<std::size_t>(m)] = mel_to_hz(lo + (hi - lo) * (m + 1) / (n_mels + 1));
    }
    return centers;
}

/// Triangular mel filterbank, n_mels x (n_fft/2 + 1), HTK mel scale, peak weight 1.
///
/// Band m rises from edge m to centre m+1 and falls to edge m+2 of n_mels+2 points spaced
/// uniformly in mel between fmin and fmax. A band narrower than one FFT bin would come out
/// all zero; such a band gets unit weight on the bin nearest its centre.
inline Matrix mel_filterbank(int n_fft, int n_mels, double sample_rate, double fmin, double fmax) {
    if (n_fft < 2 || n_mels < 1 || sample_rate <= 0) throw InvalidInput("invalid filterbank size");
    if (!(fmin >= 0.0 && fmin < fmax)) throw InvalidInput("need 0 <= fmin < fmax");
    if (fmax > sample_rate / 2.0) throw InvalidInput("fmax exceeds the Nyquist frequency");

    const int bins = n_fft / 2 + 1;
    const double lo = hz_to_mel(fmin);
    const double hi = hz_to_mel(fmax);
    std::vector<double> edges(static_cast<std::size_t>(n_mels + 2));
    for (int i = 0; i < n_mels + 2; ++i) {
        edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (n_mels + 1));
    }

    Matrix fb = Matrix::Zero(n_mels, bins);
    const double bin_hz = sample_rate / n_fft;
    for (int m = 0; m < n_mels; ++m) {
        const double left = edges[static_cast<std::size_t>(m)];
        const double center = edges[static_cast<std::size_t>(m + 1)];
        const double right = edges[static_cast<std::size_t>(m + 2)];
        for (int k = 0; k < bins; ++k) {
            const double f = k * bin_hz;
            double w = 0.0;
            if (f > left && f <= center) {
                w = (f - left) / (center - left);
            } else if (f > center && f < right) {
                w = (right - f) / (right - center);
            }
            fb(m, k) = w;
        }
        if (fb.row(m).maxCoeff() <= 0.0) {
            const int nearest = std::clamp(static_cast<int>(std::lround(center / bin_hz)), 0, bins - 1);
            fb(m, nearest) = 1.0;
        }
    }
    return fb;
}

inline Matrix mel_filterbank(const MelConfig& c) {
    return mel_filterbank(c.n_fft, c.n_mels, c.sample_rate, c.fmin, c.fmax);
}

/// Periodic Hann window of win_length, zero-padded symmetrically to n_fft.
inline std::vector<double> analysis_window(const MelConfig& c) {
    std::vector<double> w(static_cast<std::size_t>(c.n_fft), 0.0);
    const int offset = (c.n_fft - c.win_length) / 2;
    for (int i = 0; i < c.win_length; ++i) {
        const double s = std::sin(std::numbers::pi * i / c.win_length);
        w[static_cast<std::size_t>(offset + i)] = s * s;
    }
    return w;
}

using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Centred short-time Fourier transform with zero padding at both ends.
///
/// Frame t is centred on sample t*hop; there are ceil(len/hop) frames. inverse() is the
/// least-squares overlap-add inverse for the same framing.
class Stft {
public:
    explicit Stft(const MelConfig& config)
        : config_(config), window_(analysis_window(config)), fft_(config.n_fft) {}

    [[nodiscard]] Index frames_for(std::size_t length) const {
        const auto hop = static_cast<std::size_t>(config_.hop());
        return static_cast<Index>((length + hop - 1) / hop);
    }

    ComplexMatrix forward(std::span<const double> signal) {
        const int n_fft = config_.n_fft;
        const int hop = config_.hop();
        const Index frames = frames_for(signal.size());
        ComplexMatrix spec(frames, config_.bins());
        std::vector<double> buf(static_cast<std::size_t>(n_fft));
        std::vector<std::complex<double>> out(static_cast<std::size_t>(config_.bins()));
        const auto len = static_cast<long>(signal.size());
        for (Index t = 0; t < frames; ++t) {
            const long start = static_cast<long>(t) * hop - n_fft / 2;
            for (int i = 0; i < n_fft; ++i) {
                const long j = start + i;
                const double x = (j >= 0 && j < len) ? signal[static_cast<std::size_t>(j)] : 0.0;
                buf[static_cast<std::size_t>(i)] = x * window_[static_cast<std::size_t>(i)];
            }
            fft_.forward(buf, out);
            for (int k = 0; k < config_.bins(); ++k) spec(t, k) = out[static_cast<std::size_t>(k)];
        }
        return spec;
    }

    std::vector<double> inverse(const ComplexMatrix& spec, std::size_t length) {
        const int n_fft = config_.n_fft;
        const int hop = config_.hop();
        std::vector<double> signal(length, 0.0);
        std::vector<double> norm(length, 0.0);
        std::vector<double> frame(static_cast<std::size_t>(n_fft));
        std::vector<std::complex<double>> row(static_cast<std::size_t>(config_.bins()));
        const auto len = static_cast<long>(length);
        for (Index t = 0; t < spec.rows(); ++t) {
            for (int k = 0; k < config_.bins(); ++k) row[static_cast<std::size_t>(k)] = spec(t, k);
            fft_.inverse(row, frame);
            const long start = static_cast<long>(t) * hop - n_fft / 2;
            for (int i = 0; i < n_fft; ++i) {
                const long j = start + i;
                if (j < 0 || j >= len) continue;
                const double w = window_[static_cast<std::size_t>(i)];
                signal[static_cast<std::size_t>(j)] += w * frame[static_cast<std::size_t>(i)];
                norm[static_cast<std::size_t>(j)] += w * w;
            }
        }
        for (std::size_t j = 0; j < length; ++j) {
            if (norm[j] > 1e-8) signal[j] /= norm[j];
        }
        return signal;
    }

    [[nodiscard]] const MelConfig& config() const { return config_; }

private:
    MelConfig config_;
    std::vector<double> window_;
    RealFft fft_;
};

/// Magnitude spectrogram -> natural-log mel with floor clamp.
inline Matrix log_mel_from_magnitude(const Matrix& magnitude, const Matrix& filterbank, double floor) {
    Matrix mel = magnitude * filterbank.transpose();
    return mel.unaryExpr([floor](double e) { return std::log(std::max(e, floor)); });
}

/// Log-mel spectrogram of a clip: T = ceil(len/hop) frames of n_mels values, each
/// log(max(mel magnitude, floor)).
inline MelSpectrogram extract_mel(const AudioClip& clip, const MelConfig& config = {}) {
    config.validate();
    if (clip.empty()) throw InvalidInput("cannot extract features from an empty clip");
    validate(clip);
    if (clip.sample_rate != config.sample_rate) {
        throw InvalidInput("clip sample rate " + std::to_string(clip.sample_rate) +
                           " does not match configured rate " + std::to_string(config.sample_rate));
    }
    Stft stft(config);
    const ComplexMatrix spec = stft.forward(clip.samples);
    const Matrix magnitude = spec.cwiseAbs();
    MelSpectrogram out;
    out.frames = log_mel_from_magnitude(magnitude, mel_filterbank(config), config.log_floor);
    out.frame_shift_ms = config.frame_shift_ms;
    return out;
}

}  // namespace mss::dsp
