#pragma once

#include "mss/core/error.hpp"
#include "mss/core/matrix.hpp"
#include "mss/dsp/audio.hpp"
#include "mss/dsp/mel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace mss::dsp {

struct GriffinLimResult {
    AudioClip clip;
    /// Relative magnitude error || |STFT(x_i)| - S ||_F / ||S||_F after each iteration.
    std::vector<double> spectral_error;
};

/// Linear magnitudes from log-mel frames via the filterbank pseudoinverse, clamped at zero.
inline Matrix mel_to_magnitude(const MelSpectrogram& mel, const MelConfig& config) {
    const Matrix fb = mel_filterbank(config);
    const Eigen::MatrixXd pinv = Eigen::MatrixXd(fb).completeOrthogonalDecomposition().pseudoInverse();
    const Matrix energy = mel.frames.array().exp().matrix();
    Matrix mag = energy * pinv.transpose();
    return mag.cwiseMax(0.0);
}

/// Phase reconstruction from a log-mel spectrogram. Output length is T * hop samples.
/// Initial phases come from a fixed-seed generator so results are reproducible.
inline GriffinLimResult griffin_lim_trace(const MelSpectrogram& mel, const MelConfig& config, int iters,
                                          std::uint32_t seed = 0) {
    config.validate();
    if (iters < 1) throw InvalidInput("griffin_lim needs at least one iteration");
    if (mel.n_mels() != config.n_mels) throw InvalidInput("mel band count does not match config");
    if (mel.num_frames() < 1) throw InvalidInput("empty mel spectrogram");
    if (std::abs(mel.frame_shift_ms - config.frame_shift_ms) > 1e-9) {
        throw InvalidInput("mel frame shift does not match config");
    }

    const Matrix target = mel_to_magnitude(mel, config);
    const double target_norm = std::max(target.norm(), 1e-300);
    const auto length = static_cast<std::size_t>(mel.num_frames()) * static_cast<std::size_t>(config.hop());

    std::mt19937 rng(seed);
    ComplexMatrix spec(target.rows(), target.cols());
    for (Index t = 0; t < spec.rows(); ++t) {
        for (Index k = 0; k < spec.cols(); ++k) {
            const double phase = 2.0 * std::numbers::pi * (static_cast<double>(rng()) / 4294967296.0);
            spec(t, k) = std::polar(target(t, k), phase);
        }
    }

    Stft stft(config);
    GriffinLimResult result;
    result.clip.sample_rate = config.sample_rate;
    std::vector<double> signal;
    for (int it = 0; it < iters; ++it) {
        signal = stft.inverse(spec, length);
        const ComplexMatrix rebuilt = stft.forward(signal);
        double err = 0.0;
        for (Index t = 0; t < spec.rows(); ++t) {
            for (Index k = 0; k < spec.cols(); ++k) {
                const double a = std::abs(rebuilt(t, k));
                const double d = a - target(t, k);
                err += d * d;
                spec(t, k) = a > 1e-12 ? rebuilt(t, k) * (target(t, k) / a) : std::complex<double>(target(t, k), 0.0);
            }
        }
        result.spectral_error.push_back(std::sqrt(err) / target_norm);
    }
    for (double& s : signal) s = std::clamp(s, -1.0, 1.0);
    result.clip.samples = std::move(signal);
    return result;
}

inline AudioClip griffin_lim(const MelSpectrogram& mel, const MelConfig& config, int iters) {
    return griffin_lim_trace(mel, config, iters).clip;
}

}  // namespace mss::dsp
