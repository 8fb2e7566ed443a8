#pragma once

#include "mss/ad/lstm.hpp"
#include "mss/ad/ops.hpp"
#include "mss/core/error.hpp"
#include "mss/linguistic/durations.hpp"
#include "mss/linguistic/front_end.hpp"
#include "mss/model/config.hpp"
#include "mss/model/layers.hpp"
#include "mss/multiscale/alignment.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace mss::model {

/// Everything the acoustic model reads about one utterance besides the target frames.
struct AcousticInput {
    std::vector<int> phoneme_ids;
    std::vector<int> word_index;  ///< word-level unit of each phoneme
    std::vector<int> durations;   ///< frames per phoneme

    static AcousticInput from(const linguistic::Utterance& utt, const linguistic::DurationVector& d) {
        AcousticInput in{utt.phoneme_ids, utt.phoneme_word_index, d.durations};
        in.validate();
        return in;
    }

    /// Durations only matter for frame-level decoding; this keeps them all at one frame.
    static AcousticInput without_durations(const linguistic::Utterance& utt) {
        return AcousticInput{utt.phoneme_ids, utt.phoneme_word_index,
                             std::vector<int>(utt.phoneme_ids.size(), 1)};
    }

    void validate() const {
        if (phoneme_ids.empty()) throw InvalidInput("acoustic input has no phonemes");
        if (word_index.size() != phoneme_ids.size()) throw AlignmentMismatch("word index length differs from phoneme count");
        if (durations.size() != phoneme_ids.size()) {
            throw AlignmentMismatch("duration count " + std::to_string(durations.size()) + " differs from phoneme count " +
                                    std::to_string(phoneme_ids.size()));
        }
        int expected = 0;
        for (int w : word_index) {
            if (w == expected + 1) ++expected;
            else if (w != expected) throw AlignmentMismatch("word index must be contiguous and start at 0");
        }
        for (int d : durations) {
            if (d < 1) throw InvalidDuration("durations must be positive");
        }
    }

    [[nodiscard]] int num_phonemes() const { return static_cast<int>(phoneme_ids.size()); }
    [[nodiscard]] int num_words() const { return word_index.empty() ? 0 : word_index.back() + 1; }
    [[nodiscard]] int total_frames() const { return std::accumulate(durations.begin(), durations.end(), 0); }

    [[nodiscard]] std::vector<int> phonemes_per_word() const {
        std::vector<int> counts(static_cast<std::size_t>(num_words()), 0);
        for (int w : word_index) ++counts[static_cast<std::size_t>(w)];
        return counts;
    }

    [[nodiscard]] std::vector<int> word_frames() const {
        std::vector<int> frames(static_cast<std::size_t>(num_words()), 0);
        for (std::size_t i = 0; i < durations.size(); ++i) frames[static_cast<std::size_t>(word_index[i])] += durations[i];
        return frames;
    }
};

/// Additive offsets injected into a predicted scale right after it is produced, keyed by level.
using Perturbation = std::map<int, Matrix>;

/// Multi-scale acoustic model. In word-mss and sentence-mss modes each scale decoder is
/// conditioned on the predictions of every coarser scale; the baseline decodes frames from
/// the phoneme encoding alone.
///
/// Parameter layout (mode-dependent parts in brackets):
///   encoder.*                    embedding, residual convs, bidirectional LSTM
///   [sentence.conv*, sentence.out]  from the encoder's final state
///   [word.conv*, word.out]          from per-word projections (+ upsampled sentence scale)
///   [phoneme.conv*, phoneme.out]    from encoder states (+ every coarser scale)
///   decoder.prenet, decoder.lstm, decoder.out
///   norm.mean, norm.std          frozen per-band statistics used to scale inputs and outputs
template <typename S>
class AcousticModel {
public:
    explicit AcousticModel(AcousticConfig config) : config_(std::move(config)) {
        config_.validate();
        Initializer init(config_.seed);
        add_encoder(params_, init, encoder_spec());
        const int enc = encoder_spec().output_dim();
        const int m = config_.n_mels;
        if (has_level(3)) add_stack(init, "sentence", enc, config_.sentence_kernel);
        if (has_level(2)) add_stack(init, "word", enc + (has_level(3) ? m : 0), config_.word_kernel);
        if (has_level(1)) add_stack(init, "phoneme", enc + m * (coarser_levels(1).size()), config_.phoneme_kernel);
        add_dense(params_, init, "decoder.prenet", m, config_.prenet_dim);
        add_lstm(params_, init, "decoder.lstm", decoder_static_dim() + config_.prenet_dim, config_.decoder_hidden);
        add_dense(params_, init, "decoder.out", config_.decoder_hidden, m);
        params_.add("norm.mean", Mat<S>::Zero(1, m), false);
        params_.add("norm.std", Mat<S>::Ones(1, m), false);
    }

    /// Restores a model from stored tensors; names and shapes must match the config exactly.
    AcousticModel(AcousticConfig config, const ParameterStore<S>& stored) : AcousticModel(std::move(config)) {
        if (stored.size() != params_.size()) throw CheckpointMismatch("checkpoint tensor count does not match the model");
        params_.for_each([&](ad::Parameter<S>& p) {
            if (!stored.contains(p.name)) throw CheckpointMismatch("checkpoint lacks tensor " + p.name);
            const auto& src = stored.get(p.name);
            if (src.value.rows() != p.value.rows() || src.value.cols() != p.value.cols()) {
                throw CheckpointMismatch("tensor " + p.name + " has the wrong shape");
            }
            p.value = src.value;
        });
    }

    [[nodiscard]] const AcousticConfig& config() const { return config_; }
    [[nodiscard]] Mode mode() const { return config_.mode; }
    ParameterStore<S>& params() { return params_; }
    [[nodiscard]] const ParameterStore<S>& params() const { return params_; }

    [[nodiscard]] std::vector<int> levels() const { return levels_for(config_.mode); }
    [[nodiscard]] bool has_level(int l) const {
        const auto ls = levels();
        return std::find(ls.begin(), ls.end(), l) != ls.end();
    }

    /// Levels coarser than l that this mode predicts, coarsest first.
    [[nodiscard]] std::vector<int> coarser_levels(int l) const {
        std::vector<int> out;
        for (int lv : levels()) {
            if (lv > l) out.push_back(lv);
        }
        return out;
    }

    /// Per-band mean and standard deviation of the training frames.
    void set_normalization(const Mat<S>& mean, const Mat<S>& stddev) {
        if (mean.cols() != config_.n_mels || stddev.cols() != config_.n_mels) throw InvalidInput("normalization width");
        params_.get("norm.mean").value = mean;
        params_.get("norm.std").value = stddev.cwiseMax(S(1e-3));
    }

    [[nodiscard]] EncoderSpec encoder_spec() const {
        return {"encoder",          config_.vocab_size,       config_.embed_dim,     config_.encoder_conv_layers,
                config_.encoder_kernel, config_.encoder_residual, config_.encoder_hidden};
    }

    // ---- individual stages -------------------------------------------------------------

    EncoderOutput<S> encode(Binder<S>& p, const std::vector<int>& phoneme_ids) const {
        return run_encoder(p, encoder_spec(), phoneme_ids);
    }

    /// Sentence scale (1 x M) from the encoder's final recurrent state.
    Var<S> predict_sentence_scale(Binder<S>& p, Var<S> final_state) const {
        if (!has_level(3)) throw ModeError("sentence scale exists only in sentence-mss mode");
        return run_stack(p, "sentence", final_state, config_.sentence_kernel);
    }

    /// Word scale (W x M): one projected vector per word-level unit, concatenated with the
    /// upsampled sentence prediction in sentence-mss mode.
    Var<S> predict_word_scale(Binder<S>& p, Var<S> encoded, const std::vector<int>& phonemes_per_word,
                              std::optional<Var<S>> sentence_scale) const {
        if (!has_level(2)) throw ModeError("word scale is not part of baseline mode");
        const multiscale::AlignmentVector per_word(phonemes_per_word);
        if (per_word.total() != encoded.rows()) throw AlignmentMismatch("word map does not cover every phoneme");
        Var<S> words;
        if (config_.word_projection == WordProjection::mean) {
            words = ad::segment_mean(encoded, phonemes_per_word);
        } else {
            std::vector<int> last;
            int end = 0;
            for (int n : phonemes_per_word) last.push_back((end += n) - 1);
            words = ad::gather_rows(encoded, last);
        }
        if (has_level(3)) {
            if (!sentence_scale) throw AlignmentMismatch("sentence-mss word scale needs the sentence prediction");
            const std::vector<int> broadcast(phonemes_per_word.size(), 0);
            words = ad::concat_cols<S>({words, ad::gather_rows(condition(*sentence_scale), broadcast)});
        }
        return run_stack(p, "word", words, config_.word_kernel);
    }

    /// Phoneme scale (P x M) from encoder states and every coarser prediction upsampled to P rows.
    Var<S> predict_phoneme_scale(Binder<S>& p, Var<S> encoded, const std::vector<Var<S>>& coarser_upsampled) const {
        if (!has_level(1)) throw ModeError("phoneme scale is not part of baseline mode");
        if (coarser_upsampled.size() != coarser_levels(1).size()) {
            throw AlignmentMismatch("phoneme scale needs every coarser prediction");
        }
        std::vector<Var<S>> parts{encoded};
        for (const auto& c : coarser_upsampled) {
            if (c.rows() != encoded.rows()) throw AlignmentMismatch("coarser scale not upsampled to phoneme rows");
            parts.push_back(condition(c));
        }
        return run_stack(p, "phoneme", ad::concat_cols(parts), config_.phoneme_kernel);
    }

    /// Frame scale (T x M), autoregressive with reduction factor 1.
    ///
    /// With teacher frames the previous-frame input is the ground truth (training graph);
    /// without, predictions are fed back and the result is a constant node.
    Var<S> decode_frames(Binder<S>& p, Var<S> encoded, const std::vector<int>& durations,
                         const std::vector<Var<S>>& coarser_frames, const Mat<S>* teacher) const {
        if (coarser_frames.size() != coarser_levels(0).size()) throw AlignmentMismatch("frame decoder needs every coarser scale");
        const multiscale::AlignmentVector dur(durations);
        if (dur.size() != encoded.rows()) throw AlignmentMismatch("one duration per phoneme required");
        const int frames = dur.total();
        for (const auto& c : coarser_frames) {
            if (c.rows() != frames) throw AlignmentMismatch("coarser scale not upsampled to frame rows");
        }
        if (teacher != nullptr && (teacher->rows() != frames || teacher->cols() != config_.n_mels)) {
            throw AlignmentMismatch("teacher frames have " + std::to_string(teacher->rows()) + " rows, durations sum to " +
                                    std::to_string(frames));
        }

        std::vector<Var<S>> parts{ad::gather_rows(encoded, multiscale::upsample_index(dur))};
        for (const auto& c : coarser_frames) parts.push_back(condition(c));
        parts.push_back(p.tape().constant(position_feature(durations)));
        Var<S> static_inputs = ad::concat_cols(parts);

        if (teacher == nullptr) return p.tape().constant(free_run(p, static_inputs.value()));

        std::vector<int> shifted(static_cast<std::size_t>(frames));
        for (int t = 0; t < frames; ++t) shifted[static_cast<std::size_t>(t)] = t - 1;
        Var<S> prev = ad::gather_rows(condition(p.tape().constant(*teacher)), shifted);
        Var<S> pre = ad::tanh(dense(p, "decoder.prenet", prev));
        Var<S> hidden = lstm_layer(p, "decoder.lstm", ad::concat_cols<S>({static_inputs, pre}));
        return denormalize(p, dense(p, "decoder.out", hidden));
    }

    // ---- whole model -------------------------------------------------------------------

    /// Predictions for every level of the mode. `teacher` selects teacher forcing for the frame
    /// decoder; `perturb` adds offsets to chosen levels before finer levels consume them.
    std::map<int, Var<S>> forward(Tape<S>& tape, const AcousticInput& input, const Mat<S>* teacher,
                                  const Perturbation* perturb = nullptr) {
        input.validate();
        Binder<S> p(tape, params_);
        const auto enc = encode(p, input.phoneme_ids);
        std::map<int, Var<S>> out;
        auto emit = [&](int level, Var<S> v) {
            if (perturb != nullptr) {
                const auto it = perturb->find(level);
                if (it != perturb->end()) {
                    if (it->second.rows() != v.rows() || it->second.cols() != v.cols()) {
                        throw AlignmentMismatch("perturbation shape differs from level " + std::to_string(level));
                    }
                    v = ad::add(v, tape.constant(it->second.template cast<S>()));
                }
            }
            out[level] = v;
            return v;
        };

        const auto per_word = input.phonemes_per_word();
        const std::vector<int> all_phonemes(static_cast<std::size_t>(input.num_phonemes()), 0);
        const int frames = input.total_frames();
        const std::vector<int> all_frames(static_cast<std::size_t>(frames), 0);
        const auto phoneme_to_word = multiscale::upsample_index(multiscale::AlignmentVector(per_word));
        const auto frame_to_word = multiscale::upsample_index(multiscale::AlignmentVector(input.word_frames()));
        const auto frame_to_phoneme = multiscale::upsample_index(multiscale::AlignmentVector(input.durations));

        std::optional<Var<S>> s3;
        std::optional<Var<S>> s2;
        std::optional<Var<S>> s1;
        if (has_level(3)) s3 = emit(3, predict_sentence_scale(p, enc.final_state));
        if (has_level(2)) s2 = emit(2, predict_word_scale(p, enc.states, per_word, s3));
        if (has_level(1)) {
            std::vector<Var<S>> up;
            if (s3) up.push_back(ad::gather_rows(*s3, all_phonemes));
            up.push_back(ad::gather_rows(*s2, phoneme_to_word));
            s1 = emit(1, predict_phoneme_scale(p, enc.states, up));
        }
        std::vector<Var<S>> up_frames;
        if (s3) up_frames.push_back(ad::gather_rows(*s3, all_frames));
        if (s2) up_frames.push_back(ad::gather_rows(*s2, frame_to_word));
        if (s1) up_frames.push_back(ad::gather_rows(*s1, frame_to_phoneme));
        emit(0, decode_frames(p, enc.states, input.durations, up_frames, teacher));
        return out;
    }

    /// Free-running prediction of every level (inference step II).
    std::map<int, Mat<S>> infer(const AcousticInput& input, const Perturbation* perturb = nullptr) {
        Tape<S> tape;
        const auto vars = forward(tape, input, nullptr, perturb);
        std::map<int, Mat<S>> out;
        for (const auto& [level, v] : vars) out[level] = v.value();
        return out;
    }

private:
    [[nodiscard]] int decoder_static_dim() const {
        return encoder_spec().output_dim() + config_.n_mels * static_cast<int>(coarser_levels(0).size()) + 1;
    }

    void add_stack(Initializer& init, const std::string& name, int in, int kernel) {
        int width = in;
        for (int l = 0; l < config_.scale_layers; ++l) {
            add_conv(params_, init, name + ".conv" + std::to_string(l), width, config_.scale_width, kernel);
            width = config_.scale_width;
        }
        add_dense(params_, init, name + ".out", width, config_.n_mels);
    }

    Var<S> run_stack(Binder<S>& p, const std::string& name, Var<S> x, int kernel) const {
        for (int l = 0; l < config_.scale_layers; ++l) x = ad::tanh(conv(p, name + ".conv" + std::to_string(l), x, kernel));
        return denormalize(p, dense(p, name + ".out", x));
    }

    /// Normalised copy of a spectrogram-valued node, used wherever predictions are inputs.
    Var<S> condition(Var<S> mel) const {
        const Mat<S> inv = params_.get("norm.std").value.cwiseInverse();
        const Mat<S> shift = -params_.get("norm.mean").value.cwiseProduct(inv);
        return ad::affine_cols(mel, inv, shift);
    }

    Var<S> denormalize(Binder<S>&, Var<S> normalized) const {
        return ad::affine_cols(normalized, params_.get("norm.std").value, params_.get("norm.mean").value);
    }

    /// Relative position of each frame inside its phoneme, in (0, 1).
    static Mat<S> position_feature(const std::vector<int>& durations) {
        const int total = std::accumulate(durations.begin(), durations.end(), 0);
        Mat<S> pos(total, 1);
        Index t = 0;
        for (int d : durations) {
            for (int k = 0; k < d; ++k) pos(t++, 0) = (S(k) + S(0.5)) / S(d);
        }
        return pos;
    }

    /// Autoregressive decoding with predictions fed back. Mirrors the teacher-forced graph
    /// step for step: the decoder LSTM input is [static | prenet(previous frame)].
    Mat<S> free_run(Binder<S>& p, const Mat<S>& static_inputs) const {
        const auto& wx = params_.get("decoder.lstm.wx").value;
        const auto& b = params_.get("decoder.lstm.b").value;
        const auto& u = params_.get("decoder.lstm.u").value;
        const auto& wp = params_.get("decoder.prenet.weight").value;
        const auto& bp = params_.get("decoder.prenet.bias").value;
        const auto& wo = params_.get("decoder.out.weight").value;
        const auto& bo = params_.get("decoder.out.bias").value;
        const auto& mean = params_.get("norm.mean").value;
        const auto& stddev = params_.get("norm.std").value;
        (void)p;

        const Index sd = static_inputs.cols();
        Mat<S> xg_static = static_inputs * wx.topRows(sd);
        xg_static.rowwise() += b.row(0);
        const auto w_prev = wx.bottomRows(config_.prenet_dim);

        const Index frames = static_inputs.rows();
        Mat<S> out(frames, config_.n_mels);
        auto state = ad::LstmState<S>::zeros(config_.decoder_hidden);
        ad::RowVec<S> prev = ad::RowVec<S>::Zero(config_.n_mels);
        for (Index t = 0; t < frames; ++t) {
            const ad::RowVec<S> pre = ((prev * wp + bp).array().tanh()).matrix();
            const ad::RowVec<S> xg = xg_static.row(t) + pre * w_prev;
            ad::lstm_step<S>(xg, u, state);
            const ad::RowVec<S> normed = state.h * wo + bo;
            out.row(t) = normed.cwiseProduct(stddev.row(0)) + mean.row(0);
            prev = normed;
        }
        return out;
    }

    AcousticConfig config_;
    ParameterStore<S> params_;
};

}  // namespace mss::model
