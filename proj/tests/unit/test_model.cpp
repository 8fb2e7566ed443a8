#include "support/fixtures.hpp"

#include "mss/ad/gradcheck.hpp"
#include "mss/model/acoustic.hpp"
#include "mss/model/checkpoint.hpp"
#include "mss/model/duration.hpp"
#include "mss/model/loss.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mss;
using namespace mss::model;
using mss::testing::hierarchy_for;
using mss::testing::make_sample;
using mss::testing::small_config;

namespace {

constexpr Mode kModes[] = {Mode::baseline, Mode::word_mss, Mode::sentence_mss};
const char* kText = "He headed straight for his desk.";

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

AcousticModel<double> normalized_model(const AcousticConfig& cfg, const Matrix& mel) {
    AcousticModel<double> m(cfg);
    const Matrix mean = mel.colwise().mean();
    const Matrix sd = ((mel.rowwise() - mean.row(0)).array().square().colwise().mean().sqrt()).matrix();
    m.set_normalization(mean, sd);
    return m;
}

}  // namespace

TEST(AcousticModel, ShapesFollowTheHierarchy) {
    for (Mode mode : kModes) {
        const auto s = make_sample(kText, 3, 6);
        auto model = normalized_model(small_config(mode), s.mel);
        const auto h = hierarchy_for(s, mode);
        const auto preds = model.infer(AcousticInput::from(s.utt, s.durations));
        ASSERT_EQ(preds.size(), levels_for(mode).size());
        for (const auto& [level, mat] : preds) {
            EXPECT_EQ(mat.rows(), h.level(level).alignment.size()) << to_string(mode) << " level " << level;
            EXPECT_EQ(mat.cols(), 6);
        }
    }
}

TEST(AcousticModel, Fig3SentenceCounts) {
    const auto s = make_sample(kText, 1, 6);
    auto model = normalized_model(small_config(Mode::sentence_mss), s.mel);
    const auto preds = model.infer(AcousticInput::from(s.utt, s.durations));
    EXPECT_EQ(preds.at(3).rows(), 1);
    EXPECT_EQ(preds.at(2).rows(), 7);
    EXPECT_EQ(preds.at(1).rows(), 29);
    EXPECT_EQ(preds.at(0).rows(), s.durations.total_frames);
}

TEST(AcousticModel, SingleFrameUtterance) {
    AcousticModel<double> model(small_config(Mode::word_mss));
    AcousticInput in{{5}, {0}, {1}};
    const auto preds = model.infer(in);
    EXPECT_EQ(preds.at(0).rows(), 1);
    EXPECT_EQ(preds.at(2).rows(), 1);
}

TEST(AcousticModel, ModeErrors) {
    AcousticModel<double> word(small_config(Mode::word_mss));
    AcousticModel<double> base(small_config(Mode::baseline));
    ad::Tape<double> t;
    Binder<double> pw(t, word.params());
    const auto enc = word.encode(pw, {1, 2, 3});
    EXPECT_THROW(word.predict_sentence_scale(pw, enc.final_state), ModeError);
    Binder<double> pb(t, base.params());
    const auto enc_b = base.encode(pb, {1, 2, 3});
    EXPECT_THROW(base.predict_word_scale(pb, enc_b.states, {3}, std::nullopt), ModeError);
    EXPECT_THROW(base.predict_phoneme_scale(pb, enc_b.states, {}), ModeError);
}

TEST(AcousticModel, AlignmentErrors) {
    AcousticModel<double> model(small_config(Mode::word_mss));
    ad::Tape<double> t;
    Binder<double> p(t, model.params());
    const auto enc = model.encode(p, {1, 2, 3});
    EXPECT_THROW(model.predict_word_scale(p, enc.states, {1, 1}, std::nullopt), AlignmentMismatch);
    EXPECT_THROW(model.infer(AcousticInput{{1, 2}, {0, 0}, {1}}), AlignmentMismatch);
    EXPECT_THROW(model.infer(AcousticInput{{1, 2}, {0, 0}, {1, 0}}), InvalidDuration);
    const Matrix teacher = Matrix::Zero(5, 6);
    ad::Tape<double> t2;
    EXPECT_THROW(model.forward(t2, AcousticInput{{1, 2}, {0, 0}, {2, 2}}, &teacher), AlignmentMismatch);
}

TEST(AcousticModel, ForwardIsBitwiseDeterministic) {
    const auto s = make_sample(kText, 5, 6);
    auto a = normalized_model(small_config(Mode::sentence_mss), s.mel);
    auto b = normalized_model(small_config(Mode::sentence_mss), s.mel);
    const auto in = AcousticInput::from(s.utt, s.durations);
    const auto pa = a.infer(in);
    const auto pb = b.infer(in);
    const auto pa2 = a.infer(in);
    for (const auto& [l, m] : pa) {
        EXPECT_EQ(m, pb.at(l));
        EXPECT_EQ(m, pa2.at(l));
    }
}

TEST(AcousticModel, TeacherForcingOnOwnOutputMatchesFreeRunning) {
    for (Mode mode : kModes) {
        const auto s = make_sample("his desk", 8, 6);
        auto model = normalized_model(small_config(mode), s.mel);
        const auto in = AcousticInput::from(s.utt, s.durations);
        const Matrix free = model.infer(in).at(0);
        ad::Tape<double> t;
        const Matrix forced = model.forward(t, in, &free).at(0).value();
        EXPECT_LT(max_abs_diff(free, forced), 1e-10) << to_string(mode);
    }
}

TEST(AcousticModel, PerturbationsFlowCoarseToFineOnly) {
    const auto s = make_sample(kText, 9, 6);
    for (Mode mode : kModes) {
        auto model = normalized_model(small_config(mode), s.mel);
        const auto in = AcousticInput::from(s.utt, s.durations);
        const auto base = model.infer(in);
        for (int l : levels_for(mode)) {
            Perturbation p{{l, Matrix::Constant(base.at(l).rows(), 6, 0.5)}};
            const auto moved = model.infer(in, &p);
            for (int other : levels_for(mode)) {
                const double d = max_abs_diff(base.at(other), moved.at(other));
                if (other > l) {
                    EXPECT_EQ(d, 0.0) << to_string(mode) << " l=" << l << " other=" << other;
                } else {
                    EXPECT_GT(d, 1e-9) << to_string(mode) << " l=" << l << " other=" << other;
                }
            }
        }
    }
}

TEST(AcousticModel, SentencePerturbationMovesEveryWordRow) {
    const auto s = make_sample(kText, 10, 6);
    auto model = normalized_model(small_config(Mode::sentence_mss), s.mel);
    const auto in = AcousticInput::from(s.utt, s.durations);
    const auto base = model.infer(in);
    Perturbation p{{3, Matrix::Constant(1, 6, 0.3)}};
    const auto moved = model.infer(in, &p);
    for (Index r = 0; r < base.at(2).rows(); ++r) {
        EXPECT_GT((base.at(2).row(r) - moved.at(2).row(r)).cwiseAbs().maxCoeff(), 1e-9) << "word " << r;
    }
}

TEST(AcousticModel, WordPerturbationMovesThatWordsPhonemes) {
    const auto s = make_sample(kText, 11, 6);
    auto model = normalized_model(small_config(Mode::word_mss), s.mel);
    const auto in = AcousticInput::from(s.utt, s.durations);
    const auto base = model.infer(in);
    for (int w = 0; w < s.utt.num_words(); ++w) {
        Matrix delta = Matrix::Zero(base.at(2).rows(), 6);
        delta.row(w).setConstant(0.4);
        Perturbation p{{2, delta}};
        const auto moved = model.infer(in, &p);
        for (int ph = 0; ph < s.utt.num_phonemes(); ++ph) {
            if (s.utt.phoneme_word_index[static_cast<std::size_t>(ph)] != w) continue;
            EXPECT_GT((base.at(1).row(ph) - moved.at(1).row(ph)).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(AcousticModel, BaselineIgnoresCoarseInjections) {
    const auto s = make_sample(kText, 12, 6);
    auto model = normalized_model(small_config(Mode::baseline), s.mel);
    const auto in = AcousticInput::from(s.utt, s.durations);
    const auto base = model.infer(in);
    Perturbation p{{2, Matrix::Constant(7, 6, 1.0)}, {3, Matrix::Constant(1, 6, 1.0)}};
    EXPECT_EQ(model.infer(in, &p).at(0), base.at(0));
}

TEST(AcousticModel, GradientsMatchFiniteDifferences) {
    const auto s = make_sample("he headed for his desk", 13, 6, 3);
    for (Mode mode : kModes) {
        auto model = normalized_model(small_config(mode), s.mel);
        const auto h = hierarchy_for(s, mode);
        const auto in = AcousticInput::from(s.utt, s.durations);
        const auto report = ad::check_gradients<double>(
            model.params(),
            [&](ad::Tape<double>& t) { return mss_loss(t, model.forward(t, in, &s.mel), h).total; }, 10, 17);
        EXPECT_FALSE(report.max_rel_error_by_param.empty());
        for (const auto& [name, err] : report.max_rel_error_by_param) {
            EXPECT_LT(err, 1e-4) << to_string(mode) << " " << name;
        }
    }
}

TEST(AcousticModel, SentenceLossDoesNotReachFinerModules) {
    const auto s = make_sample(kText, 14, 6);
    auto model = normalized_model(small_config(Mode::sentence_mss), s.mel);
    const auto h = hierarchy_for(s, Mode::sentence_mss);
    model.params().zero_grad();
    ad::Tape<double> t;
    const auto terms = mss_loss(t, model.forward(t, AcousticInput::from(s.utt, s.durations), &s.mel), h);
    t.backward(terms.per_scale.at(3));
    double sentence_grad = 0.0;
    model.params().for_each([&](const ad::Parameter<double>& p) {
        const bool finer = p.name.rfind("decoder.", 0) == 0 || p.name.rfind("word.", 0) == 0 ||
                           p.name.rfind("phoneme.", 0) == 0;
        if (finer) {
            EXPECT_EQ(p.grad.squaredNorm(), 0.0) << p.name;
        }
        if (p.name.rfind("sentence.", 0) == 0) sentence_grad += p.grad.squaredNorm();
    });
    EXPECT_GT(sentence_grad, 0.0);
}

TEST(MssLoss, ZeroWhenPredictionsEqualTargets) {
    const auto s = make_sample(kText, 15, 4);
    const auto h = hierarchy_for(s, Mode::sentence_mss);
    ad::Tape<double> t;
    std::map<int, ad::Var<double>> preds;
    for (const auto& lv : h.levels) preds[lv.level] = t.constant(lv.mel);
    const auto terms = mss_loss(t, preds, h);
    EXPECT_EQ(terms.total.value()(0, 0), 0.0);
    EXPECT_EQ(terms.per_scale.size(), 4u);
}

TEST(MssLoss, HandValuesAndDecomposition) {
    multiscale::ScaleHierarchy h;
    h.levels.push_back({0, multiscale::AlignmentVector::unit_frames(2), Matrix::Zero(2, 2)});
    ad::Tape<double> t;
    std::map<int, ad::Var<double>> preds{{0, t.constant(Matrix::Ones(2, 2))}};
    EXPECT_DOUBLE_EQ(mss_loss(t, preds, h).per_scale.at(0).value()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(mss_loss(t, preds, h, LossConvention::sum).total.value()(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(mss_loss(t, preds, h, LossConvention::norm).total.value()(0, 0), 2.0);

    const auto s = make_sample(kText, 16, 4);
    for (Mode mode : {Mode::word_mss, Mode::sentence_mss}) {
        const auto hh = hierarchy_for(s, mode);
        auto model = normalized_model(small_config(mode, 4), s.mel);
        const auto in = AcousticInput::from(s.utt, s.durations);
        ad::Tape<double> tt;
        const auto preds = model.forward(tt, in, &s.mel);
        const auto terms = mss_loss(tt, preds, hh);
        EXPECT_EQ(terms.per_scale.size(), mode == Mode::word_mss ? 3u : 4u);
        double sum = 0.0;
        for (const auto& [l, v] : terms.values()) {
            const Matrix diff = preds.at(l).value() - hh.level(l).mel;
            EXPECT_NEAR(v, diff.squaredNorm() / static_cast<double>(diff.size()), 1e-12);
            sum += v;
        }
        EXPECT_NEAR(terms.total.value()(0, 0), sum, 1e-12);
    }
}

TEST(MssLoss, ShapeMismatchThrows) {
    const auto s = make_sample(kText, 17, 4);
    const auto h = hierarchy_for(s, Mode::word_mss);
    ad::Tape<double> t;
    std::map<int, ad::Var<double>> preds{{2, t.constant(Matrix::Zero(3, 4))}};
    EXPECT_THROW(mss_loss(t, preds, h), AlignmentMismatch);
}

TEST(DurationLoss, HandValues) {
    ad::Tape<double> t;
    auto truth = t.constant(Matrix::Zero(2, 1));
    EXPECT_DOUBLE_EQ(duration_loss(t.constant(Matrix::Ones(2, 1)), truth).value()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(duration_loss(t.constant(Matrix::Constant(2, 1, 2.0)), truth).value()(0, 0), 4.0);
    EXPECT_EQ(duration_loss(truth, truth).value()(0, 0), 0.0);
    EXPECT_THROW(duration_loss(t.constant(Matrix::Zero(3, 1)), truth), InvalidInput);
}

TEST(DurationModel, RoundingRule) {
    EXPECT_EQ(emit_duration(0.2), 1);
    EXPECT_EQ(emit_duration(0.0), 1);
    EXPECT_EQ(emit_duration(2.5), 3);
    EXPECT_EQ(emit_duration(2.49), 2);
    EXPECT_THROW(emit_duration(std::nan("")), NumericalError);
}

TEST(DurationModel, ShapesAndGradients) {
    DurationConfig cfg;
    cfg.embed_dim = 5;
    cfg.hidden = 4;
    DurationModel<double> m(cfg);
    const auto s = make_sample(kText, 18, 4);
    EXPECT_EQ(m.predict(s.utt.phoneme_ids).size(), static_cast<std::size_t>(s.utt.num_phonemes()));
    for (int d : m.predict(s.utt.phoneme_ids)) EXPECT_GE(d, 1);
    const auto report = ad::check_gradients<double>(
        m.params(), [&](ad::Tape<double>& t) { return m.loss(t, s.utt.phoneme_ids, s.durations.durations); }, 10, 19);
    for (const auto& [name, err] : report.max_rel_error_by_param) EXPECT_LT(err, 1e-4) << name;
    ad::Tape<double> t;
    EXPECT_THROW(m.loss(t, {1, 2}, {3}), InvalidInput);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    const auto s = make_sample(kText, 20, 6);
    auto model = normalized_model(small_config(Mode::sentence_mss), s.mel);
    std::stringstream buf;
    write_checkpoint(buf, to_checkpoint(model));
    const std::string bytes = buf.str();
    const auto ck = read_checkpoint(buf);
    auto restored = acoustic_from<double>(ck);
    model.params().for_each([&](const ad::Parameter<double>& p) {
        EXPECT_EQ(p.value, restored.params().get(p.name).value) << p.name;
        EXPECT_EQ(p.trainable, restored.params().get(p.name).trainable) << p.name;
    });
    std::stringstream again;
    write_checkpoint(again, to_checkpoint(restored));
    EXPECT_EQ(again.str(), bytes);
    EXPECT_EQ(restored.infer(AcousticInput::from(s.utt, s.durations)).at(0),
              model.infer(AcousticInput::from(s.utt, s.durations)).at(0));
}

TEST(Checkpoint, RejectsCorruption) {
    AcousticModel<double> model(small_config(Mode::word_mss));
    std::stringstream buf;
    write_checkpoint(buf, to_checkpoint(model));
    std::string bytes = buf.str();

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::stringstream a(bad_magic);
    EXPECT_THROW(read_checkpoint(a), CheckpointMismatch);

    std::string bad_digest = bytes;
    bad_digest[8] ^= 0x01;
    std::stringstream b(bad_digest);
    EXPECT_THROW(read_checkpoint(b), CheckpointMismatch);

    std::stringstream c(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_checkpoint(c), FormatError);

    std::stringstream d(bytes);
    EXPECT_THROW(duration_from<double>(read_checkpoint(d)), CheckpointMismatch);
}

TEST(Checkpoint, ShapeOrModeMismatchRejected) {
    AcousticModel<double> word(small_config(Mode::word_mss));
    auto ck = to_checkpoint(word);
    auto cfg = small_config(Mode::sentence_mss);
    EXPECT_THROW(AcousticModel<double>(cfg, tensors_as<double>(ck)), CheckpointMismatch);
    cfg = small_config(Mode::word_mss);
    cfg.decoder_hidden = 9;
    EXPECT_THROW(AcousticModel<double>(cfg, tensors_as<double>(ck)), CheckpointMismatch);
}

TEST(Config, TextRoundTrip) {
    auto cfg = small_config(Mode::sentence_mss);
    cfg.word_projection = WordProjection::last;
    cfg.loss = LossConvention::norm;
    const auto back = AcousticConfig::from_config(KeyValueConfig::parse_string(cfg.to_text()));
    EXPECT_EQ(back.to_text(), cfg.to_text());
    DurationConfig d;
    d.hidden = 7;
    EXPECT_EQ(DurationConfig::from_config(KeyValueConfig::parse_string(d.to_text())).to_text(), d.to_text());
    EXPECT_THROW(DurationConfig::from_config(KeyValueConfig::parse_string(cfg.to_text())), CheckpointMismatch);
}

TEST(AcousticModel, LastPhonemeProjection) {
    auto cfg = small_config(Mode::word_mss);
    cfg.word_projection = WordProjection::last;
    const auto s = make_sample(kText, 21, 6);
    auto model = normalized_model(cfg, s.mel);
    EXPECT_EQ(model.infer(AcousticInput::from(s.utt, s.durations)).at(2).rows(), 7);
}
