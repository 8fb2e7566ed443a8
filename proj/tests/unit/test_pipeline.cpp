#include "support/fixtures.hpp"
#include "support/json_schema.hpp"

#include "mss/pipeline/commands.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

using namespace mss;
using namespace mss::pipeline;

namespace fs = std::filesystem;

namespace {

const fs::path kData = MSS_DATA_DIR;
const fs::path kFig3 = kData / "fig3";
const Log kQuiet(std::cerr, Log::quiet);

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mss_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fig3_text() {
    auto s = slurp(kFig3 / "text.txt");
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

struct Run {
    int code = -1;
    std::string err;
};

/// Runs the CLI with MSSPEC_LOG=quiet unless overridden; returns exit code and stderr.
Run msspec(const std::string& args, const fs::path& dir) {
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && MSSPEC_LOG=${MSSPEC_LOG:-quiet} '" + std::string(MSSPEC_BIN) +
                            "' " + args + " >/dev/null 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

void write_tone(const fs::path& path, double seconds, int rate) {
    dsp::AudioClip clip;
    clip.sample_rate = rate;
    const int n = static_cast<int>(std::lround(seconds * rate));
    for (int i = 0; i < n; ++i) clip.samples.push_back(0.3 * std::sin(2.0 * std::numbers::pi * 220.0 * i / rate));
    dsp::write_wav(path, clip);
}

const char* kTinyModel =
    "[model]\nembed_dim = 8\nencoder_hidden = 6\nscale_width = 8\nprenet_dim = 6\ndecoder_hidden = 8\n"
    "[duration]\nembed_dim = 6\nhidden = 5\n";

/// A three-utterance synthetic corpus, extracted and trained for a few steps in each mode.
class TrainedCorpus : public ::testing::Test {
protected:
    static fs::path dir() { return fs::temp_directory_path() / ("mss_pipeline_trained_" + std::to_string(getpid())); }

    static void TearDownTestSuite() { fs::remove_all(dir()); }

    static void SetUpTestSuite() {
        fs::remove_all(dir());
        SyntheticOptions so;
        so.count = 3;
        so.seed = 11;
        so.min_seconds = 1.0;
        so.max_seconds = 1.5;
        cmd_gen_synthetic(dir() / "corpus", so, {}, kQuiet);
        cmd_extract({dir() / "corpus", dir() / "mels", {}, {}}, kQuiet);
        for (const char* mode : {"baseline", "word-mss", "sentence-mss"}) {
            std::ofstream(dir() / (std::string(mode) + ".cfg"))
                << "mode = " << mode << "\nmanifest = mels/manifest.jsonl\nout_dir = run-" << mode
                << "\nacoustic_steps = 3\nduration_steps = 3\n"
                << kTinyModel;
            cmd_train({dir() / (std::string(mode) + ".cfg"), {}}, kQuiet);
        }
    }

    static fs::path ckpt(const std::string& mode, const std::string& which) {
        return dir() / ("run-" + mode) / (which + ".ckpt");
    }
};

}  // namespace

// ---- extract -----------------------------------------------------------------------------

TEST(Extract, OneSecondGivesEightyFramesAndRerunsAreByteIdentical) {
    const auto dir = scratch("extract");
    fs::create_directories(dir / "wav");
    write_tone(dir / "wav" / "a.wav", 1.0, 24000);
    write_tone(dir / "wav" / "b.wav", 0.5, 24000);
    cmd_extract({dir / "wav", dir / "out1", {}, {}}, kQuiet);
    cmd_extract({dir / "wav", dir / "out2", {}, {}}, kQuiet);
    const auto mel = dsp::load_melspec(dir / "out1" / "a.mel");
    EXPECT_EQ(mel.num_frames(), 80);
    EXPECT_EQ(mel.n_mels(), 80);
    for (const char* f : {"a.mel", "b.mel", "manifest.jsonl"}) {
        EXPECT_EQ(slurp(dir / "out1" / f), slurp(dir / "out2" / f)) << f;
    }
    const auto records = training::load_manifest(dir / "out1" / "manifest.jsonl");
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].id, "a");
    EXPECT_EQ(records[0].mel, dir / "out1" / "a.mel");
}

TEST(Extract, EmptyDirectoryIsAUsageError) {
    const auto dir = scratch("extract_empty");
    fs::create_directories(dir / "empty");
    const auto r = msspec("extract --in empty --out out", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no input files"), std::string::npos) << r.err;
}

TEST(Extract, RateMismatchFailsThatFileOnly) {
    const auto dir = scratch("extract_rate");
    fs::create_directories(dir / "wav");
    write_tone(dir / "wav" / "good.wav", 0.2, 24000);
    write_tone(dir / "wav" / "slow.wav", 0.2, 16000);
    const auto r = msspec("extract --in wav --out out", dir);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("slow.wav"), std::string::npos) << r.err;
    EXPECT_TRUE(fs::exists(dir / "out" / "good.mel"));
    EXPECT_FALSE(fs::exists(dir / "out" / "slow.mel"));
}

TEST(Extract, MergesTheCorpusManifest) {
    const auto dir = scratch("extract_merge");
    SyntheticOptions so;
    so.count = 2;
    so.min_seconds = 0.5;
    so.max_seconds = 0.8;
    cmd_gen_synthetic(dir / "corpus", so, {}, kQuiet);
    cmd_extract({dir / "corpus", dir / "mels", {}, {}}, kQuiet);
    const auto examples =
        training::load_examples(training::load_manifest(dir / "mels" / "manifest.jsonl"), linguistic::shipped_lexicon());
    ASSERT_EQ(examples.size(), 2u);
    // The renderer emits exactly sum(d) * hop samples, so frames and durations agree.
    for (const auto& ex : examples) EXPECT_EQ(ex.mel.rows(), ex.durations.total_frames);
}

// ---- synthetic corpus --------------------------------------------------------------------

TEST(Synthetic, DeterministicAndWithinLengthRange) {
    SyntheticOptions so;
    so.count = 6;
    so.seed = 4;
    const auto a = generate_corpus(so, linguistic::shipped_lexicon());
    const auto b = generate_corpus(so, linguistic::shipped_lexicon());
    ASSERT_EQ(a.size(), 6u);
    const int hop = dsp::MelConfig{}.hop();
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].text, b[i].text);
        EXPECT_EQ(a[i].durations, b[i].durations);
        EXPECT_EQ(a[i].audio.samples, b[i].audio.samples);
        EXPECT_EQ(a[i].audio.samples.size(), static_cast<std::size_t>(a[i].durations.total_frames * hop));
        const double seconds = a[i].durations.total_frames * 0.0125;
        EXPECT_GE(seconds, so.min_seconds);
        EXPECT_LE(seconds, so.max_seconds + 1.0);
    }
}

// ---- build-scales ------------------------------------------------------------------------

TEST(BuildScales, Fig3FixtureCounts) {
    const auto dir = scratch("scales");
    BuildScalesOptions o{kFig3 / "oracle.mel", fig3_text(), kFig3 / "durations.txt", model::Mode::word_mss, dir / "word", {}};
    cmd_build_scales(o, kQuiet);
    const auto word = multiscale::load_hierarchy(dir / "word");
    ASSERT_EQ(word.levels.size(), 3u);
    EXPECT_EQ(dsp::load_melspec(dir / "word" / "scale2.mel").frames.rows(), 7);
    EXPECT_EQ(dsp::load_melspec(dir / "word" / "scale1.mel").frames.rows(), 29);
    EXPECT_EQ(dsp::load_melspec(dir / "word" / "scale0.mel").frames.rows(), 160);
    for (const auto& s : word.levels) EXPECT_EQ(s.mel.cols(), 80);

    o.mode = model::Mode::sentence_mss;
    o.out_dir = dir / "sentence";
    cmd_build_scales(o, kQuiet);
    const auto sentence = dsp::load_melspec(dir / "sentence" / "scale3.mel");
    EXPECT_EQ(sentence.frames.rows(), 1);
    EXPECT_EQ(sentence.frames.cols(), 80);
}

TEST(BuildScales, OffByOneDurationsExitThreeWithCounts) {
    const auto dir = scratch("scales_off");
    auto lines = slurp(kFig3 / "durations.txt");
    std::istringstream in(lines);
    std::vector<int> d;
    for (int v; in >> v;) d.push_back(v);
    d.back() += 1;
    linguistic::save_durations(dir / "off.dur", linguistic::DurationVector(d));
    const auto r = msspec("--mode word-mss build-scales --mel '" + (kFig3 / "oracle.mel").string() + "' --text '" +
                              fig3_text() + "' --durations off.dur --out out",
                          dir);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("161"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("160"), std::string::npos) << r.err;
}

TEST(BuildScales, CorruptMelMagicExitsThree) {
    const auto dir = scratch("scales_magic");
    auto bytes = slurp(kFig3 / "oracle.mel");
    bytes[0] = 'X';
    std::ofstream(dir / "bad.mel", std::ios::binary) << bytes;
    const auto r = msspec("build-scales --mel bad.mel --text '" + fig3_text() + "' --durations '" +
                              (kFig3 / "durations.txt").string() + "' --out out",
                          dir);
    EXPECT_EQ(r.code, 3) << r.err;
}

// ---- plot --------------------------------------------------------------------------------

TEST(Plot, RowsColumnsBoundariesAndDeterminism) {
    const auto dir = scratch("plot");
    cmd_build_scales({kFig3 / "oracle.mel", fig3_text(), kFig3 / "durations.txt", model::Mode::word_mss, dir / "h", {}},
                     kQuiet);
    const auto one = cmd_plot({dir / "h", {}, dir / "a.svg"}, kQuiet);
    const auto two = cmd_plot({dir / "h", dir / "h", dir / "b.svg"}, kQuiet);
    EXPECT_EQ(one, cmd_plot({dir / "h", {}, dir / "c.svg"}, kQuiet));
    EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "c.svg"));

    auto count = [](const std::string& s, const std::string& needle) {
        std::size_t n = 0;
        for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
        return n;
    };
    EXPECT_EQ(count(one, "class=\"panel\""), 3u);
    EXPECT_EQ(count(two, "class=\"panel\""), 6u);
    EXPECT_EQ(count(one, "data-units=\"7\""), 1u);
    EXPECT_EQ(count(one, "data-units=\"29\""), 1u);
    EXPECT_EQ(count(one, "data-units=\"160\""), 1u);
    // Internal boundaries: 6 between words, 28 between phonemes; the frame row has none.
    EXPECT_EQ(count(one, "class=\"boundary\""), 6u + 28u);
    EXPECT_LT(one.find("word scale"), one.find("phoneme scale"));
    EXPECT_LT(one.find("phoneme scale"), one.find("frame scale"));
    EXPECT_NE(two.find(">oracle<"), std::string::npos);
    EXPECT_NE(two.find(">predicted<"), std::string::npos);
}

TEST(Plot, MissingScaleFileExitsThree) {
    const auto dir = scratch("plot_missing");
    cmd_build_scales({kFig3 / "oracle.mel", fig3_text(), kFig3 / "durations.txt", model::Mode::word_mss, dir / "h", {}},
                     kQuiet);
    fs::remove(dir / "h" / "scale1.mel");
    EXPECT_EQ(msspec("plot --oracle h --out x.svg", dir).code, 3);
    EXPECT_EQ(msspec("plot --oracle nowhere --out x.svg", dir).code, 3);
    EXPECT_EQ(msspec("plot --out x.svg", dir).code, 2);
}

// ---- eval helpers ------------------------------------------------------------------------

TEST(Eval, CepstralDistanceHandValues) {
    Matrix a = Matrix::Random(5, 8);
    EXPECT_EQ(cepstral_distance(a, a), 0.0);
    // A constant offset across bands only moves c0, which is excluded.
    EXPECT_NEAR(cepstral_distance(a, (a.array() + 3.0).matrix()), 0.0, 1e-12);
    // Two bands, difference [x, -x]: c1 = sqrt(2) x, distance = (10 / ln 10) * 2 |x|.
    Matrix p(1, 2), q(1, 2);
    p << 0.5, -0.5;
    q << 0.0, 0.0;
    EXPECT_NEAR(cepstral_distance(p, q), 10.0 / std::log(10.0) * 2.0 * 0.5, 1e-12);
    EXPECT_THROW(cepstral_distance(p, Matrix::Zero(2, 2)), AlignmentMismatch);
}

TEST(Eval, DctIsOrthonormal) {
    const Matrix x = Matrix::Random(3, 7);
    const Matrix c = dct_rows(x);
    for (Index r = 0; r < 3; ++r) EXPECT_NEAR(c.row(r).norm(), x.row(r).norm(), 1e-12);
    EXPECT_NEAR(dct_rows(Matrix::Ones(1, 7))(0, 0), std::sqrt(7.0), 1e-12);
}

TEST(Eval, SchemaValidatorRejectsBadReports) {
    const auto schema = nlohmann::json::parse(slurp(fs::path(MSS_DATA_DIR).parent_path() / "docs" / "eval_report.schema.json"));
    nlohmann::json bad = {{"format", "mss-eval-1"}, {"manifest", "m"}, {"utterances", 0}, {"systems", nlohmann::json::array()}};
    EXPECT_FALSE(mss::test::validate_schema(bad, schema).empty());
    bad["utterances"] = 1;
    bad["extra"] = true;
    EXPECT_FALSE(mss::test::validate_schema(bad, schema).empty());
}

// ---- trained corpus: train, synth, eval --------------------------------------------------

TEST_F(TrainedCorpus, LogLinesEqualStepsAndBaselineLogsOnlyL0) {
    for (const char* mode : {"baseline", "word-mss", "sentence-mss"}) {
        const auto log = training::read_log(dir() / (std::string("run-") + mode) / "acoustic_log.ndjson");
        ASSERT_EQ(log.size(), 3u);
        const std::size_t terms = std::string(mode) == "baseline" ? 1 : std::string(mode) == "word-mss" ? 3 : 4;
        for (const auto& r : log) EXPECT_EQ(r.losses.size(), terms);
        if (std::string(mode) == "baseline") EXPECT_TRUE(log[0].losses.count("L0"));
    }
}

TEST_F(TrainedCorpus, TrainConfigErrorsExitTwo) {
    std::ofstream(dir() / "broken.cfg") << "manifest = mels/manifest.jsonl\nacoustic_lr = fast\n";
    EXPECT_EQ(msspec("--config broken.cfg train", dir()).code, 2);
    std::ofstream(dir() / "typo.cfg") << "manifest = mels/manifest.jsonl\nacoustic_step = 3\n";
    EXPECT_EQ(msspec("--config typo.cfg train", dir()).code, 2);
    EXPECT_EQ(msspec("train", dir()).code, 2);
    EXPECT_EQ(msspec("--mode nonsense train", dir()).code, 2);
    std::ofstream(dir() / "nodata.cfg") << "manifest = missing.jsonl\n";
    EXPECT_EQ(msspec("--config nodata.cfg train", dir()).code, 3);
}

TEST_F(TrainedCorpus, SynthFrameCountIsTheRoundedDurationSum) {
    const auto out = dir() / "synth";
    SynthOptions o;
    o.text = "He headed straight for his desk.";
    o.acoustic = ckpt("word-mss", "acoustic");
    o.duration = ckpt("word-mss", "duration");
    o.out_dir = out;
    o.griffin_lim_iters = 4;
    const auto r = cmd_synth(o, kQuiet);

    auto dm = model::duration_from<double>(model::load_checkpoint(o.duration));
    const auto utt = linguistic::front_end(o.text, linguistic::shipped_lexicon());
    int expected = 0;
    for (double f : dm.predict_frames(utt.phoneme_ids)) expected += std::max(1, static_cast<int>(std::floor(f + 0.5)));
    EXPECT_EQ(r.durations.total_frames, expected);
    EXPECT_EQ(dsp::load_melspec(out / "scale0.mel").num_frames(), expected);
    EXPECT_EQ(dsp::load_melspec(out / "scale1.mel").num_frames(), 29);
    EXPECT_EQ(dsp::load_melspec(out / "scale2.mel").num_frames(), 7);
    EXPECT_EQ(dsp::read_wav(out / "audio.wav").samples.size(), static_cast<std::size_t>(expected * dsp::MelConfig{}.hop()));
    EXPECT_NO_THROW(multiscale::load_hierarchy(out));
}

TEST_F(TrainedCorpus, SynthIsDeterministicAndHonoursOracleDurations) {
    const auto base = "synth --text 'The cat sat.' --acoustic '" + ckpt("sentence-mss", "acoustic").string() +
                      "' --duration '" + ckpt("sentence-mss", "duration").string() + "' --gl-iters 2 --out ";
    ASSERT_EQ(msspec(base + "s1", dir()).code, 0);
    ASSERT_EQ(msspec(base + "s2", dir()).code, 0);
    for (const char* f : {"scale0.mel", "scale1.mel", "scale2.mel", "scale3.mel", "audio.wav", "durations.txt"}) {
        EXPECT_EQ(slurp(dir() / "s1" / f), slurp(dir() / "s2" / f)) << f;
    }
    const auto utt = linguistic::front_end("The cat sat.", linguistic::shipped_lexicon());
    std::vector<int> d(utt.phonemes.size(), 3);
    linguistic::save_durations(dir() / "oracle.dur", linguistic::DurationVector(d));
    ASSERT_EQ(msspec("synth --text 'The cat sat.' --acoustic '" + ckpt("sentence-mss", "acoustic").string() +
                         "' --oracle-durations oracle.dur --no-wav --out s3",
                     dir())
                  .code,
              0);
    EXPECT_EQ(dsp::load_melspec(dir() / "s3" / "scale0.mel").num_frames(), 3 * static_cast<Index>(d.size()));
    EXPECT_FALSE(fs::exists(dir() / "s3" / "audio.wav"));
}

TEST_F(TrainedCorpus, SynthCheckpointErrorsExitFour) {
    const auto ac = ckpt("word-mss", "acoustic").string();
    const auto du = ckpt("word-mss", "duration").string();
    EXPECT_EQ(msspec("--mode baseline synth --text Hi. --acoustic '" + ac + "' --duration '" + du + "' --out x", dir()).code, 4);
    EXPECT_EQ(msspec("synth --text Hi. --acoustic '" + du + "' --duration '" + du + "' --out x", dir()).code, 4);
    EXPECT_EQ(msspec("synth --text Hi. --acoustic '" + ac + "' --duration '" + ac + "' --out x", dir()).code, 4);
    auto bytes = slurp(ac);
    bytes[2] = '?';
    std::ofstream(dir() / "bad.ckpt", std::ios::binary) << bytes;
    EXPECT_EQ(msspec("synth --text Hi. --acoustic bad.ckpt --duration '" + du + "' --out x", dir()).code, 4);
    EXPECT_EQ(msspec("synth --text Hi. --acoustic '" + ac + "' --out x", dir()).code, 2);
}

TEST_F(TrainedCorpus, EvalReportValidatesAndIdenticalComparisonHasZeroDeltas) {
    const auto schema = nlohmann::json::parse(slurp(fs::path(MSS_DATA_DIR).parent_path() / "docs" / "eval_report.schema.json"));
    EvalOptions o;
    o.manifest = dir() / "mels" / "manifest.jsonl";
    o.systems = {{ckpt("word-mss", "acoustic"), ckpt("word-mss", "duration")},
                 {ckpt("word-mss", "acoustic"), ckpt("word-mss", "duration")}};
    o.out = dir() / "report.json";
    const auto report = cmd_eval(o, kQuiet);
    const auto j = nlohmann::json::parse(slurp(o.out));
    EXPECT_TRUE(mss::test::validate_schema(j, schema).empty()) << mss::test::validate_schema(j, schema).front();
    EXPECT_EQ(j["utterances"], 3);
    for (const auto& [k, v] : j["deltas"]["per_scale_mse"].items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
    EXPECT_EQ(j["deltas"]["frame_mse"].get<double>(), 0.0);
    EXPECT_EQ(j["deltas"]["cepstral_distance"].get<double>(), 0.0);
    EXPECT_EQ(j["deltas"]["duration_mae"].get<double>(), 0.0);
    EXPECT_EQ(j["deltas"]["per_scale_mse"].size(), 3u);
    for (const auto& s : report.systems) {
        for (const auto& [l, v] : s.per_scale_mse) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
    }

    // Baseline vs word-mss: different scales, deltas only over the shared frame scale.
    o.systems = {{ckpt("baseline", "acoustic"), {}}, {ckpt("word-mss", "acoustic"), {}}};
    const auto cmp = cmd_eval(o, kQuiet).to_json();
    EXPECT_TRUE(mss::test::validate_schema(cmp, schema).empty());
    EXPECT_EQ(cmp["deltas"]["per_scale_mse"].size(), 1u);
    EXPECT_TRUE(cmp["deltas"]["duration_mae"].is_null());
}

TEST_F(TrainedCorpus, EvalErrors) {
    const auto ac = ckpt("word-mss", "acoustic").string();
    EXPECT_EQ(msspec("eval --manifest missing.jsonl --acoustic '" + ac + "'", dir()).code, 3);
    std::ofstream(dir() / "broken.jsonl") << "{not json\n";
    EXPECT_EQ(msspec("eval --manifest broken.jsonl --acoustic '" + ac + "'", dir()).code, 3);
    EXPECT_EQ(msspec("--mode sentence-mss eval --manifest mels/manifest.jsonl --acoustic '" + ac + "'", dir()).code, 4);
    EXPECT_EQ(msspec("eval --manifest mels/manifest.jsonl --acoustic '" + ac + "' --out r.json", dir()).code, 0);
}

TEST(Cli, UsageErrors) {
    const auto dir = scratch("cli");
    EXPECT_EQ(msspec("", dir).code, 2);
    EXPECT_EQ(msspec("frobnicate", dir).code, 2);
    EXPECT_EQ(msspec("extract --in x", dir).code, 2);
    EXPECT_EQ(msspec("--help", dir).code, 0);
    EXPECT_EQ(msspec("synth --help", dir).code, 0);
}

TEST(Cli, LogLevelFromEnvironment) {
    const auto dir = scratch("cli_log");
    const auto quiet = msspec("gen-synthetic --count 1 --max-seconds 2.5 --out c1", dir);
    EXPECT_EQ(quiet.code, 0);
    EXPECT_TRUE(quiet.err.empty()) << quiet.err;
    setenv("MSSPEC_LOG", "info", 1);
    const auto info = msspec("gen-synthetic --count 1 --max-seconds 2.5 --out c2", dir);
    unsetenv("MSSPEC_LOG");
    EXPECT_NE(info.err.find("wrote 1 synthetic"), std::string::npos) << info.err;
    EXPECT_EQ(slurp(dir / "c1" / "manifest.jsonl"), slurp(dir / "c2" / "manifest.jsonl"));
}

TEST(Cli, GlobalFlagsAfterTheSubcommand) {
    const auto dir = scratch("cli_seed");
    ASSERT_EQ(msspec("gen-synthetic --count 2 --max-seconds 2.5 --out a --seed 8", dir).code, 0);
    ASSERT_EQ(msspec("--seed 8 gen-synthetic --count 2 --max-seconds 2.5 --out b", dir).code, 0);
    ASSERT_EQ(msspec("--seed 9 gen-synthetic --count 2 --max-seconds 2.5 --out c", dir).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "manifest.jsonl"), slurp(dir / "b" / "manifest.jsonl"));
    EXPECT_NE(slurp(dir / "a" / "manifest.jsonl"), slurp(dir / "c" / "manifest.jsonl"));
}
