#pragma once

#include "mss/core/error.hpp"
#include "mss/core/kv_config.hpp"
#include "mss/dsp/audio.hpp"
#include "mss/dsp/griffin_lim.hpp"
#include "mss/dsp/mel.hpp"
#include "mss/dsp/melspec_io.hpp"
#include "mss/linguistic/durations.hpp"
#include "mss/linguistic/front_end.hpp"
#include "mss/linguistic/shipped_lexicon.hpp"
#include "mss/model/checkpoint.hpp"
#include "mss/multiscale/hierarchy_io.hpp"
#include "mss/pipeline/eval.hpp"
#include "mss/pipeline/plot.hpp"
#include "mss/pipeline/status.hpp"
#include "mss/pipeline/synthetic.hpp"
#include "mss/training/config.hpp"
#include "mss/training/dataset.hpp"
#include "mss/training/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mss::pipeline {

namespace fs = std::filesystem;

// ---- extract ---------------------------------------------------------------------------

struct ExtractOptions {
    fs::path wav_dir;
    fs::path out_dir;
    fs::path manifest;  ///< records to merge (text, durations); defaults to <wav_dir>/manifest.jsonl
    dsp::MelConfig mel;
};

struct ExtractResult {
    std::vector<fs::path> written;
    std::vector<std::string> failures;
};

/// One MELSPEC1 file per WAV plus out_dir/manifest.jsonl. Files are processed in name order;
/// a bad file is reported and skipped, and DataError is raised at the end if any failed.
inline ExtractResult cmd_extract(const ExtractOptions& opt, const Log& log = Log()) {
    opt.mel.validate();
    if (!fs::is_directory(opt.wav_dir)) throw UsageError("no input files: " + opt.wav_dir.string() + " is not a directory");
    std::vector<fs::path> wavs;
    for (const auto& e : fs::directory_iterator(opt.wav_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
    }
    std::sort(wavs.begin(), wavs.end());
    if (wavs.empty()) throw UsageError("no input files in " + opt.wav_dir.string());

    std::map<std::string, training::ManifestRecord> known;
    fs::path manifest = opt.manifest;
    if (manifest.empty() && fs::exists(opt.wav_dir / "manifest.jsonl")) manifest = opt.wav_dir / "manifest.jsonl";
    if (!manifest.empty()) {
        for (auto& r : training::load_manifest(manifest)) known[r.id] = r;
    }

    fs::create_directories(opt.out_dir);
    const fs::path out_abs = fs::absolute(opt.out_dir);
    ExtractResult result;
    std::vector<training::ManifestRecord> records;
    for (const auto& wav : wavs) {
        const std::string id = wav.stem().string();
        try {
            const auto clip = dsp::read_wav(wav);
            if (clip.sample_rate != opt.mel.sample_rate) {
                throw DataError("sample rate " + std::to_string(clip.sample_rate) + " Hz, expected " +
                                std::to_string(opt.mel.sample_rate) + " Hz");
            }
            const auto mel = dsp::extract_mel(clip, opt.mel);
            const fs::path out = opt.out_dir / (id + ".mel");
            dsp::save_melspec(out, mel);
            result.written.push_back(out);
            training::ManifestRecord r;
            if (auto it = known.find(id); it != known.end()) r = it->second;
            r.id = id;
            r.wav = fs::absolute(wav).lexically_proximate(out_abs);
            r.mel = id + ".mel";
            if (!r.durations.empty()) r.durations = fs::absolute(r.durations).lexically_proximate(out_abs);
            records.push_back(std::move(r));
            log.debug_line("extract " + id + ": " + std::to_string(mel.num_frames()) + " frames");
        } catch (const Error& e) {
            result.failures.push_back(wav.filename().string() + ": " + e.what());
            log.info_line("error: " + result.failures.back());
        }
    }
    if (!records.empty()) training::save_manifest(opt.out_dir / "manifest.jsonl", records);
    log.info_line("extracted " + std::to_string(records.size()) + " of " + std::to_string(wavs.size()) + " files");
    if (!result.failures.empty()) {
        throw DataError(std::to_string(result.failures.size()) + " of " + std::to_string(wavs.size()) +
                        " files failed; first: " + result.failures.front());
    }
    return result;
}

// ---- build-scales ----------------------------------------------------------------------

struct BuildScalesOptions {
    fs::path mel;
    std::string text;
    fs::path durations;
    model::Mode mode = model::Mode::word_mss;
    fs::path out_dir;
    fs::path lexicon;  ///< empty: shipped lexicon
};

/// Oracle targets of one utterance: scale<L>.mel ... scale0.mel and alignments.json.
inline multiscale::ScaleHierarchy cmd_build_scales(const BuildScalesOptions& opt, const Log& log = Log()) {
    const auto lexicon = linguistic::lexicon_or_shipped(opt.lexicon);
    const auto utt = linguistic::front_end(opt.text, lexicon);
    const auto mel = dsp::load_melspec(opt.mel);
    const auto d = linguistic::load_durations(opt.durations, utt);
    auto h = multiscale::build_hierarchy(mel.frames, utt, d, model::hierarchy_mode_for(opt.mode));
    for (const auto& w : h.warnings) log.info_line("warning: " + w);
    multiscale::save_hierarchy(opt.out_dir, h, mel.frame_shift_ms);
    std::string shape;
    for (const auto& s : h.levels) {
        shape += " scale" + std::to_string(s.level) + "=" + std::to_string(s.mel.rows()) + "x" + std::to_string(s.mel.cols());
    }
    log.info_line("wrote" + shape + " to " + opt.out_dir.string());
    return h;
}

/// Same for every record of a manifest, one subdirectory per id.
inline std::size_t cmd_build_scales_manifest(const fs::path& manifest, model::Mode mode, const fs::path& out_dir,
                                             const fs::path& lexicon_path, const Log& log = Log()) {
    const auto lexicon = linguistic::lexicon_or_shipped(lexicon_path);
    const auto examples = training::load_examples(training::load_manifest(manifest), lexicon);
    for (const auto& ex : examples) {
        const auto h = ex.hierarchy(mode);
        multiscale::save_hierarchy(out_dir / ex.id, h, dsp::MelConfig{}.frame_shift_ms);
        log.debug_line("scales for " + ex.id);
    }
    log.info_line("built scales for " + std::to_string(examples.size()) + " utterances in " + out_dir.string());
    return examples.size();
}

// ---- train -----------------------------------------------------------------------------

struct TrainOptions {
    fs::path config;
    std::map<std::string, std::string> overrides;  ///< applied on top of the file (e.g. mode, seed)
};

inline training::TrainConfig load_train_config(const TrainOptions& opt) {
    if (opt.config.empty()) throw UsageError("train needs --config");
    auto kv = KeyValueConfig::load(opt.config);
    for (const auto& [k, v] : opt.overrides) kv.set(k, v);
    return training::TrainConfig::from_config(kv, opt.config.parent_path());
}

inline training::TrainOutputs cmd_train(const TrainOptions& opt, const Log& log = Log()) {
    const auto config = load_train_config(opt);
    const auto lexicon = linguistic::lexicon_or_shipped(config.lexicon);
    log.info_line("training " + std::string(model::to_string(config.mode)) + " from " + config.manifest.string());
    auto out = training::run_training(config, lexicon, [&](const std::string& stage, const training::LogRecord& r) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s step %lld loss %.6f", stage.c_str(), r.step, r.total);
        if ((r.step + 1) % 100 == 0) log.info_line(buf);
        else log.debug_line(buf);
    });
    log.info_line("checkpoints in " + config.out_dir.string());
    return out;
}

// ---- synth -----------------------------------------------------------------------------

struct SynthOptions {
    std::string text;
    fs::path acoustic;
    fs::path duration;         ///< required unless oracle durations are given
    fs::path oracle_durations; ///< optional: skip step I
    std::optional<model::Mode> mode;
    fs::path out_dir;
    fs::path lexicon;
    int griffin_lim_iters = 32;
    bool write_wav = true;
};

struct SynthResult {
    linguistic::DurationVector durations;
    multiscale::ScaleHierarchy predicted;
};

/// Two-step inference: durations (predicted or oracle), then every scale free-running.
/// Writes scale<l>.mel + alignments.json, durations.txt and, optionally, audio.wav.
inline SynthResult cmd_synth(const SynthOptions& opt, const Log& log = Log()) {
    auto acoustic = model::acoustic_from<double>(model::load_checkpoint(opt.acoustic));
    if (opt.mode && acoustic.mode() != *opt.mode) {
        throw ModeError(opt.acoustic.string() + " holds a " + std::string(model::to_string(acoustic.mode())) +
                        " model but " + std::string(model::to_string(*opt.mode)) + " was requested");
    }
    const auto lexicon = linguistic::lexicon_or_shipped(opt.lexicon);
    const auto utt = linguistic::front_end(opt.text, lexicon);

    SynthResult r;
    if (!opt.oracle_durations.empty()) {
        r.durations = linguistic::load_durations(opt.oracle_durations, utt);
    } else {
        if (opt.duration.empty()) throw UsageError("synth needs a duration checkpoint or oracle durations");
        auto dm = model::duration_from<double>(model::load_checkpoint(opt.duration));
        r.durations = linguistic::DurationVector(dm.predict(utt.phoneme_ids));
    }
    const auto input = model::AcousticInput::from(utt, r.durations);
    const auto pred = acoustic.infer(input);

    r.predicted.mode = model::hierarchy_mode_for(acoustic.mode());
    for (int level : acoustic.levels()) {
        multiscale::AlignmentVector a;
        switch (level) {
            case 3: a = multiscale::AlignmentVector(linguistic::sentence_duration(r.durations)); break;
            case 2: a = multiscale::AlignmentVector(linguistic::word_durations(utt, r.durations)); break;
            case 1: a = multiscale::AlignmentVector(r.durations.durations); break;
            default: a = multiscale::AlignmentVector::unit_frames(r.durations.total_frames);
        }
        r.predicted.levels.push_back({level, a, pred.at(level)});
    }
    const double shift = dsp::MelConfig{}.frame_shift_ms;
    multiscale::save_hierarchy(opt.out_dir, r.predicted, shift);
    linguistic::save_durations(opt.out_dir / "durations.txt", r.durations);
    if (opt.write_wav) {
        dsp::MelConfig mc;
        mc.n_mels = acoustic.config().n_mels;
        const auto clip = dsp::griffin_lim(dsp::MelSpectrogram{pred.at(0), shift}, mc, opt.griffin_lim_iters);
        dsp::write_wav(opt.out_dir / "audio.wav", clip);
    }
    log.info_line("synthesised " + std::to_string(r.durations.total_frames) + " frames (" +
                  std::to_string(utt.num_phonemes()) + " phonemes) into " + opt.out_dir.string());
    return r;
}

// ---- plot ------------------------------------------------------------------------------

struct PlotOptions {
    fs::path oracle;     ///< hierarchy directory
    fs::path predicted;  ///< hierarchy directory
    fs::path out;        ///< .svg
};

inline std::string cmd_plot(const PlotOptions& opt, const Log& log = Log()) {
    if (opt.oracle.empty() && opt.predicted.empty()) throw UsageError("plot needs --oracle and/or --predicted");
    if (opt.out.empty()) throw UsageError("plot needs --out");
    std::vector<PlotColumn> columns;
    if (!opt.oracle.empty()) columns.push_back({"oracle", multiscale::load_hierarchy(opt.oracle)});
    if (!opt.predicted.empty()) columns.push_back({"predicted", multiscale::load_hierarchy(opt.predicted)});
    const auto svg = render_svg(columns);
    write_svg(opt.out, svg);
    log.info_line("wrote " + opt.out.string());
    return svg;
}

// ---- eval ------------------------------------------------------------------------------

struct EvalOptions {
    fs::path manifest;
    std::vector<SystemSpec> systems;
    std::optional<model::Mode> mode;
    fs::path out;  ///< JSON report; empty: not written
    fs::path lexicon;
};

inline EvalReport cmd_eval(const EvalOptions& opt, const Log& log = Log()) {
    if (opt.manifest.empty()) throw UsageError("eval needs --manifest");
    const auto report = evaluate(opt.manifest, opt.systems, linguistic::lexicon_or_shipped(opt.lexicon), opt.mode);
    if (!opt.out.empty()) {
        if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
        std::ofstream(opt.out) << report.to_json().dump(2) << '\n';
        log.info_line("wrote " + opt.out.string());
    }
    return report;
}

// ---- gen-synthetic ---------------------------------------------------------------------

inline std::vector<training::ManifestRecord> cmd_gen_synthetic(const fs::path& out_dir, const SyntheticOptions& opt,
                                                               const fs::path& lexicon, const Log& log = Log()) {
    const auto corpus = generate_corpus(opt, linguistic::lexicon_or_shipped(lexicon));
    auto records = write_corpus(out_dir, corpus);
    log.info_line("wrote " + std::to_string(records.size()) + " synthetic utterances to " + out_dir.string());
    return records;
}

}  // namespace mss::pipeline
