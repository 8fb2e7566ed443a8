// msspec: feature extraction, scale building, training, synthesis, plots and evaluation.

#include "mss/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace mss;
using namespace mss::pipeline;

namespace {

struct Globals {
    std::optional<unsigned long long> seed;
    std::string config;
    std::string mode;

    [[nodiscard]] std::optional<model::Mode> requested_mode() const {
        if (mode.empty()) return std::nullopt;
        return model::mode_from_string(mode);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-scale spectrogram modelling toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed (gen-synthetic, train)");
    app.add_option("--config", g.config, "Training config file (key = value)");
    app.add_option("--mode", g.mode, "baseline | word-mss | sentence-mss")
        ->check(CLI::IsMember({"baseline", "word-mss", "sentence-mss", "word_mss", "sentence_mss"}));

    const Log log;
    std::function<int()> run;

    // extract
    ExtractOptions ex;
    auto* extract = app.add_subcommand("extract", "Log-mel spectrograms for every WAV in a directory");
    extract->fallthrough();
    extract->add_option("--in", ex.wav_dir, "Directory of WAV files")->required();
    extract->add_option("--out", ex.out_dir, "Output directory")->required();
    extract->add_option("--manifest", ex.manifest, "Manifest to merge (default: <in>/manifest.jsonl if present)");
    extract->add_option("--sample-rate", ex.mel.sample_rate, "Expected sample rate");
    extract->add_option("--n-mels", ex.mel.n_mels, "Mel bands");
    extract->add_option("--frame-shift-ms", ex.mel.frame_shift_ms, "Frame shift in ms");
    extract->callback([&] { run = [&] { cmd_extract(ex, log); return 0; }; });

    // build-scales
    BuildScalesOptions bs;
    std::string bs_manifest;
    auto* build = app.add_subcommand("build-scales", "Oracle multi-scale targets from a mel file and durations");
    build->fallthrough();
    build->add_option("--mel", bs.mel, "MELSPEC1 file");
    build->add_option("--text", bs.text, "Sentence text");
    build->add_option("--durations", bs.durations, "Per-phoneme durations in frames");
    build->add_option("--manifest", bs_manifest, "Build for every record instead (one subdirectory per id)");
    build->add_option("--out", bs.out_dir, "Output directory")->required();
    build->add_option("--lexicon", bs.lexicon, "Lexicon file (default: shipped)");
    build->callback([&] {
        run = [&] {
            bs.mode = g.requested_mode().value_or(model::Mode::word_mss);
            if (!bs_manifest.empty()) {
                cmd_build_scales_manifest(bs_manifest, bs.mode, bs.out_dir, bs.lexicon, log);
                return 0;
            }
            if (bs.mel.empty() || bs.text.empty() || bs.durations.empty()) {
                throw UsageError("build-scales needs --mel, --text and --durations, or --manifest");
            }
            cmd_build_scales(bs, log);
            return 0;
        };
    });

    // train
    TrainOptions tr;
    std::string tr_out, tr_manifest;
    std::optional<long long> tr_acoustic_steps, tr_duration_steps;
    auto* train = app.add_subcommand("train", "Train the acoustic and duration models");
    train->fallthrough();
    train->add_option("--out", tr_out, "Output directory (overrides out_dir)");
    train->add_option("--manifest", tr_manifest, "Training manifest (overrides manifest)");
    train->add_option("--acoustic-steps", tr_acoustic_steps, "Overrides acoustic_steps");
    train->add_option("--duration-steps", tr_duration_steps, "Overrides duration_steps");
    train->callback([&] {
        run = [&] {
            tr.config = g.config;
            if (!g.mode.empty()) tr.overrides["mode"] = g.mode;
            if (g.seed) tr.overrides["seed"] = std::to_string(*g.seed);
            if (!tr_out.empty()) tr.overrides["out_dir"] = std::filesystem::absolute(tr_out).string();
            if (!tr_manifest.empty()) tr.overrides["manifest"] = std::filesystem::absolute(tr_manifest).string();
            if (tr_acoustic_steps) tr.overrides["acoustic_steps"] = std::to_string(*tr_acoustic_steps);
            if (tr_duration_steps) tr.overrides["duration_steps"] = std::to_string(*tr_duration_steps);
            cmd_train(tr, log);
            return 0;
        };
    });

    // synth
    SynthOptions sy;
    bool no_wav = false;
    auto* synth = app.add_subcommand("synth", "Predict durations, then spectrograms at every scale");
    synth->fallthrough();
    synth->add_option("--text", sy.text, "Sentence text")->required();
    synth->add_option("--acoustic", sy.acoustic, "Acoustic checkpoint")->required();
    synth->add_option("--duration", sy.duration, "Duration checkpoint");
    synth->add_option("--oracle-durations", sy.oracle_durations, "Use these durations instead of predicting them");
    synth->add_option("--out", sy.out_dir, "Output directory")->required();
    synth->add_option("--lexicon", sy.lexicon, "Lexicon file (default: shipped)");
    synth->add_option("--gl-iters", sy.griffin_lim_iters, "Griffin-Lim iterations");
    synth->add_flag("--no-wav", no_wav, "Skip waveform reconstruction");
    synth->callback([&] {
        run = [&] {
            sy.mode = g.requested_mode();
            sy.write_wav = !no_wav;
            const auto r = cmd_synth(sy, log);
            std::cout << "frames " << r.durations.total_frames << '\n';
            return 0;
        };
    });

    // plot
    PlotOptions pl;
    auto* plot = app.add_subcommand("plot", "SVG of oracle and/or predicted scales");
    plot->fallthrough();
    plot->add_option("--oracle", pl.oracle, "Oracle hierarchy directory");
    plot->add_option("--predicted", pl.predicted, "Predicted hierarchy directory");
    plot->add_option("--out", pl.out, "Output .svg")->required();
    plot->callback([&] { run = [&] { cmd_plot(pl, log); return 0; }; });

    // eval
    EvalOptions ev;
    std::vector<std::string> ev_acoustic, ev_duration;
    auto* eval = app.add_subcommand("eval", "Objective metrics for one checkpoint or a comparison of two");
    eval->fallthrough();
    eval->add_option("--manifest", ev.manifest, "Test manifest")->required();
    eval->add_option("--acoustic", ev_acoustic, "Acoustic checkpoint (give twice to compare)")->required();
    eval->add_option("--duration", ev_duration, "Duration checkpoint(s), matched by position");
    eval->add_option("--out", ev.out, "JSON report");
    eval->add_option("--lexicon", ev.lexicon, "Lexicon file (default: shipped)");
    eval->callback([&] {
        run = [&] {
            if (ev_duration.size() > ev_acoustic.size()) throw UsageError("more duration than acoustic checkpoints");
            for (std::size_t i = 0; i < ev_acoustic.size(); ++i) {
                ev.systems.push_back({ev_acoustic[i], i < ev_duration.size() ? ev_duration[i] : std::string()});
            }
            ev.mode = g.requested_mode();
            std::cout << cmd_eval(ev, log).table();
            return 0;
        };
    });

    // gen-synthetic
    std::string gs_out, gs_lexicon;
    SyntheticOptions gs;
    auto* gen = app.add_subcommand("gen-synthetic", "Deterministic harmonic corpus with oracle durations");
    gen->fallthrough();
    gen->add_option("--out", gs_out, "Output directory")->required();
    gen->add_option("--count", gs.count, "Number of utterances");
    gen->add_option("--min-seconds", gs.min_seconds, "Shortest utterance");
    gen->add_option("--max-seconds", gs.max_seconds, "Longest utterance");
    gen->add_option("--lexicon", gs_lexicon, "Lexicon file (default: shipped)");
    gen->callback([&] {
        run = [&] {
            if (g.seed) gs.seed = *g.seed;
            cmd_gen_synthetic(gs_out, gs, gs_lexicon, log);
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }
    return guarded(std::cerr, run);
}
