#pragma once

#include "mss/ad/lstm.hpp"
#include "mss/ad/ops.hpp"
#include "mss/ad/tape.hpp"

#include <cmath>
#include <map>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mss::model {

using ad::Mat;
using ad::ParameterStore;
using ad::Tape;
using ad::Var;

/// Fan-in scaled uniform initialisation from a fixed-seed 64-bit Mersenne Twister.
/// The bit-to-double conversion is done by hand so values do not depend on the
/// standard library's distribution implementation.
class Initializer {
public:
    explicit Initializer(std::uint64_t seed) : rng_(seed) {}

    double uniform(double bound) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * bound;
    }

    template <typename S>
    Mat<S> matrix(Index rows, Index cols, Index fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Mat<S> m(rows, cols);
        for (Index r = 0; r < rows; ++r) {
            for (Index c = 0; c < cols; ++c) m(r, c) = static_cast<S>(uniform(bound));
        }
        return m;
    }

private:
    std::mt19937_64 rng_;
};

template <typename S>
void add_dense(ParameterStore<S>& store, Initializer& init, const std::string& name, Index in, Index out) {
    store.add(name + ".weight", init.matrix<S>(in, out, in));
    store.add(name + ".bias", Mat<S>::Zero(1, out));
}

template <typename S>
void add_conv(ParameterStore<S>& store, Initializer& init, const std::string& name, Index in, Index out, int kernel) {
    store.add(name + ".weight", init.matrix<S>(kernel * in, out, kernel * in));
    store.add(name + ".bias", Mat<S>::Zero(1, out));
}

/// LSTM parameters: wx (in x 4H), u (H x 4H), b (1 x 4H) with forget-gate bias 1.
template <typename S>
void add_lstm(ParameterStore<S>& store, Initializer& init, const std::string& name, Index in, Index hidden) {
    store.add(name + ".wx", init.matrix<S>(in, 4 * hidden, in));
    store.add(name + ".u", init.matrix<S>(hidden, 4 * hidden, hidden));
    Mat<S> b = Mat<S>::Zero(1, 4 * hidden);
    b.middleCols(hidden, hidden).setOnes();
    store.add(name + ".b", b);
}

/// Binds parameters of a store onto one tape, creating each leaf once.
template <typename S>
class Binder {
public:
    Binder(Tape<S>& tape, ParameterStore<S>& store) : tape_(tape), store_(store) {}

    Var<S> operator()(const std::string& name) {
        const auto it = bound_.find(name);
        if (it != bound_.end()) return it->second;
        Var<S> v = tape_.param(store_.get(name));
        bound_.emplace(name, v);
        return v;
    }

    Tape<S>& tape() { return tape_; }
    ParameterStore<S>& store() { return store_; }

private:
    Tape<S>& tape_;
    ParameterStore<S>& store_;
    std::map<std::string, Var<S>> bound_;
};

template <typename S>
Var<S> dense(Binder<S>& p, const std::string& name, Var<S> x) {
    return ad::linear(x, p(name + ".weight"), p(name + ".bias"));
}

template <typename S>
Var<S> conv(Binder<S>& p, const std::string& name, Var<S> x, int kernel) {
    return ad::conv1d(x, p(name + ".weight"), p(name + ".bias"), kernel);
}

template <typename S>
Var<S> lstm_layer(Binder<S>& p, const std::string& name, Var<S> x) {
    return ad::lstm(ad::linear(x, p(name + ".wx"), p(name + ".b")), p(name + ".u"));
}

/// Phoneme encoder: embedding, residual 1-D convolutions, bidirectional LSTM.
struct EncoderSpec {
    std::string prefix;
    int vocab = 0;
    int embed = 0;
    int conv_layers = 0;
    int kernel = 1;
    bool residual = true;
    int hidden = 0;

    [[nodiscard]] int output_dim() const { return 2 * hidden; }
};

template <typename S>
void add_encoder(ParameterStore<S>& store, Initializer& init, const EncoderSpec& spec) {
    store.add(spec.prefix + ".embedding", init.matrix<S>(spec.vocab, spec.embed, 1));
    for (int l = 0; l < spec.conv_layers; ++l) {
        add_conv(store, init, spec.prefix + ".conv" + std::to_string(l), spec.embed, spec.embed, spec.kernel);
    }
    add_lstm(store, init, spec.prefix + ".fwd", spec.embed, spec.hidden);
    add_lstm(store, init, spec.prefix + ".bwd", spec.embed, spec.hidden);
}

template <typename S>
struct EncoderOutput {
    Var<S> states;       ///< P x 2H, forward and backward hidden states side by side
    Var<S> final_state;  ///< 1 x 2H, last forward state and last backward state (position 0)
    Var<S> embedded;     ///< P x E, input to the recurrent layer
};

template <typename S>
EncoderOutput<S> run_encoder(Binder<S>& p, const EncoderSpec& spec, const std::vector<int>& ids) {
    if (ids.empty()) throw InvalidInput("encoder needs at least one phoneme");
    for (int id : ids) {
        if (id < 0 || id >= spec.vocab) throw InvalidInput("phoneme id " + std::to_string(id) + " outside the embedding table");
    }
    Var<S> x = ad::gather_rows(p(spec.prefix + ".embedding"), ids);
    for (int l = 0; l < spec.conv_layers; ++l) {
        Var<S> h = ad::tanh(conv(p, spec.prefix + ".conv" + std::to_string(l), x, spec.kernel));
        x = spec.residual ? ad::add(x, h) : h;
    }
    Var<S> fwd = lstm_layer(p, spec.prefix + ".fwd", x);
    Var<S> bwd = ad::reverse_rows(lstm_layer(p, spec.prefix + ".bwd", ad::reverse_rows(x)));
    const int last = static_cast<int>(ids.size()) - 1;
    Var<S> final_state = ad::concat_cols<S>({ad::gather_rows(fwd, {last}), ad::gather_rows(bwd, {0})});
    return {ad::concat_cols<S>({fwd, bwd}), final_state, x};
}

}  // namespace mss::model
