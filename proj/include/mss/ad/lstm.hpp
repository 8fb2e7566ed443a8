#pragma once

#include "mss/ad/ops.hpp"
#include "mss/ad/tape.hpp"

#include <vector>

namespace mss::ad {

template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

/// Recurrent state of one LSTM cell.
template <typename S>
struct LstmState {
    RowVec<S> h;
    RowVec<S> c;

    static LstmState zeros(Index hidden) { return {RowVec<S>::Zero(hidden), RowVec<S>::Zero(hidden)}; }
};

/// One LSTM step. `input_gates` is x W + b (1 x 4H, gate order i, f, g, o); `recurrent` is
/// the H x 4H matrix applied to the previous h. Writes activated gates when asked.
template <typename S, typename GateRow>
void lstm_step(const GateRow& input_gates, const Mat<S>& recurrent, LstmState<S>& state,
               RowVec<S>* activated = nullptr) {
    const Index hd = recurrent.rows();
    RowVec<S> z = input_gates + state.h * recurrent;
    auto sig = [](auto v) { return (S(1) / (S(1) + (-v.array()).exp())).matrix(); };
    const RowVec<S> i = sig(z.segment(0, hd));
    const RowVec<S> f = sig(z.segment(hd, hd));
    const RowVec<S> g = z.segment(2 * hd, hd).array().tanh().matrix();
    const RowVec<S> o = sig(z.segment(3 * hd, hd));
    state.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
    state.h = o.cwiseProduct(state.c.array().tanh().matrix());
    if (activated != nullptr) {
        activated->resize(4 * hd);
        activated->segment(0, hd) = i;
        activated->segment(hd, hd) = f;
        activated->segment(2 * hd, hd) = g;
        activated->segment(3 * hd, hd) = o;
    }
}

/// Unidirectional LSTM over all rows of `input_gates` (T x 4H, already x W + b) from a zero
/// state. Returns the T x H hidden sequence. Backward is full backpropagation through time.
template <typename S>
Var<S> lstm(Var<S> input_gates, Var<S> recurrent) {
    const Index hd = recurrent.rows();
    detail::require(recurrent.cols() == 4 * hd && input_gates.cols() == 4 * hd, "lstm");
    const Index steps = input_gates.rows();
    const Mat<S>& xg = input_gates.value();
    const Mat<S>& u = recurrent.value();

    Mat<S> hs(steps, hd);
    Mat<S> cs(steps, hd);
    Mat<S> gates(steps, 4 * hd);
    auto state = LstmState<S>::zeros(hd);
    RowVec<S> act;
    for (Index t = 0; t < steps; ++t) {
        lstm_step<S>(xg.row(t), u, state, &act);
        hs.row(t) = state.h;
        cs.row(t) = state.c;
        gates.row(t) = act;
    }

    Mat<S> out = hs;
    return input_gates.tape->op(
        std::move(out), {input_gates, recurrent},
        [input_gates, recurrent, hs = std::move(hs), cs = std::move(cs), gates = std::move(gates)](Tape<S>& t,
                                                                                                    const Mat<S>& gh) {
            const Index hd = t.value(recurrent.id).rows();
            const Index steps = gh.rows();
            const Mat<S>& u = t.value(recurrent.id);
            Mat<S> dxg(steps, 4 * hd);
            Mat<S> du = Mat<S>::Zero(hd, 4 * hd);
            RowVec<S> dh_next = RowVec<S>::Zero(hd);
            RowVec<S> dc_next = RowVec<S>::Zero(hd);
            for (Index s = steps - 1; s >= 0; --s) {
                const auto i = gates.row(s).segment(0, hd).array();
                const auto f = gates.row(s).segment(hd, hd).array();
                const auto g = gates.row(s).segment(2 * hd, hd).array();
                const auto o = gates.row(s).segment(3 * hd, hd).array();
                const auto tc = cs.row(s).array().tanh();
                const RowVec<S> dh = gh.row(s) + dh_next;
                RowVec<S> dc = (dh.array() * o * (S(1) - tc.square())).matrix() + dc_next;
                RowVec<S> c_prev = s > 0 ? RowVec<S>(cs.row(s - 1)) : RowVec<S>::Zero(hd);
                RowVec<S> dz(4 * hd);
                dz.segment(0, hd) = (dc.array() * g * i * (S(1) - i)).matrix();
                dz.segment(hd, hd) = (dc.array() * c_prev.array() * f * (S(1) - f)).matrix();
                dz.segment(2 * hd, hd) = (dc.array() * i * (S(1) - g.square())).matrix();
                dz.segment(3 * hd, hd) = (dh.array() * tc * o * (S(1) - o)).matrix();
                dxg.row(s) = dz;
                if (s > 0) du.noalias() += hs.row(s - 1).transpose() * dz;
                dh_next.noalias() = dz * u.transpose();
                dc_next = (dc.array() * f).matrix();
            }
            t.accumulate(input_gates.id, dxg);
            if (t.requires_grad(recurrent.id)) t.accumulate(recurrent.id, du);
        });
}

}  // namespace mss::ad
