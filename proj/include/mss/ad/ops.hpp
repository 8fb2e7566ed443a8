#pragma once

#include "mss/ad/tape.hpp"
#include "mss/core/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mss::ad {

namespace detail {
inline void require(bool ok, const char* what) {
    if (!ok) throw AlignmentMismatch(std::string("shape mismatch in ") + what);
}
}  // namespace detail

template <typename S>
Var<S> matmul(Var<S> a, Var<S> b) {
    detail::require(a.cols() == b.rows(), "matmul");
    Tape<S>& t = *a.tape;
    return t.op(a.value() * b.value(), {a, b}, [a, b](Tape<S>& t, const Mat<S>& g) {
        if (t.requires_grad(a.id)) t.accumulate(a.id, g * t.value(b.id).transpose());
        if (t.requires_grad(b.id)) t.accumulate(b.id, t.value(a.id).transpose() * g);
    });
}

template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "add");
    return a.tape->op(a.value() + b.value(), {a, b}, [a, b](Tape<S>& t, const Mat<S>& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, g);
    });
}

template <typename S>
Var<S> sub(Var<S> a, Var<S> b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
    return a.tape->op(a.value() - b.value(), {a, b}, [a, b](Tape<S>& t, const Mat<S>& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, -g);
    });
}

/// a (n x k) + bias (1 x k) broadcast over rows.
template <typename S>
Var<S> add_bias(Var<S> a, Var<S> bias) {
    detail::require(bias.rows() == 1 && bias.cols() == a.cols(), "add_bias");
    Mat<S> out = a.value();
    out.rowwise() += bias.value().row(0);
    return a.tape->op(std::move(out), {a, bias}, [a, bias](Tape<S>& t, const Mat<S>& g) {
        t.accumulate(a.id, g);
        if (t.requires_grad(bias.id)) t.accumulate(bias.id, g.colwise().sum());
    });
}

template <typename S>
Var<S> hadamard(Var<S> a, Var<S> b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
    return a.tape->op(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape<S>& t, const Mat<S>& g) {
        if (t.requires_grad(a.id)) t.accumulate(a.id, g.cwiseProduct(t.value(b.id)));
        if (t.requires_grad(b.id)) t.accumulate(b.id, g.cwiseProduct(t.value(a.id)));
    });
}

template <typename S>
Var<S> scale(Var<S> a, S s) {
    return a.tape->op(a.value() * s, {a}, [a, s](Tape<S>& t, const Mat<S>& g) { t.accumulate(a.id, g * s); });
}

/// Column-wise affine map with constant coefficients: out = a .* mul + add (rows broadcast).
template <typename S>
Var<S> affine_cols(Var<S> a, const Mat<S>& mul, const Mat<S>& add) {
    detail::require(mul.rows() == 1 && add.rows() == 1 && mul.cols() == a.cols() && add.cols() == a.cols(),
                    "affine_cols");
    Mat<S> out = a.value().array().rowwise() * mul.row(0).array();
    out.rowwise() += add.row(0);
    return a.tape->op(std::move(out), {a}, [a, mul](Tape<S>& t, const Mat<S>& g) {
        Mat<S> d = g.array().rowwise() * mul.row(0).array();
        t.accumulate(a.id, d);
    });
}

template <typename S>
Var<S> tanh(Var<S> a) {
    Mat<S> y = a.value().array().tanh().matrix();
    return a.tape->op(y, {a}, [a, y](Tape<S>& t, const Mat<S>& g) {
        t.accumulate(a.id, (g.array() * (S(1) - y.array().square())).matrix());
    });
}

template <typename S>
Var<S> sigmoid(Var<S> a) {
    Mat<S> y = (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
    return a.tape->op(y, {a}, [a, y](Tape<S>& t, const Mat<S>& g) {
        t.accumulate(a.id, (g.array() * y.array() * (S(1) - y.array())).matrix());
    });
}

template <typename S>
Var<S> exp(Var<S> a) {
    Mat<S> y = a.value().array().exp().matrix();
    return a.tape->op(y, {a}, [a, y](Tape<S>& t, const Mat<S>& g) { t.accumulate(a.id, g.cwiseProduct(y)); });
}

/// Horizontal concatenation of matrices with equal row counts.
template <typename S>
Var<S> concat_cols(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw InvalidInput("concat_cols of nothing");
    const Index rows = parts.front().rows();
    Index cols = 0;
    for (const auto& p : parts) {
        detail::require(p.rows() == rows, "concat_cols");
        cols += p.cols();
    }
    Mat<S> out(rows, cols);
    Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
    }
    return parts.front().tape->op(std::move(out), parts, [parts](Tape<S>& t, const Mat<S>& g) {
        Index c = 0;
        for (const auto& p : parts) {
            const Index w = t.value(p.id).cols();
            if (t.requires_grad(p.id)) t.accumulate(p.id, g.middleCols(c, w));
            c += w;
        }
    });
}

/// out.row(i) = a.row(index[i]), or zeros when index[i] < 0.
template <typename S>
Var<S> gather_rows(Var<S> a, std::vector<int> index) {
    const Mat<S>& v = a.value();
    Mat<S> out(static_cast<Index>(index.size()), v.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const int r = index[i];
        if (r >= v.rows()) throw AlignmentMismatch("gather_rows index out of range");
        if (r < 0) out.row(static_cast<Index>(i)).setZero();
        else out.row(static_cast<Index>(i)) = v.row(r);
    }
    return a.tape->op(std::move(out), {a}, [a, index = std::move(index)](Tape<S>& t, const Mat<S>& g) {
        Mat<S>* ga = t.grad_buffer(a.id);
        if (ga == nullptr) return;
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (index[i] >= 0) ga->row(index[i]) += g.row(static_cast<Index>(i));
        }
    });
}

template <typename S>
Var<S> reverse_rows(Var<S> a) {
    std::vector<int> idx(static_cast<std::size_t>(a.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(idx.size() - 1 - i);
    return gather_rows(a, std::move(idx));
}

/// Row i = mean of the counts[i] consecutive rows starting after the previous segment.
template <typename S>
Var<S> segment_mean(Var<S> a, const std::vector<int>& counts) {
    Index total = 0;
    for (int c : counts) {
        if (c < 1) throw InvalidDuration("segment_mean count must be positive");
        total += c;
    }
    detail::require(total == a.rows(), "segment_mean");
    const Mat<S>& v = a.value();
    Mat<S> out(static_cast<Index>(counts.size()), v.cols());
    Index start = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out.row(static_cast<Index>(i)) = v.middleRows(start, counts[i]).colwise().sum() / S(counts[i]);
        start += counts[i];
    }
    return a.tape->op(std::move(out), {a}, [a, counts](Tape<S>& t, const Mat<S>& g) {
        Mat<S>* ga = t.grad_buffer(a.id);
        if (ga == nullptr) return;
        Index start = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const auto share = g.row(static_cast<Index>(i)) / S(counts[i]);
            for (int k = 0; k < counts[i]; ++k) ga->row(start + k) += share;
            start += counts[i];
        }
    });
}

/// 1x1 sum of two or more 1x1 nodes.
template <typename S>
Var<S> add_scalars(const std::vector<Var<S>>& terms) {
    if (terms.empty()) throw InvalidInput("add_scalars of nothing");
    S total = 0;
    for (const auto& v : terms) {
        detail::require(v.value().size() == 1, "add_scalars");
        total += v.value()(0, 0);
    }
    Mat<S> out(1, 1);
    out(0, 0) = total;
    return terms.front().tape->op(std::move(out), terms, [terms](Tape<S>& t, const Mat<S>& g) {
        for (const auto& v : terms) t.accumulate(v.id, g);
    });
}

/// Mean over all entries of (a - b)^2, as a 1x1 node.
template <typename S>
Var<S> mse(Var<S> a, Var<S> b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "mse");
    const Mat<S> diff = a.value() - b.value();
    const S n = S(diff.size());
    Mat<S> out(1, 1);
    out(0, 0) = diff.squaredNorm() / n;
    return a.tape->op(std::move(out), {a, b}, [a, b, diff, n](Tape<S>& t, const Mat<S>& g) {
        const Mat<S> d = diff * (S(2) * g(0, 0) / n);
        t.accumulate(a.id, d);
        t.accumulate(b.id, -d);
    });
}

/// Sum over all entries of (a - b)^2.
template <typename S>
Var<S> sum_squared_error(Var<S> a, Var<S> b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "sum_squared_error");
    const Mat<S> diff = a.value() - b.value();
    Mat<S> out(1, 1);
    out(0, 0) = diff.squaredNorm();
    return a.tape->op(std::move(out), {a, b}, [a, b, diff](Tape<S>& t, const Mat<S>& g) {
        const Mat<S> d = diff * (S(2) * g(0, 0));
        t.accumulate(a.id, d);
        t.accumulate(b.id, -d);
    });
}

/// Frobenius norm of (a - b). Gradient taken as zero at a == b.
template <typename S>
Var<S> l2_distance(Var<S> a, Var<S> b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "l2_distance");
    const Mat<S> diff = a.value() - b.value();
    const S norm = diff.norm();
    Mat<S> out(1, 1);
    out(0, 0) = norm;
    return a.tape->op(std::move(out), {a, b}, [a, b, diff, norm](Tape<S>& t, const Mat<S>& g) {
        if (norm == S(0)) return;
        const Mat<S> d = diff * (g(0, 0) / norm);
        t.accumulate(a.id, d);
        t.accumulate(b.id, -d);
    });
}

/// Sum of all entries.
template <typename S>
Var<S> sum(Var<S> a) {
    Mat<S> out(1, 1);
    out(0, 0) = a.value().sum();
    return a.tape->op(std::move(out), {a}, [a](Tape<S>& t, const Mat<S>& g) {
        t.accumulate(a.id, Mat<S>::Constant(t.value(a.id).rows(), t.value(a.id).cols(), g(0, 0)));
    });
}

/// 1-D convolution over rows ("same" zero padding, odd kernel). weight is
/// (kernel * in_channels) x out_channels with the kernel taps stacked oldest first.
template <typename S>
Var<S> conv1d(Var<S> x, Var<S> weight, Var<S> bias, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) throw InvalidInput("conv1d kernel must be odd and positive");
    detail::require(weight.rows() == kernel * x.cols(), "conv1d weight");
    Var<S> stacked = x;
    if (kernel > 1) {
        const int half = kernel / 2;
        const auto rows = static_cast<int>(x.rows());
        std::vector<Var<S>> taps;
        for (int k = -half; k <= half; ++k) {
            if (k == 0) {
                taps.push_back(x);
                continue;
            }
            std::vector<int> idx(static_cast<std::size_t>(rows));
            for (int r = 0; r < rows; ++r) {
                const int src = r + k;
                idx[static_cast<std::size_t>(r)] = (src >= 0 && src < rows) ? src : -1;
            }
            taps.push_back(gather_rows(x, std::move(idx)));
        }
        stacked = concat_cols(taps);
    }
    return add_bias(matmul(stacked, weight), bias);
}

/// Dense layer: x W + b.
template <typename S>
Var<S> linear(Var<S> x, Var<S> weight, Var<S> bias) {
    return add_bias(matmul(x, weight), bias);
}

}  // namespace mss::ad
