#pragma once

#include "mss/ad/ops.hpp"
#include "mss/core/error.hpp"
#include "mss/model/config.hpp"
#include "mss/multiscale/hierarchy.hpp"

#include <map>
#include <string>
#include <vector>

namespace mss::model {

/// Per-scale distance between a prediction and its target under the chosen convention.
template <typename S>
ad::Var<S> scale_loss(ad::Var<S> pred, ad::Var<S> target, LossConvention c) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw AlignmentMismatch("prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                                " but target is " + std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
    }
    switch (c) {
        case LossConvention::mse: return ad::mse(pred, target);
        case LossConvention::sum: return ad::sum_squared_error(pred, target);
        case LossConvention::norm: return ad::l2_distance(pred, target);
    }
    return ad::mse(pred, target);
}

template <typename S>
struct LossTerms {
    ad::Var<S> total;
    std::map<int, ad::Var<S>> per_scale;

    /// Plain values, finest level last, for logging.
    [[nodiscard]] std::map<int, double> values() const {
        std::map<int, double> out;
        for (const auto& [l, v] : per_scale) out[l] = static_cast<double>(v.value()(0, 0));
        return out;
    }
};

/// Unweighted sum of per-scale terms over every predicted level.
template <typename S>
LossTerms<S> mss_loss(ad::Tape<S>& tape, const std::map<int, ad::Var<S>>& preds, const multiscale::ScaleHierarchy& targets,
                      LossConvention c = LossConvention::mse) {
    if (preds.empty()) throw InvalidInput("no predictions to score");
    LossTerms<S> out;
    std::vector<ad::Var<S>> terms;
    // Coarsest first so the summation order is fixed.
    for (auto it = preds.rbegin(); it != preds.rend(); ++it) {
        const int level = it->first;
        if (!targets.has_level(level)) throw AlignmentMismatch("targets have no level " + std::to_string(level));
        const auto target = tape.constant(targets.level(level).mel.template cast<S>());
        const auto term = scale_loss(it->second, target, c);
        out.per_scale[level] = term;
        terms.push_back(term);
    }
    out.total = ad::add_scalars(terms);
    return out;
}

/// Mean squared error over P durations.
template <typename S>
ad::Var<S> duration_loss(ad::Var<S> pred, ad::Var<S> truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw InvalidInput("duration loss needs equal lengths: " + std::to_string(pred.rows()) + " vs " +
                           std::to_string(truth.rows()));
    }
    return ad::mse(pred, truth);
}

}  // namespace mss::model
