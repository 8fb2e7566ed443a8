#pragma once

#include "mss/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace mss::ad {

struct CoordinateCheck {
    std::string param;
    Index row = 0;
    Index col = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<CoordinateCheck> checks;
    std::map<std::string, double> max_rel_error_by_param;
    double max_rel_error = 0.0;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps exact zeros from dividing by zero.
inline double relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares reverse-mode gradients with central differences at `coords` random entries of
/// every trainable parameter. `loss` must rebuild the whole computation on the given tape.
template <typename S>
GradCheckReport check_gradients(ParameterStore<S>& params, const std::function<Var<S>(Tape<S>&)>& loss, int coords,
                                std::uint64_t seed, double step = 1e-5, double floor = 1e-6) {
    params.zero_grad();
    {
        Tape<S> tape;
        tape.backward(loss(tape));
    }
    auto evaluate = [&]() {
        Tape<S> tape;
        return static_cast<double>(loss(tape).value()(0, 0));
    };

    GradCheckReport report;
    std::mt19937_64 rng(seed);
    params.for_each([&](Parameter<S>& p) {
        if (!p.trainable) return;
        const Index n = p.value.size();
        std::set<Index> picked;
        const Index want = std::min<Index>(coords, n);
        while (static_cast<Index>(picked.size()) < want) picked.insert(static_cast<Index>(rng() % static_cast<std::uint64_t>(n)));
        double worst = 0.0;
        for (Index flat : picked) {
            const Index r = flat / p.value.cols();
            const Index c = flat % p.value.cols();
            const S saved = p.value(r, c);
            p.value(r, c) = saved + S(step);
            const double up = evaluate();
            p.value(r, c) = saved - S(step);
            const double down = evaluate();
            p.value(r, c) = saved;
            CoordinateCheck chk{p.name, r, c, static_cast<double>(p.grad(r, c)), (up - down) / (2.0 * step), 0.0};
            chk.rel_error = relative_error(chk.analytic, chk.numeric, floor);
            worst = std::max(worst, chk.rel_error);
            report.checks.push_back(chk);
        }
        report.max_rel_error_by_param[p.name] = worst;
        report.max_rel_error = std::max(report.max_rel_error, worst);
    });
    return report;
}

}  // namespace mss::ad
