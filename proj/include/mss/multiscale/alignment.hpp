#pragma once

#include "mss/core/error.hpp"
#include "mss/core/matrix.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace mss::multiscale {

/// Frame counts per unit at one scale; every count >= 1 and they sum to T.
class AlignmentVector {
public:
    AlignmentVector() = default;

    explicit AlignmentVector(std::vector<int> counts) : counts_(std::move(counts)) {
        if (counts_.empty()) throw AlignmentMismatch("alignment vector must have at least one unit");
        for (int c : counts_) {
            if (c < 1) throw InvalidDuration("alignment count " + std::to_string(c) + " is not positive");
        }
        total_ = std::accumulate(counts_.begin(), counts_.end(), 0);
    }

    /// T units of one frame each (the frame-level scale).
    static AlignmentVector unit_frames(int total) { return AlignmentVector(std::vector<int>(static_cast<std::size_t>(total), 1)); }

    [[nodiscard]] const std::vector<int>& counts() const { return counts_; }
    [[nodiscard]] int total() const { return total_; }
    [[nodiscard]] int size() const { return static_cast<int>(counts_.size()); }
    [[nodiscard]] int operator[](int i) const { return counts_[static_cast<std::size_t>(i)]; }

    bool operator==(const AlignmentVector&) const = default;

private:
    std::vector<int> counts_;
    int total_ = 0;
};

/// c_k = a_0 + ... + a_k. Strictly increasing, last element T.
inline std::vector<int> boundaries(const AlignmentVector& a) {
    std::vector<int> c(a.counts().size());
    std::partial_sum(a.counts().begin(), a.counts().end(), c.begin());
    return c;
}

/// Unit means: row i is the mean of Y rows in [c_{i-1}, c_i), with c_{-1} = 0.
template <typename Derived>
Matrix pool_scale(const Eigen::MatrixBase<Derived>& frames, const AlignmentVector& a) {
    if (a.total() != frames.rows()) {
        throw AlignmentMismatch("alignment covers " + std::to_string(a.total()) + " frames but the spectrogram has " +
                                std::to_string(frames.rows()));
    }
    Matrix out(a.size(), frames.cols());
    Index start = 0;
    for (int i = 0; i < a.size(); ++i) {
        const int n = a[i];
        // Sequential accumulation in frame order keeps the result reproducible bit for bit.
        out.row(i).setZero();
        for (Index j = start; j < start + n; ++j) out.row(i) += frames.row(j);
        out.row(i) /= static_cast<double>(n);
        start += n;
    }
    return out;
}

/// Repeats row i of S fine_counts[i] times.
template <typename Derived>
Matrix upsample(const Eigen::MatrixBase<Derived>& coarse, const AlignmentVector& fine_counts) {
    if (fine_counts.size() != coarse.rows()) {
        throw AlignmentMismatch("upsample needs one count per row: " + std::to_string(fine_counts.size()) + " counts for " +
                                std::to_string(coarse.rows()) + " rows");
    }
    Matrix out(fine_counts.total(), coarse.cols());
    Index r = 0;
    for (int i = 0; i < fine_counts.size(); ++i) {
        for (int k = 0; k < fine_counts[i]; ++k) out.row(r++) = coarse.row(i);
    }
    return out;
}

/// Row index into the coarse matrix for every output row of upsample(); used by the model.
inline std::vector<int> upsample_index(const AlignmentVector& fine_counts) {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(fine_counts.total()));
    for (int i = 0; i < fine_counts.size(); ++i) idx.insert(idx.end(), static_cast<std::size_t>(fine_counts[i]), i);
    return idx;
}

/// Number of fine units inside each coarse unit. Coarse segments must be unions of
/// consecutive fine segments over the same frames.
inline AlignmentVector unit_counts(const AlignmentVector& coarse, const AlignmentVector& fine) {
    if (coarse.total() != fine.total()) {
        throw AlignmentMismatch("alignments cover different frame totals: " + std::to_string(coarse.total()) + " vs " +
                                std::to_string(fine.total()));
    }
    const auto cb = boundaries(coarse);
    const auto fb = boundaries(fine);
    std::vector<int> counts;
    std::size_t j = 0;
    for (int end : cb) {
        int n = 0;
        while (j < fb.size() && fb[j] < end) {
            ++n;
            ++j;
        }
        if (j == fb.size() || fb[j] != end) {
            throw AlignmentMismatch("coarse boundary at frame " + std::to_string(end) + " does not fall on a fine boundary");
        }
        ++n;
        ++j;
        counts.push_back(n);
    }
    return AlignmentVector(std::move(counts));
}

}  // namespace mss::multiscale
