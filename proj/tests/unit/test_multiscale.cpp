#include "mss/linguistic/front_end.hpp"
#include "mss/multiscale/alignment.hpp"
#include "mss/multiscale/hierarchy.hpp"
#include "mss/multiscale/hierarchy_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace mss;
using namespace mss::multiscale;

namespace {

Matrix col(std::initializer_list<double> v) {
    Matrix m(static_cast<Index>(v.size()), 1);
    Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

// Naive oracle: explicit triple loop with its own running frame offset.
Matrix pool_oracle(const Matrix& y, const std::vector<int>& counts) {
    Matrix out(static_cast<Index>(counts.size()), y.cols());
    int start = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (Index m = 0; m < y.cols(); ++m) {
            double s = 0.0;
            for (int j = start; j < start + counts[i]; ++j) s += y(j, m);
            out(static_cast<Index>(i), m) = s / counts[i];
        }
        start += counts[i];
    }
    return out;
}

std::vector<int> random_partition(std::mt19937& rng, int total) {
    std::vector<int> parts;
    int left = total;
    while (left > 0) {
        const int take = std::uniform_int_distribution<int>(1, std::min(left, 6))(rng);
        parts.push_back(take);
        left -= take;
    }
    return parts;
}

Matrix random_matrix(std::mt19937& rng, Index rows, Index cols) {
    std::normal_distribution<double> n(0.0, 2.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

}  // namespace

TEST(Boundaries, CumulativeSum) {
    EXPECT_EQ(boundaries(AlignmentVector({2, 3, 1})), (std::vector<int>{2, 5, 6}));
    EXPECT_EQ(boundaries(AlignmentVector({9})), (std::vector<int>{9}));
    EXPECT_EQ(boundaries(AlignmentVector({1, 1, 1, 1})), (std::vector<int>{1, 2, 3, 4}));
}

TEST(AlignmentVector, RejectsEmptyAndNonPositive) {
    EXPECT_THROW(AlignmentVector(std::vector<int>{}), AlignmentMismatch);
    EXPECT_THROW(AlignmentVector({2, 0}), InvalidDuration);
}

TEST(PoolScale, HandExample) {
    const Matrix s = pool_scale(col({1, 3, 5, 7}), AlignmentVector({2, 2}));
    EXPECT_EQ(s, col({2, 6}));
}

TEST(PoolScale, ConstantRowsStayConstant) {
    Matrix y = Matrix::Constant(10, 3, 0.25);
    const Matrix s = pool_scale(y, AlignmentVector({3, 1, 6}));
    EXPECT_TRUE((s.array() == 0.25).all());
}

TEST(PoolScale, FullPoolingIsColumnMean) {
    std::mt19937 rng(2);
    const Matrix y = random_matrix(rng, 13, 4);
    const Matrix s = pool_scale(y, AlignmentVector({13}));
    ASSERT_EQ(s.rows(), 1);
    for (Index m = 0; m < 4; ++m) EXPECT_NEAR(s(0, m), y.col(m).mean(), 1e-12);
}

TEST(PoolScale, TotalMismatch) {
    EXPECT_THROW(pool_scale(col({1, 2, 3}), AlignmentVector({1, 1})), AlignmentMismatch);
}

TEST(PoolScale, MatchesNaiveOracleExactly) {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const int t = std::uniform_int_distribution<int>(1, 50)(rng);
        const int m = std::uniform_int_distribution<int>(1, 4)(rng);
        const auto counts = random_partition(rng, t);
        const Matrix y = random_matrix(rng, t, m);
        ASSERT_EQ(pool_scale(y, AlignmentVector(counts)), pool_oracle(y, counts));
    }
}

TEST(Upsample, Examples) {
    EXPECT_EQ(upsample(col({2, 6}), AlignmentVector({2, 2})), col({2, 2, 6, 6}));
    EXPECT_EQ(upsample(col({1, 5, 9}), AlignmentVector({1, 1, 1})), col({1, 5, 9}));
    EXPECT_EQ(upsample(col({4}), AlignmentVector({3})), col({4, 4, 4}));
    EXPECT_THROW(upsample(col({4, 5}), AlignmentVector({3})), AlignmentMismatch);
}

TEST(UnitCounts, Examples) {
    EXPECT_EQ(unit_counts(AlignmentVector({5, 5}), AlignmentVector({3, 2, 5})).counts(), (std::vector<int>{2, 1}));
    EXPECT_EQ(unit_counts(AlignmentVector({3, 2, 5}), AlignmentVector({3, 2, 5})).counts(), (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(unit_counts(AlignmentVector({10}), AlignmentVector({3, 2, 5})).counts(), (std::vector<int>{3}));
    EXPECT_THROW(unit_counts(AlignmentVector({4, 6}), AlignmentVector({3, 2, 5})), AlignmentMismatch);
    EXPECT_THROW(unit_counts(AlignmentVector({4}), AlignmentVector({3, 2})), AlignmentMismatch);
}

TEST(PoolUpsample, PoolAfterUpsampleIsIdempotent) {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const int t = std::uniform_int_distribution<int>(1, 40)(rng);
        const AlignmentVector a(random_partition(rng, t));
        const Matrix y = random_matrix(rng, t, 3);
        const Matrix pooled = pool_scale(y, a);
        const Matrix back = pool_scale(upsample(pooled, a), a);
        ASSERT_TRUE(back.isApprox(pooled, 1e-12));
    }
}

// Independent route: word target as duration-weighted mean of its phoneme targets.
TEST(Hierarchy, WordTargetsAreWeightedPhonemeMeans) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const int t = std::uniform_int_distribution<int>(2, 50)(rng);
        const auto phones = random_partition(rng, t);
        std::vector<int> phones_per_word;
        for (std::size_t left = phones.size(); left > 0;) {
            const auto take = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(left, 4))(rng);
            phones_per_word.push_back(static_cast<int>(take));
            left -= take;
        }
        std::vector<int> words;
        std::size_t p = 0;
        for (int n : phones_per_word) {
            int sum = 0;
            for (int k = 0; k < n; ++k) sum += phones[p++];
            words.push_back(sum);
        }
        const Matrix y = random_matrix(rng, t, 4);
        const auto h = build_generic(y, {AlignmentVector(words), AlignmentVector(phones)});
        const Matrix& word_level = h.level(2).mel;
        const Matrix& phone_level = h.level(1).mel;
        p = 0;
        for (std::size_t w = 0; w < words.size(); ++w) {
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(4);
            for (int k = 0; k < phones_per_word[w]; ++k, ++p) acc += phones[p] * phone_level.row(static_cast<Index>(p));
            acc /= words[w];
            ASSERT_LE((acc - word_level.row(static_cast<Index>(w))).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(Hierarchy, FigureSentenceCounts) {
    const auto lex = linguistic::Lexicon::load(std::filesystem::path(MSS_DATA_DIR) / "lexicon.txt");
    const auto utt = linguistic::front_end("He headed straight for his desk.", lex);
    std::vector<int> d(static_cast<std::size_t>(utt.num_phonemes()));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 2 + static_cast<int>(i % 5);
    const linguistic::DurationVector dv(d);
    std::mt19937 rng(1);
    const Matrix y = random_matrix(rng, dv.total_frames, 80);
    const auto h = build_hierarchy(y, utt, dv, HierarchyMode::word_mss);
    ASSERT_EQ(h.levels.size(), 3u);
    EXPECT_EQ(h.level(2).mel.rows(), 7);
    EXPECT_EQ(h.level(1).mel.rows(), 29);
    EXPECT_EQ(h.level(0).mel.rows(), dv.total_frames);
    EXPECT_EQ(h.level(0).mel, y);
    EXPECT_TRUE(h.warnings.empty());

    const auto hs = build_hierarchy(y, utt, dv, HierarchyMode::sentence_mss);
    ASSERT_EQ(hs.levels.size(), 4u);
    EXPECT_EQ(hs.level(3).mel.rows(), 1);
    for (Index m = 0; m < 80; ++m) EXPECT_NEAR(hs.level(3).mel(0, m), y.col(m).mean(), 1e-12);
}

TEST(Hierarchy, DegenerateUtteranceWarns) {
    linguistic::Utterance utt;
    utt.words = {"a"};
    utt.phonemes = {"AH"};
    utt.phoneme_ids = {2};
    utt.phoneme_word_index = {0};
    std::mt19937 rng(3);
    const Matrix y = random_matrix(rng, 6, 2);
    const auto h = build_hierarchy(y, utt, linguistic::DurationVector({6}), HierarchyMode::sentence_mss);
    EXPECT_EQ(h.level(3).mel, h.level(2).mel);
    EXPECT_EQ(h.level(2).mel, h.level(1).mel);
    EXPECT_EQ(h.level(0).mel, y);
    EXPECT_FALSE(h.warnings.empty());
}

TEST(Hierarchy, RowCountChainAndTotals) {
    const auto lex = linguistic::Lexicon::load(std::filesystem::path(MSS_DATA_DIR) / "lexicon.txt");
    std::mt19937 rng(17);
    const std::vector<std::string> vocab = {"the", "quiet", "window", "desk", "morning", "garden"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        for (int i = std::uniform_int_distribution<int>(1, 6)(rng); i > 0; --i) text += vocab[rng() % vocab.size()] + " ";
        const auto utt = linguistic::front_end(text, lex);
        std::vector<int> d;
        for (int i = 0; i < utt.num_phonemes(); ++i) d.push_back(std::uniform_int_distribution<int>(1, 8)(rng));
        const linguistic::DurationVector dv(d);
        const auto h = build_hierarchy(random_matrix(rng, dv.total_frames, 3), utt, dv, HierarchyMode::sentence_mss);
        for (std::size_t i = 0; i + 1 < h.levels.size(); ++i) {
            ASSERT_LT(h.levels[i].mel.rows(), h.levels[i + 1].mel.rows());
            ASSERT_EQ(h.levels[i].alignment.total(), dv.total_frames);
        }
    }
}

TEST(Hierarchy, DurationTotalMismatch) {
    linguistic::Utterance utt;
    utt.words = {"a"};
    utt.phonemes = {"AH"};
    utt.phoneme_ids = {2};
    utt.phoneme_word_index = {0};
    EXPECT_THROW(build_hierarchy(Matrix::Zero(5, 2), utt, linguistic::DurationVector({6}), HierarchyMode::word_mss),
                 AlignmentMismatch);
}

TEST(HierarchyIo, SaveLoad) {
    std::mt19937 rng(5);
    const Matrix y = dsp::quantize_f32(dsp::MelSpectrogram{random_matrix(rng, 12, 80), 12.5}).frames;
    auto h = build_generic(y, {AlignmentVector({12}), AlignmentVector({5, 7}), AlignmentVector({2, 3, 3, 4})});
    for (auto& s : h.levels) s.mel = dsp::quantize_f32(dsp::MelSpectrogram{s.mel, 12.5}).frames;
    const auto dir = std::filesystem::temp_directory_path() / "mss_hier_io";
    std::filesystem::remove_all(dir);
    save_hierarchy(dir, h, 12.5);
    EXPECT_TRUE(std::filesystem::exists(dir / "scale3.mel"));
    const auto back = load_hierarchy(dir);
    ASSERT_EQ(back.levels.size(), h.levels.size());
    for (std::size_t i = 0; i < h.levels.size(); ++i) {
        EXPECT_EQ(back.levels[i].level, h.levels[i].level);
        EXPECT_EQ(back.levels[i].alignment, h.levels[i].alignment);
        EXPECT_EQ(back.levels[i].mel, h.levels[i].mel);
    }
    std::filesystem::remove(dir / "scale1.mel");
    EXPECT_THROW(load_hierarchy(dir), DataError);
}
