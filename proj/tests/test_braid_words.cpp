#include <gtest/gtest.h>

#include <random>

#include "ggqm/braid.hpp"

using namespace ggqm;

TEST(Words, FreeReductionCancelsAdjacentInverses) {
    EXPECT_EQ(free_reduce({1, 2, -2, -1, 3}), (Word{3}));
    EXPECT_TRUE(free_reduce({1, -1, 2, 3, -3, -2}).empty());
    EXPECT_EQ(free_reduce({1, 2, -1}), (Word{1, 2, -1}));
}

TEST(Words, InverseAndPower) {
    Word w{1, 2, -3};
    EXPECT_EQ(invert(w), (Word{3, -2, -1}));
    EXPECT_TRUE(free_reduce(multiply(w, invert(w))).empty());
    EXPECT_EQ(power(Word{1, 2}, 3), (Word{1, 2, 1, 2, 1, 2}));
    EXPECT_EQ(power(Word{1, 2}, -1), (Word{-2, -1}));
    EXPECT_TRUE(power(Word{1}, 0).empty());
}

TEST(Words, CyclicReductionKeepsConjugacyData) {
    Word outer;
    Word core = cyclic_reduce({2, 1, 3, -2}, &outer);
    EXPECT_EQ(core, (Word{1, 3}));
    EXPECT_EQ(free_reduce(conjugate(outer, core)), (Word{2, 1, 3, -2}));
}

TEST(Words, ParsesBraidAndSurfaceNotation) {
    EXPECT_EQ(parse_word("s1 s2^-1 s1^3", Alphabet::braid), (Word{1, -2, 1, 1, 1}));
    EXPECT_EQ(parse_word("a1b1^-1 a2", Alphabet::surface), (Word{1, -2, 3}));
    EXPECT_EQ(parse_word("", Alphabet::braid), Word{});
    EXPECT_THROW(parse_word("x1", Alphabet::braid), std::invalid_argument);
    // A_{1,3} = s2 s1^2 s2^-1
    EXPECT_EQ(parse_word("A1,3", Alphabet::braid), (Word{2, 1, 1, -2}));
    EXPECT_EQ(to_string(Word{1, -2}, Alphabet::surface), "a1 b1^-1");
}

TEST(Braid, StrandCountIsChecked) {
    EXPECT_THROW(braid(2, {2}), std::invalid_argument);
    EXPECT_THROW(multiply(braid(3, {1}), braid(4, {1})), std::invalid_argument);
    EXPECT_NO_THROW(braid(3, {2, -1}));
}

TEST(Braid, ArtinActionDecidesTriviality) {
    // braid relation and far commutation
    auto rel = braid(3, parse_word("s1 s2 s1 s2^-1 s1^-1 s2^-1", Alphabet::braid));
    EXPECT_EQ(braid_is_trivial(rel), std::optional<bool>(true));
    auto far = braid(4, parse_word("s1 s3 s1^-1 s3^-1", Alphabet::braid));
    EXPECT_EQ(braid_is_trivial(far), std::optional<bool>(true));
    EXPECT_EQ(braid_is_trivial(braid(3, {1, 2})), std::optional<bool>(false));
    EXPECT_EQ(braid_is_trivial(braid(3, {1, 2, -1, -2})), std::optional<bool>(false));
}

TEST(Braid, RandomMovesPreserveTheBraid) {
    std::mt19937_64 rng(3);
    Word w = parse_word("s1 s2 s1 s3 s2^-1 s1", Alphabet::braid);
    Word moved = w;
    for (int k = 0; k < 200; ++k) random_braid_move(moved, rng);
    auto diff = braid(4, multiply(moved, invert(w)));
    EXPECT_EQ(braid_is_trivial(diff), std::optional<bool>(true));
}

TEST(Braid, PermutationAndPurity) {
    EXPECT_TRUE(is_pure(braid(2, {1, 1})));
    EXPECT_FALSE(is_pure(braid(2, {1})));
    auto pos = strand_positions({1}, 3);
    EXPECT_EQ(pos, (std::vector<int>{1, 0, 2}));
}

TEST(Braid, LinkingCountsHalfCrossings) {
    EXPECT_DOUBLE_EQ(linking_number(braid(2, {1, 1}), 1, 2), 1.0);
    EXPECT_DOUBLE_EQ(linking_number(braid(2, {-1, -1, -1, -1}), 1, 2), -2.0);
    // A_{1,3} links strands 1 and 3 once and leaves 2 alone
    auto a13 = braid(3, parse_word("A1,3", Alphabet::braid));
    EXPECT_DOUBLE_EQ(linking_number(a13, 1, 3), 1.0);
    EXPECT_DOUBLE_EQ(linking_number(a13, 1, 2), 0.0);
    EXPECT_THROW(linking_number(braid(3, {1}), 1, 3), std::invalid_argument);
}

TEST(Braid, CommutationCheck) {
    EXPECT_EQ(commutation_check(braid(4, {1}), braid(4, {3})), CommuteStatus::commuting);
    // full twists are central in B_3
    auto delta2 = braid(3, power(Word{1, 2}, 3));
    EXPECT_EQ(commutation_check(delta2, braid(3, {2, -1, 2})), CommuteStatus::commuting);
    EXPECT_EQ(commutation_check(braid(3, {1}), braid(3, {2})), CommuteStatus::not_commuting);
}

TEST(Braid, MixedWords) {
    auto m = mixed_from_artin(braid(3, {1, -2}));
    ASSERT_EQ(m.letters.size(), 2u);
    auto inv = invert(m);
    EXPECT_EQ(inv.letters[0].gen, 2);
    EXPECT_EQ(inv.letters[0].sign, 1);
    MixedBraidWord bad{2, {{MixedLetter::surface, 1, 1, 3}}};
    EXPECT_THROW(check_mixed(bad), std::invalid_argument);
}
