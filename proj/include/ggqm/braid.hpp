#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/words.hpp"

namespace ggqm {

struct BraidWord {
    int strands = 1;
    Word letters;
};

inline void check_braid(const BraidWord& b) {
    if (b.strands < 1) throw std::invalid_argument("braid needs at least one strand");
    for (Letter l : b.letters)
        if (std::abs(l) < 1 || std::abs(l) >= b.strands)
            throw std::invalid_argument("generator s" + std::to_string(std::abs(l)) + " out of range for " +
                                        std::to_string(b.strands) + " strands");
}

inline BraidWord braid(int strands, Word letters) {
    BraidWord b{strands, std::move(letters)};
    check_braid(b);
    return b;
}

inline BraidWord parse_braid(int strands, std::string_view text) { return braid(strands, parse_word(text, Alphabet::braid)); }

inline std::string to_string(const BraidWord& b) { return to_string(b.letters, Alphabet::braid); }

inline void same_strands(const BraidWord& u, const BraidWord& v) {
    if (u.strands != v.strands) throw std::invalid_argument("strand-count mismatch");
}

inline BraidWord free_reduce(const BraidWord& b) { return {b.strands, free_reduce(b.letters)}; }
inline BraidWord invert(const BraidWord& b) { return {b.strands, invert(b.letters)}; }
inline BraidWord multiply(const BraidWord& u, const BraidWord& v) {
    same_strands(u, v);
    return {u.strands, multiply(u.letters, v.letters)};
}
inline BraidWord power(const BraidWord& b, int k) { return {b.strands, power(b.letters, k)}; }
inline BraidWord conjugate(const BraidWord& u, const BraidWord& w) {
    same_strands(u, w);
    return {u.strands, conjugate(u.letters, w.letters)};
}
inline int exponent_sum(const BraidWord& b) { return exponent_sum(b.letters); }

// perm[p] = strand (by starting position) sitting at position p after the word
inline std::vector<int> strand_positions(const Word& w, int strands) {
    std::vector<int> at(static_cast<std::size_t>(strands));
    std::iota(at.begin(), at.end(), 0);
    for (Letter l : w) {
        int k = std::abs(l) - 1;
        std::swap(at[static_cast<std::size_t>(k)], at[static_cast<std::size_t>(k + 1)]);
    }
    return at;
}

inline bool is_pure(const BraidWord& b) {
    auto at = strand_positions(b.letters, b.strands);
    for (int p = 0; p < b.strands; ++p)
        if (at[static_cast<std::size_t>(p)] != p) return false;
    return true;
}

// Half the signed crossings between the strands starting at positions i and j (1-based).
// No purity requirement; half-integers appear for non-pure input.
inline double crossing_linking(const Word& w, int strands, int i, int j) {
    std::vector<int> at(static_cast<std::size_t>(strands));
    std::iota(at.begin(), at.end(), 1);
    int s = 0;
    for (Letter l : w) {
        auto k = static_cast<std::size_t>(std::abs(l) - 1);
        int p = at[k], q = at[k + 1];
        if ((p == i && q == j) || (p == j && q == i)) s += l > 0 ? 1 : -1;
        std::swap(at[k], at[k + 1]);
    }
    return 0.5 * s;
}

inline double linking_number(const BraidWord& b, int i, int j) {
    check_braid(b);
    if (i < 1 || j < 1 || i > b.strands || j > b.strands || i == j)
        throw std::invalid_argument("invalid strand pair");
    auto at = strand_positions(b.letters, b.strands);
    int pi = at[static_cast<std::size_t>(i - 1)] + 1, pj = at[static_cast<std::size_t>(j - 1)] + 1;
    if (!((pi == i && pj == j) || (pi == j && pj == i)))
        throw std::invalid_argument("permutation moves strands " + std::to_string(i) + "," + std::to_string(j) +
                                    " outside their pair");
    return crossing_linking(b.letters, b.strands, i, j);
}

// Artin representation on the free group <x1..xn>; faithful, so it decides triviality.
// Returns nullopt when the image words outgrow the cap.
inline std::optional<bool> braid_is_trivial(const BraidWord& b, std::size_t cap = 200000) {
    int n = b.strands;
    std::vector<Word> img(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) img[static_cast<std::size_t>(k)] = {k + 1};
    std::vector<Word> sub(static_cast<std::size_t>(n));
    for (auto it = b.letters.rbegin(); it != b.letters.rend(); ++it) {
        Letter l = *it;
        int i = std::abs(l);
        for (int k = 0; k < n; ++k) sub[static_cast<std::size_t>(k)] = {k + 1};
        if (l > 0) {
            sub[static_cast<std::size_t>(i - 1)] = {i, i + 1, -i};
            sub[static_cast<std::size_t>(i)] = {i};
        } else {
            sub[static_cast<std::size_t>(i - 1)] = {i + 1};
            sub[static_cast<std::size_t>(i)] = {-(i + 1), i, i + 1};
        }
        std::size_t total = 0;
        for (auto& w : img) {
            Word out;
            for (Letter x : w) {
                const Word& s = sub[static_cast<std::size_t>(std::abs(x) - 1)];
                if (x > 0)
                    out.insert(out.end(), s.begin(), s.end());
                else {
                    Word si = invert(s);
                    out.insert(out.end(), si.begin(), si.end());
                }
            }
            w = free_reduce(out);
            total += w.size();
        }
        if (total > cap) return std::nullopt;
    }
    for (int k = 0; k < n; ++k)
        if (img[static_cast<std::size_t>(k)] != Word{k + 1}) return false;
    return true;
}

// One random braid-relation move at a random place; returns false if none applies there.
inline bool random_braid_move(Word& w, std::mt19937_64& rng) {
    if (w.size() < 2) return false;
    std::uniform_int_distribution<std::size_t> pick(0, w.size() - 2);
    std::size_t p = pick(rng);
    Letter x = w[p], y = w[p + 1];
    if (std::abs(std::abs(x) - std::abs(y)) >= 2) {
        std::swap(w[p], w[p + 1]);
        return true;
    }
    if (p + 2 < w.size() && std::abs(std::abs(x) - std::abs(y)) == 1) {
        Letter z = w[p + 2];
        // s_i^e s_j^f s_i^g with |i-j| = 1: the three sign patterns that admit a rewrite
        if (std::abs(z) == std::abs(x)) {
            int ex = x > 0 ? 1 : -1, ey = y > 0 ? 1 : -1, ez = z > 0 ? 1 : -1;
            int i = std::abs(x), j = std::abs(y);
            if (ex == ey && ey == ez) {
                w[p] = ex * j; w[p + 1] = ex * i; w[p + 2] = ex * j;
                return true;
            }
            if (ex == ey && ez == -ex) {  // x y x^-1 = y^-1 x y
                w[p] = -ey * j; w[p + 1] = ex * i; w[p + 2] = ey * j;
                return true;
            }
            if (ey == ez && ex == -ez) {  // x^-1 y x = y x y^-1
                w[p] = ey * j; w[p + 1] = ez * i; w[p + 2] = -ey * j;
                return true;
            }
        }
    }
    return false;
}

enum class CommuteStatus { commuting, not_commuting, undecided };

inline const char* to_string(CommuteStatus s) {
    switch (s) {
        case CommuteStatus::commuting: return "commuting";
        case CommuteStatus::not_commuting: return "not-commuting";
        default: return "undecided";
    }
}

// Rewriting with free reduction under a budget first; the faithful action settles the rest.
inline CommuteStatus commutation_check(const BraidWord& u, const BraidWord& v, std::uint64_t seed = 1,
                                       int budget = 10000) {
    same_strands(u, v);
    Word c = u.letters;
    c.insert(c.end(), v.letters.begin(), v.letters.end());
    Word ui = invert(u.letters), vi = invert(v.letters);
    c.insert(c.end(), ui.begin(), ui.end());
    c.insert(c.end(), vi.begin(), vi.end());
    c = free_reduce(c);
    std::mt19937_64 rng(seed);
    Word best = c;
    for (int step = 0; step < budget && !c.empty(); ++step) {
        random_braid_move(c, rng);
        c = free_reduce(c);
        if (c.size() < best.size()) best = c;
        if (c.size() > best.size() + 8) c = best;
    }
    if (c.empty()) return CommuteStatus::commuting;
    auto t = braid_is_trivial(BraidWord{u.strands, c});
    if (!t) return CommuteStatus::undecided;
    return *t ? CommuteStatus::commuting : CommuteStatus::not_commuting;
}

// Letters of a mixed word: Artin letters, or a surface loop carried by one strand.
struct MixedLetter {
    enum Kind { artin, surface } kind = artin;
    int gen = 1;     // Artin index, or surface generator code (a_i = 2i-1, b_i = 2i)
    int sign = 1;
    int strand = 0;  // 1-based strand for surface letters
};

struct MixedBraidWord {
    int strands = 1;
    std::vector<MixedLetter> letters;
};

inline MixedBraidWord mixed_from_artin(const BraidWord& b) {
    MixedBraidWord m{b.strands, {}};
    for (Letter l : b.letters) m.letters.push_back({MixedLetter::artin, std::abs(l), l > 0 ? 1 : -1, 0});
    return m;
}

inline MixedBraidWord invert(const MixedBraidWord& m) {
    MixedBraidWord r{m.strands, {m.letters.rbegin(), m.letters.rend()}};
    for (auto& l : r.letters) l.sign = -l.sign;
    return r;
}

inline void check_mixed(const MixedBraidWord& m) {
    for (const auto& l : m.letters) {
        if (l.kind == MixedLetter::artin && (l.gen < 1 || l.gen >= m.strands))
            throw std::invalid_argument("Artin letter out of range");
        if (l.kind == MixedLetter::surface && (l.strand < 1 || l.strand > m.strands || l.gen < 1))
            throw std::invalid_argument("surface letter with bad strand tag");
    }
}

}  // namespace ggqm
