#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ggqm {

// A letter is a nonzero int: +g is generator g, -g its inverse.
using Letter = int;
using Word = std::vector<Letter>;

enum class Alphabet { braid, surface };

inline Word free_reduce(const Word& w) {
    Word out;
    out.reserve(w.size());
    for (Letter l : w) {
        if (!out.empty() && out.back() == -l)
            out.pop_back();
        else
            out.push_back(l);
    }
    return out;
}

inline Word invert(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (auto& l : out) l = -l;
    return out;
}

inline Word multiply(const Word& u, const Word& v) {
    Word out = u;
    out.insert(out.end(), v.begin(), v.end());
    return free_reduce(out);
}

inline Word power(const Word& w, int k) {
    Word base = k < 0 ? invert(w) : w;
    Word out;
    for (int i = 0; i < std::abs(k); ++i) out.insert(out.end(), base.begin(), base.end());
    return free_reduce(out);
}

// u w u^-1
inline Word conjugate(const Word& u, const Word& w) {
    Word out = u;
    out.insert(out.end(), w.begin(), w.end());
    Word ui = invert(u);
    out.insert(out.end(), ui.begin(), ui.end());
    return free_reduce(out);
}

// Strips a common prefix/inverse-suffix; returns the conjugator in *outer if given.
inline Word cyclic_reduce(const Word& w0, Word* outer = nullptr) {
    Word w = free_reduce(w0);
    std::size_t i = 0, j = w.size();
    while (j - i >= 2 && w[i] == -w[j - 1]) { ++i; --j; }
    if (outer) outer->assign(w.begin(), w.begin() + static_cast<long>(i));
    return Word(w.begin() + static_cast<long>(i), w.begin() + static_cast<long>(j));
}

inline int exponent_sum(const Word& w) {
    int s = 0;
    for (Letter l : w) s += l > 0 ? 1 : -1;
    return s;
}

// surface generators: a_i -> 2i-1, b_i -> 2i
inline std::string letter_name(Letter l, Alphabet a) {
    int g = std::abs(l);
    std::string s;
    if (a == Alphabet::braid)
        s = "s" + std::to_string(g);
    else
        s = std::string(g % 2 ? "a" : "b") + std::to_string((g + 1) / 2);
    if (l < 0) s += "^-1";
    return s;
}

inline std::string to_string(const Word& w, Alphabet a) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ' ';
        s += letter_name(w[i], a);
    }
    return s;
}

// Accepts "s1 s2^-1", "a1b1^-1", "s1^3", and band letters "A1,3" (expanded to Artin letters).
inline Word parse_word(std::string_view text, Alphabet a) {
    Word out;
    std::size_t i = 0;
    auto read_int = [&](bool allow_sign) {
        std::size_t start = i;
        if (allow_sign && i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start || (i == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
            throw std::invalid_argument("bad number in word: " + std::string(text));
        return std::stoi(std::string(text.substr(start, i - start)));
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '.') { ++i; continue; }
        Word piece;
        if (c == 'A' && a == Alphabet::braid) {
            ++i;
            int p = read_int(false);
            if (i >= text.size() || text[i] != ',') throw std::invalid_argument("band letter needs A<i>,<j>");
            ++i;
            int q = read_int(false);
            if (!(1 <= p && p < q)) throw std::invalid_argument("band letter needs i < j");
            // A_{p,q} = s_{q-1}..s_{p+1} s_p^2 s_{p+1}^-1..s_{q-1}^-1
            for (int k = q - 1; k > p; --k) piece.push_back(k);
            piece.push_back(p);
            piece.push_back(p);
            for (int k = p + 1; k < q; ++k) piece.push_back(-k);
        } else {
            int g = 0;
            if (a == Alphabet::braid) {
                if (c != 's' && c != 'S') throw std::invalid_argument("unexpected letter in braid word: " + std::string(1, c));
                ++i;
                g = read_int(false);
                if (g < 1) throw std::invalid_argument("braid generator index must be >= 1");
            } else {
                if (c != 'a' && c != 'b') throw std::invalid_argument("unexpected letter in surface word: " + std::string(1, c));
                ++i;
                int idx = read_int(false);
                if (idx < 1) throw std::invalid_argument("surface generator index must be >= 1");
                g = c == 'a' ? 2 * idx - 1 : 2 * idx;
            }
            piece.push_back(g);
        }
        int e = 1;
        if (i < text.size() && text[i] == '^') {
            ++i;
            e = read_int(true);
        }
        Word pw = power(piece, e);
        out.insert(out.end(), pw.begin(), pw.end());
    }
    return out;
}

}  // namespace ggqm
