#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/words.hpp"

namespace ggqm {

struct SurfaceLoopWord {
    int genus = 2;
    Word letters;
};

inline std::string to_string(const SurfaceLoopWord& w) { return to_string(w.letters, Alphabet::surface); }

inline SurfaceLoopWord parse_surface_word(int genus, std::string_view text) {
    SurfaceLoopWord w{genus, parse_word(text, Alphabet::surface)};
    for (Letter l : w.letters)
        if (std::abs(l) > 2 * genus) throw std::invalid_argument("surface generator beyond genus");
    return w;
}

// a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1
inline Word surface_relator(int genus) {
    Word r;
    for (int i = 1; i <= genus; ++i) {
        int a = 2 * i - 1, b = 2 * i;
        r.insert(r.end(), {a, b, -a, -b});
    }
    return r;
}

inline int generator_code(const std::string& label, int genus) {
    if (label.size() < 2 || (label[0] != 'a' && label[0] != 'b'))
        throw std::invalid_argument("unknown generator label '" + label + "'");
    int idx = 0;
    try {
        idx = std::stoi(label.substr(1));
    } catch (...) {
        throw std::invalid_argument("unknown generator label '" + label + "'");
    }
    if (idx < 1 || idx > genus) throw std::invalid_argument("unknown generator label '" + label + "'");
    return label[0] == 'a' ? 2 * idx - 1 : 2 * idx;
}

class DehnReducer {
public:
    explicit DehnReducer(int genus) : genus_(genus) {
        if (genus < 2) throw std::invalid_argument("Dehn reduction needs genus >= 2");
        Word r = surface_relator(genus);
        len_ = static_cast<int>(r.size());
        for (const Word& base : {r, invert(r)})
            for (int s = 0; s < len_; ++s) {
                Word c(base.begin() + s, base.end());
                c.insert(c.end(), base.begin(), base.begin() + s);
                cyclic_.push_back(c);
            }
    }

    int genus() const { return genus_; }

    Word reduce(const Word& w0) const {
        Word w = free_reduce(w0);
        std::size_t i = 0;
        while (i < w.size()) {
            int best_len = 0;
            const Word* best = nullptr;
            for (const Word& c : cyclic_) {
                if (c[0] != w[i]) continue;
                int m = 0;
                while (m < len_ && i + static_cast<std::size_t>(m) < w.size() && w[i + static_cast<std::size_t>(m)] == c[static_cast<std::size_t>(m)]) ++m;
                if (m > best_len) { best_len = m; best = &c; }
            }
            if (2 * best_len > len_) {
                // piece -> inverse of the complementary piece of the relator
                Word rest(best->begin() + best_len, best->end());
                Word repl = invert(rest);
                Word nw(w.begin(), w.begin() + static_cast<long>(i));
                nw.insert(nw.end(), repl.begin(), repl.end());
                nw.insert(nw.end(), w.begin() + static_cast<long>(i) + best_len, w.end());
                w = free_reduce(nw);
                i = i > static_cast<std::size_t>(len_) ? i - static_cast<std::size_t>(len_) : 0;
            } else {
                ++i;
            }
        }
        return w;
    }

    bool is_trivial(const Word& w) const { return reduce(w).empty(); }

private:
    int genus_;
    int len_ = 0;
    std::vector<Word> cyclic_;
};

inline SurfaceLoopWord dehn_reduce(const SurfaceLoopWord& w) {
    if (w.genus == 1) {
        // abelian: canonical a1^m b1^n
        int m = 0, n = 0;
        for (Letter l : w.letters) (std::abs(l) == 1 ? m : n) += l > 0 ? 1 : -1;
        Word out;
        for (int k = 0; k < std::abs(m); ++k) out.push_back(m > 0 ? 1 : -1);
        for (int k = 0; k < std::abs(n); ++k) out.push_back(n > 0 ? 2 : -2);
        return {1, out};
    }
    return {w.genus, DehnReducer(w.genus).reduce(w.letters)};
}

inline int pi_count(const Word& w, int code) {
    int s = 0;
    for (Letter l : free_reduce(w))
        if (std::abs(l) == code) s += l > 0 ? 1 : -1;
    return s;
}

inline int pi_count(const SurfaceLoopWord& w, const std::string& label) {
    return pi_count(w.letters, generator_code(label, w.genus));
}

}  // namespace ggqm
