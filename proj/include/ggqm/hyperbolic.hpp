#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

#include "ggqm/surface_group.hpp"
#include "ggqm/words.hpp"

namespace ggqm {

using cplx = std::complex<double>;

// w -> (a w + b) / (c w + d), kept with determinant 1
struct Mobius {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }

    Mobius operator*(const Mobius& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }

    Mobius inverse() const { return {d, -b, -c, a}; }

    // distance of the matrix from +-identity
    double distance_to_identity() const {
        double p = std::abs(a - 1.0) + std::abs(b) + std::abs(c) + std::abs(d - 1.0);
        double m = std::abs(a + 1.0) + std::abs(b) + std::abs(c) + std::abs(d + 1.0);
        return std::min(p, m);
    }
};

inline Mobius rotation(double angle) {
    return {std::polar(1.0, angle / 2), 0.0, 0.0, std::polar(1.0, -angle / 2)};
}

// translation by hyperbolic distance along the real diameter toward +1
inline Mobius real_translation(double dist) {
    double t = std::tanh(dist / 2), k = 1.0 / std::sqrt(1 - t * t);
    return {k, k * t, k * t, k};
}

// disc automorphism taking z to 0
inline Mobius to_origin(cplx z) {
    double k = 1.0 / std::sqrt(1 - std::norm(z));
    return {k, -k * z, -k * std::conj(z), k};
}

inline double hyp_distance(cplx z, cplx w) {
    double r = std::abs(z - w) / std::abs(1.0 - std::conj(z) * w);
    return 2 * std::atanh(std::min(r, 1.0 - 1e-16));
}

inline double hyp_norm(cplx z) { return 2 * std::atanh(std::abs(z)); }

// point at hyperbolic fraction s of the geodesic from z to w
inline cplx geodesic_point(cplx z, cplx w, double s) {
    Mobius T = to_origin(z);
    cplx v = T(w);
    double r = std::abs(v);
    if (r == 0.0) return z;
    double D = 2 * std::atanh(r);
    cplx p = std::tanh(s * D / 2) * v / r;
    return T.inverse()(p);
}

// translation length and attracting/repelling fixed points on the boundary
struct Axis {
    cplx repelling, attracting;
    double length = 0.0;
};

inline Axis axis_of(const Mobius& m) {
    cplx tr = m.a + m.d;
    double t = std::abs(tr.real());
    if (t <= 2.0) throw std::invalid_argument("element is not hyperbolic");
    Axis ax;
    ax.length = 2 * std::acosh(t / 2);
    // fixed points of (a z + b)/(c z + d): c z^2 + (d - a) z - b = 0
    cplx disc = std::sqrt((m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c);
    cplx z1 = (m.a - m.d + disc) / (2.0 * m.c), z2 = (m.a - m.d - disc) / (2.0 * m.c);
    // derivative 1/(cz+d)^2 < 1 at the attracting point
    if (std::abs(m.c * z1 + m.d) > std::abs(m.c * z2 + m.d)) {
        ax.attracting = z1;
        ax.repelling = z2;
    } else {
        ax.attracting = z2;
        ax.repelling = z1;
    }
    ax.attracting /= std::abs(ax.attracting);
    ax.repelling /= std::abs(ax.repelling);
    return ax;
}

// Disc automorphism sending the oriented geodesic (e1 -> e2) onto (-1 -> +1),
// with the foot of the perpendicular from 'base' landing at 0.
inline Mobius normalize_geodesic(cplx e1, cplx e2, cplx base) {
    Mobius T = to_origin(base);
    cplx p1 = T(e1), p2 = T(e2);
    cplx s = p1 + p2;
    cplx foot = 0.0;
    if (std::abs(s) > 1e-14) {
        double half = std::abs(std::arg(p2 / p1)) / 2;
        foot = (1.0 / std::cos(half) - std::tan(half)) * s / std::abs(s);
    }
    Mobius F = to_origin(foot) * T;
    return rotation(-std::arg(F(e2))) * F;
}

class Octagon {
public:
    static constexpr int sides = 8;

    Octagon() {
        circumradius_ = std::acosh(1.0 / std::pow(std::tan(M_PI / 8), 2));
        inradius_ = std::acosh(1.0 / std::tan(M_PI / 8));
        double rv = std::tanh(circumradius_ / 2), rm = std::tanh(inradius_ / 2);
        for (int k = 0; k < sides; ++k) {
            vertex_[k] = std::polar(rv, -M_PI / 8 + k * M_PI / 4);
            double th = k * M_PI / 4;
            double cn = (1 + rm * rm) / (2 * rm), rho = (1 - rm * rm) / (2 * rm);
            center_[k] = std::polar(cn, th);
            radius_[k] = rho;
        }
        // side labels ccw from side 0: a b a^-1 b^-1 c d c^-1 d^-1
        const int partner[sides] = {2, 3, 0, 1, 6, 7, 4, 5};
        for (int k = 0; k < sides; ++k) {
            partner_[k] = partner[k];
            pairing_[k] = rotation(k * M_PI / 4) * real_translation(2 * inradius_) *
                          rotation(M_PI - partner[k] * M_PI / 4);
        }
        build_generators();
    }

    double circumradius() const { return circumradius_; }
    double inradius() const { return inradius_; }
    double area() const { return 4 * M_PI; }
    cplx vertex(int k) const { return vertex_[k]; }
    int partner(int k) const { return partner_[k]; }
    const Mobius& pairing(int k) const { return pairing_[k]; }
    const Word& pairing_word(int k) const { return pairing_word_[k]; }
    // a1, b1, a2, b2 by code 1..4
    const Mobius& generator(int code) const { return gen_[code - 1]; }

    Mobius element(const Word& w) const {
        Mobius m;
        for (Letter l : w) m = m * (l > 0 ? gen_[l - 1] : gen_[-l - 1].inverse());
        return m;
    }

    // positive when z lies beyond side k
    double violation(cplx z, int k) const { return radius_[k] - std::abs(z - center_[k]); }

    bool contains(cplx z, double tol = 1e-12) const {
        if (std::abs(z) >= 1.0) return false;
        for (int k = 0; k < sides; ++k)
            if (violation(z, k) > tol) return false;
        return true;
    }

    // Moves z into the octagon; returns the deck word g with z_original = g(z_new)
    // (letters appended to *deck).
    cplx reduce(cplx z, Word* deck = nullptr, Mobius* g = nullptr, double tol = 1e-12) const {
        for (int guard = 0; guard < 10000; ++guard) {
            int worst = -1;
            double v = tol;
            for (int k = 0; k < sides; ++k) {
                double x = violation(z, k);
                if (x > v) { v = x; worst = k; }
            }
            if (worst < 0) return z;
            z = pairing_[worst].inverse()(z);
            if (deck) deck->insert(deck->end(), pairing_word_[worst].begin(), pairing_word_[worst].end());
            if (g) *g = *g * pairing_[worst];
        }
        throw std::runtime_error("fundamental-domain reduction did not terminate");
    }

    struct Tile {
        Mobius g;
        Word word;
        double center_distance;
    };

    // deck elements whose tile center lies within 'radius' of the origin
    std::vector<Tile> tiles_within(double radius) const {
        std::vector<Tile> out;
        std::map<std::pair<long long, long long>, bool> seen;
        auto key = [](cplx z) {
            return std::make_pair(std::llround(z.real() * 1e9), std::llround(z.imag() * 1e9));
        };
        std::queue<Tile> q;
        q.push({Mobius{}, Word{}, 0.0});
        seen[key(0.0)] = true;
        while (!q.empty()) {
            Tile t = q.front();
            q.pop();
            if (t.center_distance <= radius) out.push_back(t);
            if (t.center_distance > radius + 2 * circumradius_) continue;
            for (int k = 0; k < sides; ++k) {
                Mobius g = t.g * pairing_[k];
                cplx c = g(0.0);
                auto kk = key(c);
                if (seen.count(kk)) continue;
                seen[kk] = true;
                Word w = t.word;
                w.insert(w.end(), pairing_word_[k].begin(), pairing_word_[k].end());
                q.push({g, dehn_.reduce(w), hyp_norm(c)});
            }
        }
        return out;
    }

    const DehnReducer& dehn() const { return dehn_; }

private:
    void build_generators() {
        // deck elements D_k with D_k(v0) = v_k, searched over short pairing words
        std::array<Mobius, sides> D;
        std::array<bool, sides> found{};
        struct Node { Mobius g; int depth; };
        std::vector<Node> layer{{Mobius{}, 0}};
        int remaining = sides;
        for (int depth = 0; depth <= 4 && remaining; ++depth) {
            for (const auto& n : layer) {
                cplx im = n.g(vertex_[0]);
                for (int k = 0; k < sides; ++k)
                    if (!found[k] && std::abs(im - vertex_[k]) < 1e-9) {
                        D[k] = n.g;
                        found[k] = true;
                        --remaining;
                    }
            }
            std::vector<Node> next;
            for (const auto& n : layer)
                for (int k = 0; k < sides; ++k) next.push_back({n.g * pairing_[k], depth + 1});
            layer.swap(next);
        }
        if (remaining) throw std::logic_error("octagon vertex identification failed");
        auto edge = [&](int k) { return D[k].inverse() * D[(k + 1) % sides]; };
        gen_ = {edge(0), edge(1), edge(4), edge(5)};
        // each pairing as a shortest word in the generators
        std::vector<std::pair<Word, Mobius>> frontier{{Word{}, Mobius{}}};
        std::array<bool, sides> have{};
        int left = sides;
        for (int len = 0; len <= 6 && left; ++len) {
            for (const auto& [w, m] : frontier)
                for (int k = 0; k < sides; ++k)
                    if (!have[k] && (pairing_[k].inverse() * m).distance_to_identity() < 1e-8) {
                        pairing_word_[k] = w;
                        have[k] = true;
                        --left;
                    }
            std::vector<std::pair<Word, Mobius>> next;
            for (const auto& [w, m] : frontier)
                for (int g = 1; g <= 4; ++g)
                    for (int s : {1, -1}) {
                        Letter l = s * g;
                        if (!w.empty() && w.back() == -l) continue;
                        Word nw = w;
                        nw.push_back(l);
                        next.push_back({nw, m * (s > 0 ? gen_[g - 1] : gen_[g - 1].inverse())});
                    }
            frontier.swap(next);
        }
        if (left) throw std::logic_error("side pairing words not found");
    }

    double circumradius_ = 0, inradius_ = 0;
    std::array<cplx, sides> vertex_{}, center_{};
    std::array<double, sides> radius_{};
    std::array<int, sides> partner_{};
    std::array<Mobius, sides> pairing_{};
    std::array<Word, sides> pairing_word_{};
    std::array<Mobius, 4> gen_{};
    DehnReducer dehn_{2};
};

inline const Octagon& octagon() {
    static const Octagon o;
    return o;
}

}  // namespace ggqm
