#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ggqm/hyperbolic.hpp"
#include "ggqm/rng.hpp"
#include "ggqm/surface_group.hpp"

namespace ggqm {

enum class SurfaceKind { disc, annulus, torus, genus2 };

struct SurfaceModel {
    SurfaceKind kind = SurfaceKind::disc;
    int genus = 0;
    double total_area = M_PI;
    double inner_radius = 0.0;  // annulus only
    std::vector<std::string> generator_labels;

    bool planar() const { return kind == SurfaceKind::disc || kind == SurfaceKind::annulus; }
    bool closed() const { return kind == SurfaceKind::torus || kind == SurfaceKind::genus2; }
};

inline SurfaceModel disc_model() { return {SurfaceKind::disc, 0, M_PI, 0.0, {}}; }
inline SurfaceModel annulus_model(double inner = 0.5) {
    return {SurfaceKind::annulus, 0, M_PI * (1 - inner * inner), inner, {}};
}
inline SurfaceModel torus_model() { return {SurfaceKind::torus, 1, 1.0, 0.0, {"a1", "b1"}}; }
inline SurfaceModel genus2_model() { return {SurfaceKind::genus2, 2, 4 * M_PI, 0.0, {"a1", "b1", "a2", "b2"}}; }

inline SurfaceModel make_model(const std::string& name) {
    if (name == "disc") return disc_model();
    if (name == "annulus") return annulus_model();
    if (name == "torus") return torus_model();
    if (name == "genus2") return genus2_model();
    throw std::invalid_argument("unknown surface '" + name + "'");
}

inline std::string model_name(const SurfaceModel& m) {
    switch (m.kind) {
        case SurfaceKind::disc: return "disc";
        case SurfaceKind::annulus: return "annulus";
        case SurfaceKind::torus: return "torus";
        default: return "genus2";
    }
}

// Chart coordinates: plane for disc/annulus, [0,1)^2 for the torus, Poincare disc inside the octagon.
struct Point {
    double x = 0.0, y = 0.0;
    cplx z() const { return {x, y}; }
};

inline Point from_complex(cplx z) { return {z.real(), z.imag()}; }

inline bool in_domain(const SurfaceModel& m, Point p, double tol = 1e-12) {
    switch (m.kind) {
        case SurfaceKind::disc: return std::hypot(p.x, p.y) < 1.0;
        case SurfaceKind::annulus: {
            double r = std::hypot(p.x, p.y);
            return r > m.inner_radius && r < 1.0;
        }
        case SurfaceKind::torus: return p.x >= 0 && p.x < 1 && p.y >= 0 && p.y < 1;
        default: return octagon().contains(p.z(), tol);
    }
}

inline void require_in_domain(const SurfaceModel& m, Point p) {
    if (!in_domain(m, p, 1e-9))
        throw std::invalid_argument("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                    ") outside the " + model_name(m) + " domain");
}

inline double wrap01(double v) {
    v -= std::floor(v);
    return v >= 1.0 ? 0.0 : v;
}

// model distance between chart points (torus: flat distance mod 1; genus2: in the cover, same copy)
inline double chart_distance(const SurfaceModel& m, Point p, Point q) {
    if (m.kind == SurfaceKind::torus) {
        double dx = std::remainder(p.x - q.x, 1.0), dy = std::remainder(p.y - q.y, 1.0);
        return std::hypot(dx, dy);
    }
    if (m.kind == SurfaceKind::genus2) return hyp_distance(p.z(), q.z());
    return std::hypot(p.x - q.x, p.y - q.y);
}

struct GeodesicPath {
    SurfaceKind kind = SurfaceKind::disc;
    Point from, to;
    double length = 0.0;
    // lifted endpoint: torus -> to + (shift_x, shift_y); genus2 -> deck(to)
    int shift_x = 0, shift_y = 0;
    Word deck;
    Mobius deck_map;

    // cover coordinates at parameter s in [0,1]
    cplx cover_at(double s) const {
        switch (kind) {
            case SurfaceKind::genus2: return geodesic_point(from.z(), deck_map(to.z()), s);
            case SurfaceKind::torus: {
                double ex = to.x + shift_x, ey = to.y + shift_y;
                return {from.x + s * (ex - from.x), from.y + s * (ey - from.y)};
            }
            case SurfaceKind::annulus: {
                double r0 = std::hypot(from.x, from.y), r1 = std::hypot(to.x, to.y);
                double a0 = std::atan2(from.y, from.x);
                double da = std::remainder(std::atan2(to.y, to.x) - a0, 2 * M_PI);
                // antipodal tie: the reverse path must run back the same way
                if (std::abs(da) == M_PI)
                    da = std::make_pair(from.x, from.y) < std::make_pair(to.x, to.y) ? M_PI : -M_PI;
                return std::polar(r0 + s * (r1 - r0), a0 + s * da);
            }
            default: return {from.x + s * (to.x - from.x), from.y + s * (to.y - from.y)};
        }
    }

    // chart coordinates at parameter s
    Point at(double s) const {
        if (s <= 0) return from;
        if (s >= 1) return to;
        cplx c = cover_at(s);
        if (kind == SurfaceKind::torus) return {wrap01(c.real()), wrap01(c.imag())};
        if (kind == SurfaceKind::genus2) return from_complex(octagon().reduce(c));
        return from_complex(c);
    }
};

namespace detail {

inline const std::vector<Octagon::Tile>& near_tiles() {
    static const std::vector<Octagon::Tile> tiles = [] {
        auto t = octagon().tiles_within(4 * octagon().circumradius() + 0.05);
        std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
            return a.center_distance < b.center_distance;
        });
        return t;
    }();
    return tiles;
}

inline bool shortlex_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

// nearest lift H q of q to p; ties by shortlex on the deck word
inline const Octagon::Tile& nearest_lift(cplx p, cplx q) {
    const auto& tiles = near_tiles();
    double bound = hyp_norm(p) + hyp_distance(p, q) + hyp_norm(q) + 1e-9;
    const Octagon::Tile* best = &tiles.front();
    double bd = hyp_distance(p, q);
    for (const auto& t : tiles) {
        if (t.center_distance > bound) break;
        double d = hyp_distance(p, t.g(q));
        if (d < bd - 1e-12 || (std::abs(d - bd) <= 1e-12 && shortlex_less(t.word, best->word))) {
            bd = d;
            best = &t;
        }
    }
    return *best;
}

}  // namespace detail

// Canonical arc: shortest lift, ties broken by shortlex deck word; the same arc serves (x,y) and (y,x).
inline GeodesicPath geodesic(Point x, Point y, const SurfaceModel& m) {
    require_in_domain(m, x);
    require_in_domain(m, y);
    GeodesicPath g;
    g.kind = m.kind;
    g.from = x;
    g.to = y;
    switch (m.kind) {
        case SurfaceKind::disc: g.length = std::hypot(y.x - x.x, y.y - x.y); break;
        case SurfaceKind::annulus: {
            // polar interpolation: canonical arc in the annulus, length by quadrature
            const int N = 64;
            cplx prev = g.cover_at(0);
            for (int k = 1; k <= N; ++k) {
                cplx c = g.cover_at(static_cast<double>(k) / N);
                g.length += std::abs(c - prev);
                prev = c;
            }
            break;
        }
        case SurfaceKind::torus: {
            double best = 1e300;
            for (int i = -1; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j) {
                    double d = std::hypot(y.x + i - x.x, y.y + j - x.y);
                    if (d < best - 1e-15) {
                        best = d;
                        g.shift_x = i;
                        g.shift_y = j;
                    }
                }
            g.length = best;
            break;
        }
        case SurfaceKind::genus2: {
            bool swap = std::abs(y.z()) < std::abs(x.z()) ||
                        (std::abs(y.z()) == std::abs(x.z()) && std::make_pair(y.x, y.y) < std::make_pair(x.x, x.y));
            if (!swap) {
                const auto& t = detail::nearest_lift(x.z(), y.z());
                g.deck = t.word;
                g.deck_map = t.g;
            } else {
                const auto& t = detail::nearest_lift(y.z(), x.z());
                g.deck = octagon().dehn().reduce(invert(t.word));
                g.deck_map = t.g.inverse();
            }
            g.length = hyp_distance(x.z(), g.deck_map(y.z()));
            break;
        }
    }
    return g;
}

inline Point sample_point(const SurfaceModel& m, Rng& rng) {
    switch (m.kind) {
        case SurfaceKind::disc: {
            double r = std::sqrt(rng.uniform()), a = 2 * M_PI * rng.uniform();
            return {r * std::cos(a), r * std::sin(a)};
        }
        case SurfaceKind::annulus: {
            double r2 = m.inner_radius * m.inner_radius;
            double r = std::sqrt(r2 + (1 - r2) * rng.uniform()), a = 2 * M_PI * rng.uniform();
            return {r * std::cos(a), r * std::sin(a)};
        }
        case SurfaceKind::torus: return {rng.uniform(), rng.uniform()};
        default: {
            const auto& o = octagon();
            double ch = std::cosh(o.circumradius());
            for (int k = 0; k < 100000; ++k) {
                double rho = std::acosh(1 + rng.uniform() * (ch - 1));
                double a = 2 * M_PI * rng.uniform();
                cplx z = std::polar(std::tanh(rho / 2), a);
                if (o.contains(z, 0.0)) return from_complex(z);
            }
            throw std::runtime_error("octagon sampling failed");
        }
    }
}

inline constexpr double coincidence_tolerance = 1e-9;

// n area-uniform points, pairwise distinct; 'inject' lets tests force a coincidence on the first draw
inline std::vector<Point> sample_configuration(const SurfaceModel& m, int n, Rng& rng, int retry_budget = 1000,
                                               const std::vector<Point>* inject = nullptr) {
    if (n < 1) throw std::invalid_argument("configuration needs n >= 1");
    for (int attempt = 0; attempt < retry_budget; ++attempt) {
        std::vector<Point> c;
        if (attempt == 0 && inject)
            c = *inject;
        else
            for (int i = 0; i < n; ++i) c.push_back(sample_point(m, rng));
        bool ok = static_cast<int>(c.size()) == n;
        for (int i = 0; ok && i < n; ++i)
            for (int j = i + 1; ok && j < n; ++j)
                if (chart_distance(m, c[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(j)]) < coincidence_tolerance)
                    ok = false;
        if (ok) return c;
    }
    throw std::runtime_error("configuration sampling exceeded its retry budget");
}

struct LiftResult {
    std::vector<cplx> cover;  // lifted samples
    Word deck;                // freely reduced
};

struct StepTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double lift_step_bound(const SurfaceModel& m) {
    return m.kind == SurfaceKind::genus2 ? 0.5 * octagon().inradius() : 0.25;
}

// Lift a sampled chart path starting in the base copy, recording the side pairings crossed.
inline LiftResult lift_and_track(const std::vector<Point>& path, const SurfaceModel& m) {
    LiftResult r;
    if (path.empty()) return r;
    double bound = lift_step_bound(m);
    switch (m.kind) {
        case SurfaceKind::torus: {
            int sx = 0, sy = 0;
            r.cover.push_back(path[0].z());
            for (std::size_t k = 1; k < path.size(); ++k) {
                double px = path[k - 1].x, py = path[k - 1].y;
                int bi = 0, bj = 0;
                double bd = 1e300;
                for (int i = -1; i <= 1; ++i)
                    for (int j = -1; j <= 1; ++j) {
                        double d = std::hypot(path[k].x + i - px, path[k].y + j - py);
                        if (d < bd) { bd = d; bi = i; bj = j; }
                    }
                if (bd > bound) throw StepTooLarge("lift step too large on torus");
                // crossing x = 1 to the right wraps chart x down: shift i = +1
                for (int t = 0; t < std::abs(bi); ++t) r.deck.push_back(bi > 0 ? 1 : -1);
                for (int t = 0; t < std::abs(bj); ++t) r.deck.push_back(bj > 0 ? 2 : -2);
                sx += bi;
                sy += bj;
                r.cover.push_back({path[k].x + sx, path[k].y + sy});
            }
            r.deck = free_reduce(r.deck);
            return r;
        }
        case SurfaceKind::genus2: {
            const auto& tiles = detail::near_tiles();
            double adj = 2 * octagon().circumradius() + 1e-6;
            Mobius G;
            r.cover.push_back(path[0].z());
            for (std::size_t k = 1; k < path.size(); ++k) {
                cplx p = path[k - 1].z(), q = path[k].z();
                const Octagon::Tile* best = nullptr;
                double bd = 1e300;
                for (const auto& t : tiles) {
                    if (t.center_distance > adj) break;
                    double d = hyp_distance(p, t.g(q));
                    if (d < bd) { bd = d; best = &t; }
                }
                if (bd > bound) throw StepTooLarge("lift step too large on genus-2 surface");
                r.deck.insert(r.deck.end(), best->word.begin(), best->word.end());
                G = G * best->g;
                r.cover.push_back(G(q));
            }
            r.deck = free_reduce(r.deck);
            return r;
        }
        default:
            for (const auto& p : path) r.cover.push_back(p.z());
            return r;
    }
}

}  // namespace ggqm
