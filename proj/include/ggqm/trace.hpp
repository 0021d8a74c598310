#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/braid.hpp"
#include "ggqm/dynamics.hpp"
#include "ggqm/surface.hpp"
#include "ggqm/surface_group.hpp"

namespace ggqm {

struct TraceCollision : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateProjection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceOptions {
    double max_step = 0.05;        // planar / torus displacement bound per sample
    double hyperbolic_step = 0.3;  // genus-2 cover displacement bound per sample
    double pair_fraction = 0.3;    // step <= fraction of the closest pair distance
    double density = 1.0;          // multiplies sampling density
    double min_dt = 1e-10;
    int angle_retries = 8;
};

// Basepoint configuration in a small disc away from the usual supports.
inline std::vector<Point> default_basepoints(const SurfaceModel& m, int n) {
    std::vector<Point> z;
    for (int k = 0; k < n; ++k) {
        double off = (k - (n - 1) / 2.0);
        switch (m.kind) {
            case SurfaceKind::disc: z.push_back({0.04 * off, -0.93}); break;
            case SurfaceKind::annulus: z.push_back({0.04 * off, -0.97}); break;
            case SurfaceKind::torus: z.push_back({0.02 + 0.01 * (k + 1), 0.02}); break;
            default: z.push_back({0.02 * off, 0.0}); break;
        }
    }
    return z;
}

namespace detail {

inline double step_bound(const SurfaceModel& m, const TraceOptions& o) {
    return (m.kind == SurfaceKind::genus2 ? o.hyperbolic_step : o.max_step) / o.density;
}

// cover displacement from a to b (b continues a)
inline double displacement(const SurfaceModel& m, const FlowState& a, const FlowState& b) {
    switch (m.kind) {
        case SurfaceKind::torus: return std::hypot(b.p.x + b.sx - a.p.x - a.sx, b.p.y + b.sy - a.p.y - a.sy);
        case SurfaceKind::genus2: {
            Word delta(b.deck.begin() + static_cast<long>(std::min(a.deck.size(), b.deck.size())), b.deck.end());
            if (b.deck.size() < a.deck.size() ||
                !std::equal(a.deck.begin(), a.deck.end(), b.deck.begin()))
                throw std::logic_error("deck history is not a continuation");
            return hyp_distance(a.p.z(), octagon().element(delta)(b.p.z()));
        }
        default: return std::hypot(b.p.x - a.p.x, b.p.y - a.p.y);
    }
}

inline double min_pair_distance(const SurfaceModel& m, const std::vector<FlowState>& s) {
    double d = 1e300;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) d = std::min(d, chart_distance(m, s[i].p, s[j].p));
    return d;
}

// state at parameter u of the geodesic from the chart point of 'start' to 'target'
inline FlowState geodesic_state(const SurfaceModel& m, const FlowState& start, const GeodesicPath& g, double u) {
    FlowState s = start;
    if (u >= 1.0) {
        s.p = g.to;
        if (m.kind == SurfaceKind::genus2) s.deck.insert(s.deck.end(), g.deck.begin(), g.deck.end());
        if (m.kind == SurfaceKind::torus) {
            s.sx += g.shift_x;
            s.sy += g.shift_y;
        }
        return s;
    }
    if (u <= 0.0) return s;
    cplx c = g.cover_at(u);
    if (m.kind == SurfaceKind::genus2) {
        s.p = from_complex(octagon().reduce(c, &s.deck));
    } else if (m.kind == SurfaceKind::torus) {
        detail::wrap_torus(s, c.real(), c.imag());
    } else {
        s.p = from_complex(c);
    }
    return s;
}

template <class Tracker>
void step_adaptively(const SurfaceModel& m, const TraceOptions& o, std::vector<FlowState>& cur, Tracker& tr,
                     double span, const std::function<std::vector<FlowState>(const std::vector<FlowState>&, double, double)>& move,
                     double t_offset, double t_scale) {
    double bound = step_bound(m, o);
    double u = 0, dt = span / 8;
    double dt_max = span / 4;
    while (u < span) {
        double tr_dt = std::min(dt, span - u);
        if (span - u - tr_dt < 1e-14 * std::max(1.0, span)) tr_dt = span - u;
        auto next = move(cur, u, u + tr_dt);
        double disp = 0;
        for (std::size_t i = 0; i < cur.size(); ++i) disp = std::max(disp, displacement(m, cur[i], next[i]));
        double lim = bound;
        if (cur.size() > 1) {
            double pd = std::min(min_pair_distance(m, cur), min_pair_distance(m, next));
            if (pd < coincidence_tolerance) throw TraceCollision("configuration points collide during the isotopy");
            lim = std::min(lim, o.pair_fraction * pd);
        }
        if (disp > lim) {
            dt = tr_dt / 2;
            if (dt < o.min_dt) throw TraceCollision("step size underflow while tracing (near collision)");
            continue;
        }
        u += tr_dt;
        cur = std::move(next);
        tr.feed(cur, t_offset + t_scale * u);
        dt = std::min(2 * tr_dt, dt_max);
    }
}

template <class Tracker>
void run_geodesics(const SurfaceModel& m, const TraceOptions& o, std::vector<FlowState>& cur, Tracker& tr,
                   const std::vector<Point>& targets, double t_offset) {
    std::vector<GeodesicPath> paths;
    for (std::size_t i = 0; i < cur.size(); ++i) paths.push_back(geodesic(cur[i].p, targets[i], m));
    std::vector<FlowState> start = cur;
    step_adaptively(m, o, cur, tr, 1.0,
                    [&](const std::vector<FlowState>&, double, double u1) {
                        std::vector<FlowState> out;
                        for (std::size_t i = 0; i < start.size(); ++i) out.push_back(geodesic_state(m, start[i], paths[i], u1));
                        return out;
                    },
                    t_offset, 1.0 / 3.0);
}

template <class Tracker>
void run_isotopy(const SurfaceModel& m, const TraceOptions& o, std::vector<FlowState>& cur, Tracker& tr,
                 const Isotopy& iso, double t_offset, double t_scale) {
    double T = iso.duration();
    if (T <= 0) return;
    step_adaptively(m, o, cur, tr, T,
                    [&](const std::vector<FlowState>& c, double u0, double u1) {
                        std::vector<FlowState> out = c;
                        for (auto& s : out) advance(iso, s, u0, u1);
                        return out;
                    },
                    t_offset, t_scale);
}

}  // namespace detail

// Walk the loops of f^p for every p in 'powers' (sorted ascending), sharing the common prefix.
// sink(p, tracker_after_closing, closing_states)
template <class Tracker, class Sink>
void walk_loops(const Isotopy& iso, const SurfaceModel& m, const std::vector<Point>& z, const std::vector<Point>& x,
                const std::vector<int>& powers, const TraceOptions& o, Tracker tracker, Sink&& sink) {
    if (z.size() != x.size()) throw std::invalid_argument("basepoints and configuration differ in size");
    std::vector<FlowState> cur;
    for (const auto& p : z) cur.push_back({p, {}, 0, 0});
    tracker.feed(cur, 0.0);
    detail::run_geodesics(m, o, cur, tracker, x, 0.0);
    int pmax = powers.empty() ? 1 : powers.back();
    std::size_t next = 0;
    for (int rep = 1; rep <= pmax; ++rep) {
        double off = 1.0 / 3.0 + (rep - 1) / (3.0 * pmax);
        double T = iso.duration();
        detail::run_isotopy(m, o, cur, tracker, iso, off, T > 0 ? 1.0 / (3.0 * pmax * T) : 0.0);
        while (next < powers.size() && powers[next] == rep) {
            Tracker t2 = tracker;
            std::vector<FlowState> c2 = cur;
            detail::run_geodesics(m, o, c2, t2, z, 2.0 / 3.0);
            sink(rep, t2, c2);
            ++next;
        }
    }
    if (powers.empty()) {
        detail::run_geodesics(m, o, cur, tracker, z, 2.0 / 3.0);
        sink(1, tracker, cur);
    }
}

struct CrossingEvent {
    double t = 0;
    int strand_a = 0, strand_b = 0;  // 0-based strand ids
    int generator = 0;               // signed Artin letter
};

// Sweep of the projection onto a direction; emits Artin letters at crossing events.
class BraidSweep {
public:
    BraidSweep(int n, double angle) : n_(n), c_(std::cos(angle)), s_(std::sin(angle)) {}

    void feed(const std::vector<FlowState>& st, double t) {
        std::vector<Point> p;
        for (const auto& s : st) p.push_back(s.p);
        feed_points(p, t);
    }

    void feed_points(const std::vector<Point>& p, double t) {
        std::vector<double> u(p.size()), v(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            u[i] = p[i].x * c_ + p[i].y * s_;
            v[i] = -p[i].x * s_ + p[i].y * c_;
        }
        if (last_u_.empty()) {
            order_.resize(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) order_[i] = static_cast<int>(i);
            std::sort(order_.begin(), order_.end(), [&](int a, int b) { return u[static_cast<std::size_t>(a)] < u[static_cast<std::size_t>(b)]; });
            for (std::size_t k = 1; k < order_.size(); ++k)
                if (std::abs(u[static_cast<std::size_t>(order_[k])] - u[static_cast<std::size_t>(order_[k - 1])]) < 1e-12)
                    throw DegenerateProjection("basepoints share a projection coordinate");
            start_order_ = order_;
        } else {
            process(u, v, t);
        }
        last_u_ = u;
        last_v_ = v;
        last_t_ = t;
    }

    const Word& word() const { return word_; }
    const std::vector<int>& order() const { return order_; }
    const std::vector<int>& start_order() const { return start_order_; }
    const std::vector<CrossingEvent>& events() const { return events_; }
    void keep_events(bool k) { keep_events_ = k; }

private:
    void process(const std::vector<double>& u, const std::vector<double>& v, double t) {
        struct Ev {
            double tau;
            int i, j;
        };
        std::vector<Ev> evs;
        std::size_t n = u.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double d0 = last_u_[i] - last_u_[j], d1 = u[i] - u[j];
                if (d1 == 0.0) throw DegenerateProjection("sample lands on a crossing");
                if ((d0 < 0) != (d1 < 0)) evs.push_back({d0 / (d0 - d1), static_cast<int>(i), static_cast<int>(j)});
            }
        if (evs.empty()) return;
        std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.tau < b.tau; });
        for (std::size_t k = 1; k < evs.size(); ++k)
            if (evs[k].tau - evs[k - 1].tau < 1e-12) {
                const Ev& a = evs[k - 1];
                const Ev& b = evs[k];
                if (a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j)
                    throw DegenerateProjection("simultaneous crossings share a strand");
            }
        std::vector<int> pos(n);
        for (std::size_t k = 0; k < n; ++k) pos[static_cast<std::size_t>(order_[k])] = static_cast<int>(k);
        for (const auto& e : evs) {
            int pi = pos[static_cast<std::size_t>(e.i)], pj = pos[static_cast<std::size_t>(e.j)];
            if (std::abs(pi - pj) != 1) throw DegenerateProjection("crossing between non-adjacent strands");
            int left = pi < pj ? e.i : e.j, right = pi < pj ? e.j : e.i;
            auto L = static_cast<std::size_t>(left), R = static_cast<std::size_t>(right);
            double vl = last_v_[L] + e.tau * (v[L] - last_v_[L]);
            double vr = last_v_[R] + e.tau * (v[R] - last_v_[R]);
            if (std::abs(vl - vr) < 1e-12) throw DegenerateProjection("strands meet in the projection");
            int k = std::min(pi, pj) + 1;
            Letter l = vl < vr ? k : -k;
            if (!word_.empty() && word_.back() == -l)
                word_.pop_back();
            else
                word_.push_back(l);
            if (keep_events_) events_.push_back({last_t_ + e.tau * (t - last_t_), left, right, l});
            std::swap(order_[static_cast<std::size_t>(pi)], order_[static_cast<std::size_t>(pj)]);
            pos[static_cast<std::size_t>(e.i)] = pj;
            pos[static_cast<std::size_t>(e.j)] = pi;
        }
    }

    int n_;
    double c_, s_;
    std::vector<int> order_, start_order_;
    std::vector<double> last_u_, last_v_;
    double last_t_ = 0;
    Word word_;
    std::vector<CrossingEvent> events_;
    bool keep_events_ = false;
};

inline double projection_angle(int attempt) { return 0.0137 + attempt * 0.7390851332151607; }

struct TracedLoop {
    SurfaceModel model;
    std::vector<Point> basepoints, config;
    std::vector<double> times;                  // common grid over [0,1]
    std::vector<std::vector<Point>> paths;      // per strand, chart samples
    std::vector<Word> deck;                     // per strand bookkeeping from the flow (genus 2)
    std::vector<std::pair<int, int>> shifts;    // per strand (torus)
    int power = 1;
};

namespace detail {

struct Recorder {
    TracedLoop* loop;
    void feed(const std::vector<FlowState>& st, double t) {
        loop->times.push_back(t);
        if (loop->paths.empty()) loop->paths.resize(st.size());
        for (std::size_t i = 0; i < st.size(); ++i) loop->paths[i].push_back(st[i].p);
    }
};

}  // namespace detail

inline TracedLoop build_loops(const Isotopy& iso, const std::vector<Point>& config, const SurfaceModel& m,
                              const TraceOptions& o = {}, std::optional<std::vector<Point>> basepoints = std::nullopt,
                              int reps = 1) {
    for (const auto& p : config) require_in_domain(m, p);
    TracedLoop loop;
    loop.model = m;
    loop.config = config;
    loop.basepoints = basepoints ? *basepoints : default_basepoints(m, static_cast<int>(config.size()));
    loop.power = reps;
    for (std::size_t i = 0; i < config.size(); ++i)
        for (std::size_t j = i + 1; j < config.size(); ++j)
            if (chart_distance(m, config[i], config[j]) < coincidence_tolerance)
                throw TraceCollision("configuration points coincide");
    detail::Recorder rec{&loop};
    walk_loops(iso, m, loop.basepoints, config, {reps}, o, rec, [&](int, detail::Recorder& r, const std::vector<FlowState>& fin) {
        for (const auto& s : fin) {
            loop.deck.push_back(free_reduce(s.deck));
            loop.shifts.push_back({s.sx, s.sy});
        }
        (void)r;
    });
    return loop;
}

struct BraidExtraction {
    BraidWord braid;
    std::vector<CrossingEvent> events;
    double angle = 0;
};

inline BraidExtraction extract_braid_detailed(const TracedLoop& loop, int max_attempts = 8) {
    if (!loop.model.planar()) throw std::invalid_argument("braid extraction needs a planar model");
    int n = static_cast<int>(loop.paths.size());
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        double ang = projection_angle(attempt);
        try {
            BraidSweep sw(n, ang);
            sw.keep_events(true);
            std::vector<Point> pts(static_cast<std::size_t>(n));
            for (std::size_t k = 0; k < loop.times.size(); ++k) {
                for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = loop.paths[static_cast<std::size_t>(i)][k];
                sw.feed_points(pts, loop.times[k]);
            }
            return {BraidWord{std::max(n, 1), free_reduce(sw.word())}, sw.events(), ang};
        } catch (const DegenerateProjection&) {
        }
    }
    throw DegenerateProjection("unresolvable tangency after perturbation budget");
}

inline BraidWord extract_braid(const TracedLoop& loop) { return extract_braid_detailed(loop).braid; }

// winding of a closed planar loop around the origin
inline int winding_number(const std::vector<Point>& path, Point c = {0, 0}) {
    double a = 0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        double a0 = std::atan2(path[k - 1].y - c.y, path[k - 1].x - c.x);
        double a1 = std::atan2(path[k].y - c.y, path[k].x - c.x);
        a += std::remainder(a1 - a0, 2 * M_PI);
    }
    return static_cast<int>(std::lround(a / (2 * M_PI)));
}

// Reduced pi1 word per strand, from the sampled chart paths.
inline std::vector<SurfaceLoopWord> extract_pi1(const TracedLoop& loop) {
    std::vector<SurfaceLoopWord> out;
    const auto& m = loop.model;
    for (const auto& path : loop.paths) {
        switch (m.kind) {
            case SurfaceKind::torus: out.push_back(dehn_reduce(SurfaceLoopWord{1, lift_and_track(path, m).deck})); break;
            case SurfaceKind::genus2: out.push_back({2, octagon().dehn().reduce(lift_and_track(path, m).deck)}); break;
            case SurfaceKind::annulus: {
                int w = winding_number(path);
                out.push_back({1, power(Word{1}, w)});
                break;
            }
            default: out.push_back({0, {}});
        }
    }
    return out;
}

inline bool contains_power(const std::vector<int>& powers, int p) {
    return std::find(powers.begin(), powers.end(), p) != powers.end();
}

struct NullTracker {
    void feed(const std::vector<FlowState>&, double) {}
};

// Braid words of f^p for each p in powers on a planar model, with projection retries.
inline std::vector<BraidWord> trace_braids(const Isotopy& iso, const SurfaceModel& m, const std::vector<Point>& z,
                                           const std::vector<Point>& x, const std::vector<int>& powers,
                                           const TraceOptions& o = {}) {
    int n = static_cast<int>(x.size());
    for (int attempt = 0; attempt < o.angle_retries; ++attempt) {
        try {
            std::vector<BraidWord> out;
            walk_loops(iso, m, z, x, powers, o, BraidSweep(n, projection_angle(attempt)),
                       [&](int, BraidSweep& sw, const std::vector<FlowState>&) {
                           out.push_back({std::max(n, 1), free_reduce(sw.word())});
                       });
            return out;
        } catch (const DegenerateProjection&) {
        }
    }
    throw DegenerateProjection("unresolvable tangency after perturbation budget");
}

// pi1 classes of f^p (n = 1) from the exact cover bookkeeping of the flow; no path sampling.
inline std::vector<SurfaceLoopWord> trace_pi1_exact(const Isotopy& iso, const SurfaceModel& m, Point z, Point x,
                                                    const std::vector<int>& powers) {
    if (!m.closed()) throw std::invalid_argument("exact pi1 tracing needs the torus or genus-2 model");
    std::vector<SurfaceLoopWord> out;
    GeodesicPath in = geodesic(z, x, m);
    FlowState s{x, in.deck, in.shift_x, in.shift_y};
    int pmax = powers.empty() ? 1 : powers.back();
    std::size_t next = 0;
    for (int rep = 1; rep <= pmax; ++rep) {
        advance(iso, s, 0, iso.duration());
        while (next < powers.size() && powers[next] == rep) {
            GeodesicPath back = geodesic(s.p, z, m);
            if (m.kind == SurfaceKind::torus) {
                int a = s.sx + back.shift_x, b = s.sy + back.shift_y;
                Word w = power(Word{1}, a);
                Word wb = power(Word{2}, b);
                w.insert(w.end(), wb.begin(), wb.end());
                out.push_back({1, w});
            } else {
                Word w = s.deck;
                w.insert(w.end(), back.deck.begin(), back.deck.end());
                out.push_back({2, octagon().dehn().reduce(w)});
            }
            ++next;
        }
        // keep the deck word short between powers
        if (m.kind == SurfaceKind::genus2) s.deck = octagon().dehn().reduce(s.deck);
    }
    return out;
}

enum class PointFlag { regular, critical_level, critical_point };

inline const char* to_string(PointFlag f) {
    switch (f) {
        case PointFlag::regular: return "regular";
        case PointFlag::critical_level: return "critical-level";
        default: return "critical-point";
    }
}

struct RegularityReport {
    std::vector<PointFlag> flags;
    std::vector<double> periods;                 // orbit period per point (inf for critical points)
    std::vector<std::vector<bool>> disjoint;     // level components pairwise disjoint
    std::vector<std::vector<Point>> orbits;      // traced level components
    bool all_regular() const {
        for (auto f : flags)
            if (f != PointFlag::regular) return false;
        return true;
    }
    bool all_disjoint() const {
        for (std::size_t i = 0; i < disjoint.size(); ++i)
            for (std::size_t j = 0; j < disjoint.size(); ++j)
                if (i != j && !disjoint[i][j]) return false;
        return true;
    }
};

struct RegularityOptions {
    double gradient_threshold = 1e-5;
    double level_tolerance = 1e-7;
    double step = 2e-3;
    double max_time = 200.0;
    double close_tolerance = 2e-3;
};

// Level-set regularity by gradient threshold, closed-orbit tracing and component comparison.
inline RegularityReport classify_regularity(const HamiltonianField& H, const std::vector<Point>& config,
                                            const RegularityOptions& o = {}) {
    const SurfaceModel& m = H.model();
    RegularityReport r;
    std::size_t n = config.size();
    r.flags.assign(n, PointFlag::regular);
    r.periods.assign(n, std::numeric_limits<double>::infinity());
    r.orbits.resize(n);
    HamiltonianSegment seg(H, o.step);
    for (std::size_t i = 0; i < n; ++i) {
        auto [u, v] = H.vector_field(config[i]);
        double g = std::hypot(u, v);
        if (g < o.gradient_threshold) {
            r.flags[i] = PointFlag::critical_point;
            r.orbits[i] = {config[i]};
            continue;
        }
        // follow the orbit until it returns; the step adapts to the speed
        FlowState s{config[i], {}, 0, 0};
        double t = 0, min_speed = g;
        bool left = false, closed = false;
        std::vector<Point>& orb = r.orbits[i];
        orb.push_back(config[i]);
        double prev_d = 0;
        while (t < o.max_time) {
            auto [a, b] = H.vector_field(s.p);
            double sp = std::hypot(a, b);
            min_speed = std::min(min_speed, sp);
            if (sp < o.gradient_threshold) break;
            double dt = std::min(o.step / sp, 0.05);
            seg.advance(s, dt);
            t += dt;
            orb.push_back(s.p);
            double d = chart_distance(m, s.p, config[i]);
            if (d > 4 * o.close_tolerance) left = true;
            if (left && d < o.close_tolerance && d > prev_d) {
                closed = true;
                break;
            }
            if (left && d < o.close_tolerance) {
                prev_d = d;
                continue;
            }
            prev_d = left && d < 4 * o.close_tolerance ? d : 1e300;
        }
        if (closed) {
            r.periods[i] = t;
        } else {
            r.flags[i] = PointFlag::critical_level;
        }
    }
    r.disjoint.assign(n, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (std::abs(H.value(config[i]) - H.value(config[j])) > o.level_tolerance) continue;
            double best = 1e300;
            for (const auto& q : r.orbits[i]) best = std::min(best, chart_distance(m, q, config[j]));
            if (best < 4 * o.close_tolerance) r.disjoint[i][j] = false;
        }
    return r;
}

struct AutonomousDecomposition {
    Word prefix, suffix;                 // boundary words a', a''
    std::vector<BraidWord> blocks;       // per-strand closed-orbit braids
    std::vector<int> exponents;          // full orbits completed
    std::vector<std::vector<CommuteStatus>> commutation;
    BraidWord reassembled;
};

// Orbit period of x under an autonomous closed-form or Hamiltonian isotopy (inf when x is fixed).
inline double orbit_period(const Isotopy& iso, Point x, const RegularityReport* rep, std::size_t index) {
    if (iso.pieces.empty()) return std::numeric_limits<double>::infinity();
    const auto& pc = iso.pieces[0];
    double rate = std::abs(pc.rate);
    if (auto rs = std::dynamic_pointer_cast<const RadialSegment>(pc.segment)) {
        double w = std::abs(rs->angular_speed(rs->distance(x))) * rate;
        if (!rs->in_support(x) || rs->distance(x) < 1e-12 || w < 1e-14) return std::numeric_limits<double>::infinity();
        return 2 * M_PI / w;
    }
    if (auto ts = std::dynamic_pointer_cast<const TwistSegment>(pc.segment)) {
        auto c = ts->coordinates(x);
        if (!c) return std::numeric_limits<double>::infinity();
        double w = std::abs(ts->chart().profile(c->x)) * rate;
        return w < 1e-14 ? std::numeric_limits<double>::infinity() : 1.0 / w;
    }
    if (rep && index < rep->periods.size()) return rep->periods[index] / rate;
    throw std::invalid_argument("orbit period unavailable for this isotopy");
}

// Blocks: strand i runs once around its closed orbit while the others wait at their points.
inline AutonomousDecomposition autonomous_decompose(const BraidWord& traced, const Isotopy& iso,
                                                    const std::vector<Point>& config, const RegularityReport& report,
                                                    int reps = 1, const TraceOptions& o = {},
                                                    std::optional<std::vector<Point>> basepoints = std::nullopt) {
    if (!iso.autonomous()) throw std::invalid_argument("decomposition needs an autonomous isotopy");
    for (auto f : report.flags)
        if (f == PointFlag::critical_level) throw std::invalid_argument("decomposition fails on non-regular configurations");
    const SurfaceModel& m = iso.model;
    int n = static_cast<int>(config.size());
    auto z = basepoints ? *basepoints : default_basepoints(m, n);
    AutonomousDecomposition d;
    double total = iso.duration() * reps;
    for (int i = 0; i < n; ++i) {
        auto ui = static_cast<std::size_t>(i);
        double T = orbit_period(iso, config[ui], &report, ui);
        if (!std::isfinite(T) || report.flags[ui] == PointFlag::critical_point) {
            d.blocks.push_back({n, {}});
            d.exponents.push_back(0);
            continue;
        }
        // isotopy that moves only strand i, for one period
        struct OneStrand : Segment {
            SegmentPtr inner;
            double rate;
            std::string kind() const override { return "one-strand"; }
            void advance(FlowState& s, double dt) const override { inner->advance(s, dt * rate); }
            bool in_support(Point p) const override { return inner->in_support(p); }
            std::optional<double> oscillation() const override { return inner->oscillation(); }
            const SurfaceModel& model() const override { return inner->model(); }
        };
        auto seg = std::make_shared<OneStrand>();
        seg->inner = iso.pieces[0].segment;
        seg->rate = iso.pieces[0].rate;
        Isotopy orbit{"orbit", m, {{seg, T, 1.0}}};
        // freeze the others: trace only strand i's motion, others fixed
        std::vector<FlowState> cur;
        for (const auto& p : z) cur.push_back({p, {}, 0, 0});
        BraidWord block{n, {}};
        for (int attempt = 0; attempt < o.angle_retries; ++attempt) {
            try {
                BraidSweep sw(n, projection_angle(attempt));
                std::vector<FlowState> c = cur;
                sw.feed(c, 0);
                detail::run_geodesics(m, o, c, sw, config, 0);
                std::vector<FlowState> before = c;
                detail::step_adaptively(m, o, c, sw, T,
                                        [&](const std::vector<FlowState>& s, double u0, double u1) {
                                            std::vector<FlowState> out = s;
                                            Isotopy one{"orbit", m, {{seg, T, 1.0}}};
                                            advance(one, out[ui], u0, u1);
                                            return out;
                                        },
                                        1.0 / 3.0, 1.0 / (3.0 * T));
                // close the orbit exactly at its start point
                c[ui].p = config[ui];
                detail::run_geodesics(m, o, c, sw, z, 2.0 / 3.0);
                block.letters = free_reduce(sw.word());
                break;
            } catch (const DegenerateProjection&) {
            }
        }
        (void)orbit;
        d.blocks.push_back(block);
        d.exponents.push_back(static_cast<int>(std::floor(total / T + 1e-9)));
    }
    Word prod;
    for (int i = 0; i < n; ++i) {
        Word b = power(d.blocks[static_cast<std::size_t>(i)].letters, d.exponents[static_cast<std::size_t>(i)]);
        prod.insert(prod.end(), b.begin(), b.end());
    }
    prod = free_reduce(prod);
    d.suffix = multiply(invert(prod), traced.letters);
    Word re = d.prefix;
    re.insert(re.end(), prod.begin(), prod.end());
    re.insert(re.end(), d.suffix.begin(), d.suffix.end());
    d.reassembled = {traced.strands, free_reduce(re)};
    d.commutation.assign(static_cast<std::size_t>(n), std::vector<CommuteStatus>(static_cast<std::size_t>(n), CommuteStatus::commuting));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto s = commutation_check(d.blocks[static_cast<std::size_t>(i)], d.blocks[static_cast<std::size_t>(j)],
                                       static_cast<std::uint64_t>(i * 131 + j));
            d.commutation[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
            d.commutation[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = s;
        }
    return d;
}

}  // namespace ggqm
