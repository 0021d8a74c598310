#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/braid.hpp"
#include "ggqm/hamiltonian.hpp"
#include "ggqm/hyperbolic.hpp"
#include "ggqm/surface.hpp"

namespace ggqm {

// A moving point: chart position plus the cover bookkeeping accumulated so far.
struct FlowState {
    Point p;
    Word deck;       // genus2: cover point = element(deck)(p)
    int sx = 0, sy = 0;  // torus: cover point = p + (sx, sy)
};

struct StepUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Region { outside, W, U, V };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::W: return "W";
        case Region::U: return "U";
        case Region::V: return "V";
        default: return "outside";
    }
}

class Segment {
public:
    virtual ~Segment() = default;
    virtual std::string kind() const = 0;
    // flow the state by time dt (any sign); autonomous
    virtual void advance(FlowState& s, double dt) const = 0;
    virtual bool in_support(Point p) const = 0;
    // max H - min H of a generating Hamiltonian, per unit time at rate 1
    virtual std::optional<double> oscillation() const = 0;
    virtual const HamiltonianField* field() const { return nullptr; }
    virtual const SurfaceModel& model() const = 0;
};

using SegmentPtr = std::shared_ptr<const Segment>;

namespace detail {

inline void reduce_state(FlowState& s, cplx z) {
    s.p = from_complex(octagon().reduce(z, &s.deck));
}

inline void wrap_torus(FlowState& s, double x, double y) {
    double fx = std::floor(x), fy = std::floor(y);
    s.sx += static_cast<int>(fx);
    s.sy += static_cast<int>(fy);
    s.p = {x - fx, y - fy};
    if (s.p.x >= 1.0) { s.p.x = 0.0; s.sx += 1; }
    if (s.p.y >= 1.0) { s.p.y = 0.0; s.sy += 1; }
}

}  // namespace detail

// Autonomous Hamiltonian flow integrated with RK4; steps halve where step doubling disagrees.
class HamiltonianSegment : public Segment {
public:
    explicit HamiltonianSegment(HamiltonianField h, double step = 0.01, double tol = 1e-11, double min_step = 1e-7)
        : h_(std::move(h)), step_(step), tol_(tol), min_step_(min_step) {}

    std::string kind() const override { return "hamiltonian"; }
    const HamiltonianField* field() const override { return &h_; }
    const SurfaceModel& model() const override { return h_.model(); }
    std::optional<double> oscillation() const override { return h_.oscillation(); }
    bool in_support(Point p) const override {
        auto [u, v] = h_.vector_field(p);
        return std::hypot(u, v) > 1e-12;
    }
    double step() const { return step_; }

    void advance(FlowState& s, double dt) const override {
        if (dt == 0) return;
        double x = s.p.x, y = s.p.y;
        double remaining = std::abs(dt), sign = dt > 0 ? 1 : -1;
        double h = step_;
        while (remaining > 1e-15) {
            double hh = std::min(h, remaining);
            double x1, y1, x2, y2;
            rk4(x, y, sign * hh, x1, y1);
            rk4(x, y, sign * hh / 2, x2, y2);
            rk4(x2, y2, sign * hh / 2, x2, y2);
            double err = std::hypot(x1 - x2, y1 - y2);
            if (err > tol_ && hh > min_step_) {
                h = hh / 2;
                if (h < min_step_) throw StepUnderflow("RK4 step underflow near a critical region");
                continue;
            }
            x = x2 + (x2 - x1) / 15.0;
            y = y2 + (y2 - y1) / 15.0;
            remaining -= hh;
            if (err < tol_ / 64 && h < step_) h = std::min(step_, 2 * h);
        }
        if (h_.model().kind == SurfaceKind::torus)
            detail::wrap_torus(s, x, y);
        else
            s.p = {x, y};
    }

private:
    void rk4(double x, double y, double h, double& ox, double& oy) const {
        auto f = [&](double a, double b) { return h_.vector_field({a, b}); };
        auto [k1x, k1y] = f(x, y);
        auto [k2x, k2y] = f(x + h / 2 * k1x, y + h / 2 * k1y);
        auto [k3x, k3y] = f(x + h / 2 * k2x, y + h / 2 * k2y);
        auto [k4x, k4y] = f(x + h * k3x, y + h * k3y);
        ox = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        oy = y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    }

    HamiltonianField h_;
    double step_, tol_, min_step_;
};

// Rotation about a center by an angle depending only on the distance to it; closed form.
// Radial Hamiltonian H(rho) gives angular speed -H'(rho)/a(rho), a = rho (flat) or sinh(rho) (hyperbolic).
class RadialSegment : public Segment {
public:
    // profile: H as an expression in r; support: radius beyond which H is constant
    RadialSegment(const SurfaceModel& m, Point center, const std::string& h_of_r, double support)
        : model_(m), center_(center), support_(support), h_text_(h_of_r) {
        Expression e(h_of_r);
        bool hyper = m.kind == SurfaceKind::genus2;
        h_ = [e](double rho) { return e(rho, 0.0); };
        omega_ = [e, hyper](double rho) {
            double r = std::max(rho, 1e-6);
            double dh = e.eval(r, 0.0).dx;
            return -dh / (hyper ? std::sinh(r) : r);
        };
        check();
    }

    // rigid rotation by 2*pi*turns inside radius rho1, smooth ramp to 0 at rho2
    RadialSegment(const SurfaceModel& m, Point center, double rho1, double rho2, double turns)
        : model_(m), center_(center), support_(rho2), rho1_(rho1), turns_(turns) {
        if (!(0 < rho1 && rho1 < rho2)) throw std::invalid_argument("radial twist needs 0 < rho1 < rho2");
        omega_ = [rho1, rho2, turns](double rho) {
            if (rho <= rho1) return 2 * M_PI * turns;
            if (rho >= rho2) return 0.0;
            return 2 * M_PI * turns * smoother_step((rho2 - rho) / (rho2 - rho1));
        };
        bool hyper = m.kind == SurfaceKind::genus2;
        auto om = omega_;
        // H(rho) = integral_rho^support omega(s) a(s) ds
        h_ = [om, rho2, hyper](double rho) {
            if (rho >= rho2) return 0.0;
            const int n = 400;
            double a = rho, b = rho2, hstep = (b - a) / n, acc = 0;
            for (int k = 0; k <= n; ++k) {
                double s = a + k * hstep;
                double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
                acc += w * om(s) * (hyper ? std::sinh(s) : s);
            }
            return acc * hstep / 3;
        };
        check();
    }

    std::string kind() const override { return "radial"; }
    const SurfaceModel& model() const override { return model_; }
    Point center() const { return center_; }
    double support() const { return support_; }
    const std::string& expression() const { return h_text_; }
    double rho1() const { return rho1_; }
    double turns() const { return turns_; }
    double angular_speed(double rho) const { return omega_(rho); }
    double hamiltonian(double rho) const { return h_(rho); }

    double distance(Point p) const {
        if (model_.kind == SurfaceKind::genus2) return hyp_distance(center_.z(), p.z());
        if (model_.kind == SurfaceKind::torus) {
            double dx = std::remainder(p.x - center_.x, 1.0), dy = std::remainder(p.y - center_.y, 1.0);
            return std::hypot(dx, dy);
        }
        return std::hypot(p.x - center_.x, p.y - center_.y);
    }

    bool in_support(Point p) const override { return distance(p) < support_; }

    std::optional<double> oscillation() const override {
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k <= 512; ++k) {
            double v = h_(support_ * k / 512.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi - lo;
    }

    void advance(FlowState& s, double dt) const override {
        if (dt == 0) return;
        switch (model_.kind) {
            case SurfaceKind::genus2: {
                Mobius T = to_origin(center_.z());
                cplx w = T(s.p.z());
                double rho = hyp_norm(w);
                if (rho >= support_) return;
                w *= std::polar(1.0, omega_(rho) * dt);
                detail::reduce_state(s, T.inverse()(w));
                return;
            }
            case SurfaceKind::torus: {
                double dx = std::remainder(s.p.x - center_.x, 1.0), dy = std::remainder(s.p.y - center_.y, 1.0);
                double rho = std::hypot(dx, dy);
                if (rho >= support_) return;
                double a = omega_(rho) * dt, c = std::cos(a), sn = std::sin(a);
                double nx = s.p.x + (c * dx - sn * dy - dx), ny = s.p.y + (sn * dx + c * dy - dy);
                detail::wrap_torus(s, nx, ny);
                return;
            }
            default: {
                double dx = s.p.x - center_.x, dy = s.p.y - center_.y;
                double rho = std::hypot(dx, dy);
                if (rho >= support_) return;
                double a = omega_(rho) * dt, c = std::cos(a), sn = std::sin(a);
                s.p = {center_.x + c * dx - sn * dy, center_.y + sn * dx + c * dy};
            }
        }
    }

private:
    void check() const {
        if (support_ <= 0) throw std::invalid_argument("radial support must be positive");
        if (model_.kind == SurfaceKind::disc && std::hypot(center_.x, center_.y) + support_ >= 1.0)
            throw std::invalid_argument("radial flow support leaves the open disc");
        if (model_.kind == SurfaceKind::annulus) {
            double c = std::hypot(center_.x, center_.y);
            if (c + support_ >= 1.0 || c - support_ <= model_.inner_radius)
                throw std::invalid_argument("radial flow support leaves the annulus");
        }
        if (model_.kind == SurfaceKind::torus && support_ >= 0.5)
            throw std::invalid_argument("radial flow support must stay inside a torus chart");
        if (model_.kind == SurfaceKind::genus2 && hyp_norm(center_.z()) + support_ >= octagon().inradius())
            throw std::invalid_argument("radial flow support must stay inside the octagon");
    }

    SurfaceModel model_;
    Point center_;
    double support_;
    double rho1_ = 0, turns_ = 0;
    std::string h_text_;
    std::function<double(double)> h_, omega_;
};

// (0, r) x S^1 with area dx dphi, embedded as a ring (plane), band (torus) or collar (genus 2).
struct AnnulusChart {
    enum Kind { ring, band, collar } kind = ring;
    PlateauProfile profile;
    // ring
    Point center;
    double inner = 0.0;
    // band: direction 0 wraps along x (class a1), 1 wraps along y (class b1); offset of the band's lower edge
    int direction = 0;
    double offset = 0.0;
    // collar: generator code (a1 = 1, b1 = 2, a2 = 3, b2 = 4)
    int generator = 1;
};

namespace detail {

struct CollarLift {
    Mobius to_std;    // lift -> real diameter (-1 -> +1), base point -> 0
    Mobius from_std;
};

struct CollarGeometry {
    double length = 0;      // closed-geodesic length
    double half_width = 0;  // hyperbolic half-width U
    std::vector<CollarLift> lifts;
};

inline CollarGeometry build_collar(int code, double r) {
    const auto& o = octagon();
    CollarGeometry c;
    Axis ax = axis_of(o.generator(code));
    c.length = ax.length;
    c.half_width = std::asinh(r / (2 * c.length));
    Mobius N0 = normalize_geodesic(ax.repelling, ax.attracting, 0.0);
    cplx base = N0.inverse()(0.0);
    double reach = o.circumradius() + c.half_width + 0.05;
    double tile_reach = reach + hyp_norm(base) + c.length / 2 + 0.5;
    std::map<std::pair<long long, long long>, bool> seen;
    for (const auto& t : near_tiles()) {
        if (t.center_distance > tile_reach) break;
        cplx e1 = t.g(ax.repelling), e2 = t.g(ax.attracting);
        e1 /= std::abs(e1);
        e2 /= std::abs(e2);
        auto key = std::make_pair(std::llround(std::arg(e1) * 1e7), std::llround(std::arg(e2) * 1e7));
        if (seen.count(key)) continue;
        Mobius N = normalize_geodesic(e1, e2, t.g(base));
        cplx w = N(0.0);
        double u = std::asinh(2 * w.imag() / (1 - std::norm(w)));
        if (std::abs(u) > reach) continue;
        seen[key] = true;
        c.lifts.push_back({N, N.inverse()});
    }
    return c;
}

inline cplx to_uhp(cplx w) { return cplx(0, 1) * (1.0 + w) / (1.0 - w); }
inline cplx from_uhp(cplx z) { return (z - cplx(0, 1)) / (z + cplx(0, 1)); }

}  // namespace detail

struct ChartCoordinates {
    double x = 0, phi = 0;
    int lift = -1;  // collar lift index
};

class TwistSegment : public Segment {
public:
    TwistSegment(const SurfaceModel& m, AnnulusChart chart) : model_(m), chart_(chart) {
        chart_.profile.validate();
        switch (chart_.kind) {
            case AnnulusChart::ring: {
                if (!m.planar()) throw std::invalid_argument("ring charts live on the disc or annulus");
                double outer = std::sqrt(chart_.inner * chart_.inner + chart_.profile.r / M_PI);
                double c = std::hypot(chart_.center.x, chart_.center.y);
                if (c + outer >= 1.0 || (m.kind == SurfaceKind::annulus && c > 1e-12 && c - outer <= m.inner_radius) ||
                    (m.kind == SurfaceKind::annulus && c <= 1e-12 && chart_.inner < m.inner_radius))
                    throw std::invalid_argument("ring chart leaves the surface");
                break;
            }
            case AnnulusChart::band:
                if (m.kind != SurfaceKind::torus) throw std::invalid_argument("band charts live on the torus");
                if (chart_.profile.r > 1.0) throw std::invalid_argument("band wider than the torus");
                break;
            case AnnulusChart::collar:
                if (m.kind != SurfaceKind::genus2) throw std::invalid_argument("collar charts live on the genus-2 surface");
                if (chart_.generator < 1 || chart_.generator > 4) throw std::invalid_argument("collar generator must be 1..4");
                collar_ = std::make_shared<detail::CollarGeometry>(detail::build_collar(chart_.generator, chart_.profile.r));
                break;
        }
    }

    std::string kind() const override { return "twist"; }
    const SurfaceModel& model() const override { return model_; }
    const AnnulusChart& chart() const { return chart_; }
    const detail::CollarGeometry* collar() const { return collar_.get(); }

    std::optional<ChartCoordinates> coordinates(Point p) const {
        const auto& pr = chart_.profile;
        switch (chart_.kind) {
            case AnnulusChart::ring: {
                double dx = p.x - chart_.center.x, dy = p.y - chart_.center.y;
                double x = M_PI * (dx * dx + dy * dy - chart_.inner * chart_.inner);
                if (x <= 0 || x >= pr.r) return std::nullopt;
                return ChartCoordinates{x, wrap01(std::atan2(dy, dx) / (2 * M_PI)), -1};
            }
            case AnnulusChart::band: {
                double x = wrap01((chart_.direction == 0 ? p.y : p.x) - chart_.offset);
                if (x <= 0 || x >= pr.r) return std::nullopt;
                return ChartCoordinates{x, chart_.direction == 0 ? p.x : p.y, -1};
            }
            default: {
                const auto& c = *collar_;
                for (std::size_t k = 0; k < c.lifts.size(); ++k) {
                    cplx z = detail::to_uhp(c.lifts[k].to_std(p.z()));
                    double u = std::asinh(-z.real() / z.imag());
                    if (std::abs(u) >= c.half_width) continue;
                    double x = pr.r / 2 + c.length * std::sinh(u);
                    double s = std::log(std::abs(z));
                    return ChartCoordinates{x, wrap01(s / c.length), static_cast<int>(k)};
                }
                return std::nullopt;
            }
        }
    }

    // inverse of coordinates(); collar points are reduced into the fundamental domain
    Point chart_point(double x, double phi) const {
        switch (chart_.kind) {
            case AnnulusChart::ring: {
                double rad = std::sqrt(chart_.inner * chart_.inner + x / M_PI), a = 2 * M_PI * phi;
                return {chart_.center.x + rad * std::cos(a), chart_.center.y + rad * std::sin(a)};
            }
            case AnnulusChart::band: {
                double across = wrap01(chart_.offset + x), along = wrap01(phi);
                return chart_.direction == 0 ? Point{along, across} : Point{across, along};
            }
            default: {
                const auto& c = *collar_;
                double u = std::asinh((x - chart_.profile.r / 2) / c.length);
                double th = std::atan2(1.0, -std::sinh(u));
                cplx z = std::exp(phi * c.length) * cplx(std::cos(th), std::sin(th));
                return from_complex(octagon().reduce(c.lifts[0].from_std(detail::from_uhp(z))));
            }
        }
    }

    Region region(Point p) const {
        auto c = coordinates(p);
        if (!c) return Region::outside;
        if (c->x < chart_.profile.r1) return Region::W;
        if (c->x <= chart_.profile.r2) return Region::U;
        return Region::V;
    }

    bool in_support(Point p) const override { return coordinates(p).has_value(); }

    std::optional<double> oscillation() const override { return std::abs(chart_.profile.integral()); }

    void advance(FlowState& s, double dt) const override {
        if (dt == 0) return;
        auto c = coordinates(s.p);
        if (!c) return;
        double turns = chart_.profile(c->x) * dt;
        if (turns == 0) return;
        switch (chart_.kind) {
            case AnnulusChart::ring: {
                double dx = s.p.x - chart_.center.x, dy = s.p.y - chart_.center.y;
                double a = 2 * M_PI * turns, cs = std::cos(a), sn = std::sin(a);
                s.p = {chart_.center.x + cs * dx - sn * dy, chart_.center.y + sn * dx + cs * dy};
                return;
            }
            case AnnulusChart::band:
                if (chart_.direction == 0)
                    detail::wrap_torus(s, s.p.x + turns, s.p.y);
                else
                    detail::wrap_torus(s, s.p.x, s.p.y + turns);
                return;
            default: {
                const auto& lift = collar_->lifts[static_cast<std::size_t>(c->lift)];
                cplx z = detail::to_uhp(lift.to_std(s.p.z()));
                z *= std::exp(collar_->length * turns);
                detail::reduce_state(s, lift.from_std(detail::from_uhp(z)));
            }
        }
    }

private:
    SurfaceModel model_;
    AnnulusChart chart_;
    std::shared_ptr<const detail::CollarGeometry> collar_;
};

struct Piece {
    SegmentPtr segment;
    double duration = 1.0;
    double rate = 1.0;  // velocity multiplier; negative runs the flow backwards
};

struct Isotopy {
    std::string id = "identity";
    SurfaceModel model = disc_model();
    std::vector<Piece> pieces;

    double duration() const {
        double t = 0;
        for (const auto& p : pieces) t += p.duration;
        return t;
    }
    // time-independent generator: one segment (possibly repeated at the same rate)
    bool autonomous() const {
        if (pieces.empty()) return true;
        for (const auto& p : pieces)
            if (p.segment != pieces[0].segment || p.rate != pieces[0].rate) return false;
        return true;
    }
    int primitive_count() const { return static_cast<int>(pieces.size()); }
};

inline Isotopy identity_isotopy(const SurfaceModel& m) { return Isotopy{"identity", m, {}}; }

inline Isotopy single(const std::string& id, SegmentPtr s, double duration = 1.0, double rate = 1.0) {
    Isotopy iso{id, s->model(), {{std::move(s), duration, rate}}};
    return iso;
}

// Flow the state over isotopy time [t0, t1], 0 <= t0 <= t1 <= duration.
inline void advance(const Isotopy& iso, FlowState& s, double t0, double t1) {
    double start = 0;
    for (const auto& pc : iso.pieces) {
        double end = start + pc.duration;
        double a = std::max(t0, start), b = std::min(t1, end);
        if (b > a) pc.segment->advance(s, (b - a) * pc.rate);
        start = end;
        if (start >= t1) break;
    }
}

inline FlowState flow_state(const Isotopy& iso, Point x, double t) {
    if (t < 0 || t > iso.duration() + 1e-12) throw std::invalid_argument("time outside the isotopy's range");
    FlowState s{x, {}, 0, 0};
    advance(iso, s, 0, t);
    return s;
}

inline Point flow(const Isotopy& iso, Point x, double t) { return flow_state(iso, x, t).p; }
inline Point time_one(const Isotopy& iso, Point x) { return flow(iso, x, iso.duration()); }

// f^-1 path: pieces reversed, run backwards
inline Isotopy reverse(const Isotopy& iso) {
    Isotopy r{iso.id + "^-1", iso.model, {}};
    for (auto it = iso.pieces.rbegin(); it != iso.pieces.rend(); ++it) r.pieces.push_back({it->segment, it->duration, -it->rate});
    return r;
}

// f o g: g first
inline Isotopy compose(const Isotopy& f, const Isotopy& g) {
    Isotopy r{f.id + "*" + g.id, g.pieces.empty() ? f.model : g.model, g.pieces};
    r.pieces.insert(r.pieces.end(), f.pieces.begin(), f.pieces.end());
    return r;
}

inline Isotopy iterate(const Isotopy& f, int p) {
    if (p < 0) return iterate(reverse(f), -p);
    Isotopy r{f.id + "^" + std::to_string(p), f.model, {}};
    for (int k = 0; k < p; ++k) r.pieces.insert(r.pieces.end(), f.pieces.begin(), f.pieces.end());
    return r;
}

// generator scaled by c (time-one map of cH)
inline Isotopy scale(const Isotopy& f, double c) {
    Isotopy r = f;
    r.id = std::to_string(c) + "*" + f.id;
    for (auto& p : r.pieces) p.rate *= c;
    return r;
}

inline Isotopy conjugate(const Isotopy& g, const Isotopy& f) { return compose(compose(g, f), reverse(g)); }

// Sum over pieces of duration x |rate| x oscillation; bounds the Hofer norm of the time-one map.
inline double hofer_oscillation(const Isotopy& iso) {
    double s = 0;
    for (const auto& p : iso.pieces) {
        auto o = p.segment->oscillation();
        if (!o) throw std::invalid_argument("segment lacks Hamiltonian data");
        s += p.duration * std::abs(p.rate) * *o;
    }
    return s;
}

inline Isotopy annulus_twist(const AnnulusChart& chart, const SurfaceModel& m, double duration = 1.0) {
    auto seg = std::make_shared<TwistSegment>(m, chart);
    std::string id;
    switch (chart.kind) {
        case AnnulusChart::ring: id = "ring-twist"; break;
        case AnnulusChart::band: id = chart.direction == 0 ? "band-twist-a1" : "band-twist-b1"; break;
        default: id = "collar-twist-" + letter_name(chart.generator, Alphabet::surface);
    }
    return single(id, seg, duration);
}

inline Isotopy radial_twist(const SurfaceModel& m, Point center, double rho1, double rho2, double turns,
                            double duration = 1.0) {
    return single("radial-twist", std::make_shared<RadialSegment>(m, center, rho1, rho2, turns), duration);
}

inline Isotopy radial_hamiltonian(const SurfaceModel& m, Point center, const std::string& h_of_r, double support,
                                  double duration = 1.0) {
    return single("radial:" + h_of_r, std::make_shared<RadialSegment>(m, center, h_of_r, support), duration);
}

inline Isotopy hamiltonian_flow(const HamiltonianField& h, double duration = 1.0) {
    return single("H:" + (h.is_grid() ? std::string("grid") : h.expression_text()),
                  std::make_shared<HamiltonianSegment>(h), duration);
}

// Basepoints on a horizontal line with small protected discs; half twists about midpoints.
struct BraidPlacement {
    std::vector<Point> basepoints;
    double disc_radius = 0.04;
    double ramp = 0.1;
    double spacing = 0.3;
    // surface letters: collar charts per generator code
    std::map<int, AnnulusChart> charts;
};

inline BraidPlacement line_placement(int n, double spacing = 0.3, double disc_radius = 0.04, double ramp = 0.1) {
    BraidPlacement p;
    p.spacing = spacing;
    p.disc_radius = disc_radius;
    p.ramp = ramp;
    for (int k = 0; k < n; ++k) p.basepoints.push_back({(k - (n - 1) / 2.0) * spacing, 0.0});
    return p;
}

// Composite isotopy whose traced braid on the basepoints is the input word.
inline Isotopy realize_pure_braid(const MixedBraidWord& w, const BraidPlacement& pl, const SurfaceModel& m) {
    check_mixed(w);
    if (static_cast<int>(pl.basepoints.size()) != w.strands) throw std::invalid_argument("placement needs one basepoint per strand");
    for (std::size_t i = 0; i < pl.basepoints.size(); ++i)
        for (std::size_t j = i + 1; j < pl.basepoints.size(); ++j)
            if (chart_distance(m, pl.basepoints[i], pl.basepoints[j]) <= 2 * pl.disc_radius)
                throw std::invalid_argument("placement discs overlap");
    Isotopy iso{"braid", m, {}};
    // current position of each strand's disc, by strand
    std::vector<int> at(static_cast<std::size_t>(w.strands));
    for (int k = 0; k < w.strands; ++k) at[static_cast<std::size_t>(k)] = k;
    for (const auto& l : w.letters) {
        if (l.kind == MixedLetter::artin) {
            if (!m.planar()) throw std::invalid_argument("Artin letters are realized on planar models");
            std::size_t k = static_cast<std::size_t>(l.gen - 1);
            Point a = pl.basepoints[k], b = pl.basepoints[k + 1];
            Point c{(a.x + b.x) / 2, (a.y + b.y) / 2};
            double half = std::hypot(a.x - b.x, a.y - b.y) / 2;
            double rho1 = half + pl.disc_radius, rho2 = rho1 + pl.ramp;
            for (std::size_t j = 0; j < pl.basepoints.size(); ++j) {
                if (j == k || j == k + 1) continue;
                if (chart_distance(m, pl.basepoints[j], c) - pl.disc_radius < rho2)
                    throw std::invalid_argument("half-twist support meets another basepoint disc");
            }
            auto seg = std::make_shared<RadialSegment>(m, c, rho1, rho2, 0.5);
            iso.pieces.push_back({seg, 1.0, static_cast<double>(l.sign)});
        } else {
            auto it = pl.charts.find(l.gen);
            if (it == pl.charts.end()) throw std::invalid_argument("surface letter without a chart assignment");
            auto seg = std::make_shared<TwistSegment>(m, it->second);
            const Point& bp = pl.basepoints[static_cast<std::size_t>(l.strand - 1)];
            if (seg->region(bp) != Region::U) throw std::invalid_argument("strand basepoint not in the chart's U region");
            for (std::size_t j = 0; j < pl.basepoints.size(); ++j)
                if (static_cast<int>(j) != l.strand - 1 && seg->in_support(pl.basepoints[j]))
                    throw std::invalid_argument("surface-letter chart meets another basepoint");
            iso.pieces.push_back({seg, 1.0, static_cast<double>(l.sign)});
        }
    }
    return iso;
}

struct FigureEightSite {
    Isotopy h, g;
    std::shared_ptr<const TwistSegment> h_chart, g_chart;
    Point basepoint;
};

// Site i (1-based) of the genus-2 surface: twists along the a_i and b_i collars.
inline FigureEightSite figure_eight_pair(int i, const SurfaceModel& m, double r1, double r2, double r,
                                         double turns = 1.0) {
    if (m.kind != SurfaceKind::genus2) throw std::invalid_argument("figure-eight sites live on the genus-2 surface");
    if (i < 1 || i > 2) throw std::invalid_argument("genus 2 has sites 1 and 2");
    AnnulusChart ca{AnnulusChart::collar, {r, r1, r2, turns}, {}, 0, 0, 0, 2 * i - 1};
    AnnulusChart cb{AnnulusChart::collar, {r, r1, r2, turns}, {}, 0, 0, 0, 2 * i};
    FigureEightSite s;
    s.h_chart = std::make_shared<TwistSegment>(m, ca);
    s.g_chart = std::make_shared<TwistSegment>(m, cb);
    s.h = single("h" + std::to_string(i), s.h_chart);
    s.g = single("g" + std::to_string(i), s.g_chart);
    s.basepoint = {0, 0};
    if (s.h_chart->in_support(s.basepoint) || s.g_chart->in_support(s.basepoint))
        throw std::invalid_argument("collars too wide: they reach the basepoint");
    return s;
}

// Letters a, b (and A, B or a^-1, b^-1 for inverses) applied left to right.
inline Isotopy word_diffeo(const std::string& pattern, const Isotopy& h, const Isotopy& g) {
    Isotopy r{"w(" + pattern + ")", h.model, {}};
    for (std::size_t k = 0; k < pattern.size(); ++k) {
        char c = pattern[k];
        if (c == ' ') continue;
        bool inv = false;
        if (c == 'A' || c == 'B') inv = true;
        if (k + 3 < pattern.size() && pattern.compare(k + 1, 3, "^-1") == 0) {
            inv = !inv;
            k += 3;
        }
        const Isotopy* f = nullptr;
        if (c == 'a' || c == 'A') f = &h;
        else if (c == 'b' || c == 'B') f = &g;
        else throw std::invalid_argument(std::string("word pattern letter must be a or b, got '") + c + "'");
        Isotopy piece = inv ? reverse(*f) : *f;
        r.pieces.insert(r.pieces.end(), piece.pieces.begin(), piece.pieces.end());
    }
    return r;
}

}  // namespace ggqm
