#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/expression.hpp"
#include "ggqm/surface.hpp"

namespace ggqm {

// Values on a regular grid over [x0,x1]x[y0,y1], Catmull-Rom bicubic so the gradient is continuous.
struct GridData {
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    int nx = 0, ny = 0;
    bool periodic = false;
    std::vector<double> values;  // row-major, values[j*nx + i] at (x0 + i*hx, y0 + j*hy)

    double hx() const { return (x1 - x0) / (periodic ? nx : nx - 1); }
    double hy() const { return (y1 - y0) / (periodic ? ny : ny - 1); }

    double at(int i, int j) const {
        if (periodic) {
            i = ((i % nx) + nx) % nx;
            j = ((j % ny) + ny) % ny;
        } else {
            i = std::clamp(i, 0, nx - 1);
            j = std::clamp(j, 0, ny - 1);
        }
        return values[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)];
    }

    static void cubic(double t, double w[4], double dw[4]) {
        double t2 = t * t, t3 = t2 * t;
        w[0] = 0.5 * (-t3 + 2 * t2 - t);
        w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
        w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
        w[3] = 0.5 * (t3 - t2);
        dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
        dw[1] = 0.5 * (9 * t2 - 10 * t);
        dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
        dw[3] = 0.5 * (3 * t2 - 2 * t);
    }

    Dual2 eval(double x, double y) const {
        double u = (x - x0) / hx(), v = (y - y0) / hy();
        int i = static_cast<int>(std::floor(u)), j = static_cast<int>(std::floor(v));
        double tu = u - i, tv = v - j;
        double wu[4], dwu[4], wv[4], dwv[4];
        cubic(tu, wu, dwu);
        cubic(tv, wv, dwv);
        Dual2 out;
        for (int b = 0; b < 4; ++b)
            for (int a = 0; a < 4; ++a) {
                double f = at(i - 1 + a, j - 1 + b);
                out.v += wu[a] * wv[b] * f;
                out.dx += dwu[a] * wv[b] * f / hx();
                out.dy += wu[a] * dwv[b] * f / hy();
            }
        return out;
    }
};

class HamiltonianField {
public:
    HamiltonianField() = default;

    static HamiltonianField from_expression(const std::string& text, const SurfaceModel& m, double scale = 1.0) {
        HamiltonianField h;
        h.model_ = m;
        h.expr_ = Expression(text);
        h.scale_ = scale;
        h.finish();
        return h;
    }

    static HamiltonianField from_grid(GridData g, const SurfaceModel& m, double scale = 1.0) {
        if (g.nx < 4 || g.ny < 4 || g.values.size() != static_cast<std::size_t>(g.nx * g.ny))
            throw std::invalid_argument("grid Hamiltonian needs at least 4x4 values");
        HamiltonianField h;
        h.model_ = m;
        h.grid_ = std::move(g);
        h.use_grid_ = true;
        h.scale_ = scale;
        h.finish();
        return h;
    }

    const SurfaceModel& model() const { return model_; }
    const std::string& expression_text() const { return expr_.text(); }
    bool is_grid() const { return use_grid_; }
    const GridData& grid() const { return grid_; }
    double scale() const { return scale_; }
    double mean_offset() const { return offset_; }

    HamiltonianField scaled(double c) const {
        HamiltonianField h = *this;
        h.scale_ *= c;
        h.offset_ *= c;
        return h;
    }

    Dual2 eval(Point p) const {
        Dual2 d = use_grid_ ? grid_.eval(p.x, p.y) : expr_.eval(p.x, p.y);
        return {scale_ * d.v - offset_, scale_ * d.dx, scale_ * d.dy};
    }
    double value(Point p) const { return eval(p).v; }

    // X_H = (H_y, -H_x)
    std::pair<double, double> vector_field(Point p) const {
        Dual2 d = eval(p);
        return {d.dy, -d.dx};
    }

    // max - min over a chart grid
    double oscillation(int n = 256) const {
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                Point p;
                if (model_.kind == SurfaceKind::torus) {
                    p = {static_cast<double>(i) / n, static_cast<double>(j) / n};
                } else {
                    p = {-1 + 2.0 * i / n, -1 + 2.0 * j / n};
                    if (!in_domain(model_, p)) continue;
                }
                double v = value(p);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        return hi < lo ? 0.0 : hi - lo;
    }

private:
    void finish() {
        if (model_.kind == SurfaceKind::genus2)
            throw std::invalid_argument("chart Hamiltonians are not supported on the genus-2 model; use twist primitives");
        if (model_.kind == SurfaceKind::torus) {
            // mean-zero on the closed torus (midpoint rule)
            const int n = 256;
            double s = 0;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) s += raw((i + 0.5) / n, (j + 0.5) / n);
            offset_ = scale_ * s / (n * n);
        } else {
            for (int k = 0; k < 720; ++k) {
                double a = 2 * M_PI * k / 720;
                if (std::abs(scale_ * raw(std::cos(a), std::sin(a))) > 1e-9)
                    throw std::invalid_argument("disc Hamiltonian must vanish on the boundary circle");
            }
        }
    }
    double raw(double x, double y) const { return use_grid_ ? grid_.eval(x, y).v : expr_(x, y); }

    SurfaceModel model_;
    Expression expr_;
    GridData grid_;
    bool use_grid_ = false;
    double scale_ = 1.0;
    double offset_ = 0.0;
};

// C^2 ramp 0 -> 1 on [0,1]
inline double smoother_step(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    return t * t * t * (t * (6 * t - 15) + 10);
}

// Rotation profile on (0, r): ramps up on (0, r1), equals 'turns' on [r1, r2], ramps down on (r2, r).
struct PlateauProfile {
    double r = 1, r1 = 0.1, r2 = 0.9, turns = 1.0;

    void validate() const {
        if (!(0 < r1 && r1 < r2 && r2 < r)) throw std::invalid_argument("profile needs 0 < r' < r'' < r");
    }
    double operator()(double x) const {
        if (x <= 0 || x >= r) return 0;
        if (x < r1) return turns * smoother_step(x / r1);
        if (x <= r2) return turns;
        return turns * smoother_step((r - x) / (r - r2));
    }
    // integral over (0, r): the twist's Hamiltonian oscillation per unit time
    double integral() const { return turns * (r2 - r1 + 0.5 * r1 + 0.5 * (r - r2)); }
};

}  // namespace ggqm
