#pragma once

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/estimator.hpp"

namespace ggqm {

struct EmbeddingConfig {
    int m = 2;
    double collar_area = 2.8736;
    double ramp = 0.01;  // ramp width as a fraction of the collar area
    std::string pattern = "abb";
    long samples = 20000;
    std::uint64_t seed = 1;
    std::vector<int> powers{1, 2, 4, 8, 16};
    double epsilon = 0.1;
    bool conjugate = false;
    int workers = 0;
    int quadrature = 400;
};

struct EmbeddingExperiment {
    int m = 0;
    std::vector<std::string> diffeos, qms;
    std::vector<std::vector<double>> M, M_err, M_hom_err, raw;
    std::vector<std::vector<double>> pattern_matrix;  // stable phi_i on the site words
    std::vector<double> site_area;                     // area(U_h cap U_g) per site
    double A = 0;
    std::vector<double> defects;                       // normalized defect bound per row
    std::vector<int> primitive_counts;
    double det = 0;
    bool supports_disjoint = true, commute = true, diagonal_dominant = false, ci_too_wide = false;
    double max_commutator_displacement = 0;
    double epsilon = 0.1;
    long samples = 0, rejected = 0;
};

// pattern letters a, b, A, B on site i of genus 2
inline Word site_word(const std::string& pattern, int site) {
    Word w;
    for (char c : pattern) {
        switch (c) {
            case 'a': w.push_back(2 * site - 1); break;
            case 'b': w.push_back(2 * site); break;
            case 'A': w.push_back(-(2 * site - 1)); break;
            case 'B': w.push_back(-2 * site); break;
            default: throw std::invalid_argument("pattern letters are a, b, A, B");
        }
    }
    return free_reduce(w);
}

// area(U_h cap U_g) by midpoint quadrature over the plateau of the h chart
inline double overlap_area(const FigureEightSite& s, int grid) {
    const auto& pr = s.h_chart->chart().profile;
    double hx = (pr.r2 - pr.r1) / grid, hp = 1.0 / grid;
    long hits = 0;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            Point p = s.h_chart->chart_point(pr.r1 + (a + 0.5) * hx, (b + 0.5) * hp);
            if (s.g_chart->region(p) == Region::U) ++hits;
        }
    return static_cast<double>(hits) * hx * hp;
}

inline double determinant(std::vector<std::vector<double>> a) {
    std::size_t n = a.size();
    double det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0) return 0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return det;
}

inline std::vector<std::vector<double>> inverse(std::vector<std::vector<double>> a) {
    std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-300) throw std::domain_error("singular matrix");
        std::swap(a[piv], a[c]);
        std::swap(inv[piv], inv[c]);
        double d = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = a[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

// A disc-supported rotation that does not commute with the site maps; used to conjugate them.
inline Isotopy embedding_conjugator(const SurfaceModel& m) { return radial_twist(m, {0.35, 0.1}, 0.2, 0.7, 0.37); }

inline EmbeddingExperiment run_embedding(const EmbeddingConfig& cfg) {
    auto model = genus2_model();
    if (cfg.m < 1 || cfg.m > 2) throw std::invalid_argument("the genus-2 model carries one or two sites");
    if (!(cfg.ramp > 0 && cfg.ramp < 0.5)) throw std::invalid_argument("ramp fraction must lie in (0, 0.5)");
    EmbeddingExperiment e;
    e.m = cfg.m;
    e.epsilon = cfg.epsilon;
    double r = cfg.collar_area;
    std::vector<FigureEightSite> sites;
    std::vector<Isotopy> diffeos;
    std::vector<QuasiMorphism> qms;
    for (int i = 1; i <= cfg.m; ++i) {
        sites.push_back(figure_eight_pair(i, model, cfg.ramp * r, (1 - cfg.ramp) * r, r, 1.0));
        Isotopy f = word_diffeo(cfg.pattern, sites.back().h, sites.back().g);
        e.primitive_counts.push_back(f.primitive_count());
        if (cfg.conjugate) f = conjugate(embedding_conjugator(model), f);
        f.id = "site" + std::to_string(i) + ":" + cfg.pattern + (cfg.conjugate ? ":conj" : "");
        diffeos.push_back(f);
        e.diffeos.push_back(f.id);
        qms.push_back(brooks_counting_qm(site_word(cfg.pattern, i), Domain::surface_group, 2));
        e.qms.push_back(qms.back().name);
        e.site_area.push_back(overlap_area(sites.back(), cfg.quadrature));
    }
    double sum = 0;
    for (double a : e.site_area) sum += a;
    e.A = sum / cfg.m;

    // phi_i on the traced class of an overlap point of site j
    for (int i = 0; i < cfg.m; ++i) {
        std::vector<double> row;
        for (int j = 0; j < cfg.m; ++j) row.push_back(stable_value(qms[static_cast<std::size_t>(i)], site_word(cfg.pattern, j + 1)));
        e.pattern_matrix.push_back(row);
    }

    // supports: sampled indicator
    Rng rng(cfg.seed, 1u << 30);
    for (int k = 0; k < 20000 && cfg.m > 1; ++k) {
        Point p = sample_point(model, rng);
        std::vector<int> in;
        for (int i = 0; i < cfg.m; ++i) {
            bool s = false;
            for (const auto& pc : diffeos[static_cast<std::size_t>(i)].pieces) s = s || pc.segment->in_support(p);
            if (s) in.push_back(i);
        }
        if (!cfg.conjugate && in.size() > 1) e.supports_disjoint = false;
    }
    // commutation of the time-one maps on a sample grid
    for (int k = 0; k < 400 && cfg.m > 1; ++k) {
        Point p = sample_point(model, rng);
        FlowState a{p, {}, 0, 0}, b{p, {}, 0, 0};
        const Isotopy &f0 = diffeos[0], &f1 = diffeos[1];
        advance(f1, a, 0, f1.duration());
        advance(f0, a, 0, f0.duration());
        advance(f0, b, 0, f0.duration());
        advance(f1, b, 0, f1.duration());
        double d = hyp_distance(octagon().element(a.deck)(a.p.z()), octagon().element(b.deck)(b.p.z()));
        e.max_commutator_displacement = std::max(e.max_commutator_displacement, d);
    }
    e.commute = e.max_commutator_displacement < 1e-8;

    EstimatorConfig ec;
    ec.n = 1;
    ec.samples = cfg.samples;
    ec.seed = cfg.seed;
    ec.powers = cfg.powers;
    ec.workers = cfg.workers;
    ec.basepoints = std::vector<Point>{{0, 0}};
    auto sz = static_cast<std::size_t>(cfg.m);
    e.M.assign(sz, std::vector<double>(sz));
    e.M_err = e.M_hom_err = e.raw = e.M;
    for (std::size_t j = 0; j < sz; ++j) {
        auto tables = sample_values_multi(qms, diffeos[j], ec);
        for (std::size_t i = 0; i < sz; ++i) {
            auto h = homogenize_table(tables[i]);
            e.raw[i][j] = h.limit.value;
            e.M[i][j] = h.limit.value / e.A;
            e.M_err[i][j] = h.limit.std_error / e.A;
            e.M_hom_err[i][j] = h.report.error_bound / e.A;
            e.samples = h.limit.samples;
            e.rejected = std::max(e.rejected, h.limit.rejected);
        }
    }
    double vol = model.total_area;
    for (std::size_t i = 0; i < sz; ++i) e.defects.push_back(vol * *qms[i].declared_defect / e.A);
    e.det = determinant(e.M);
    e.diagonal_dominant = true;
    for (std::size_t i = 0; i < sz; ++i)
        for (std::size_t j = 0; j < sz; ++j) {
            double target = i == j ? 1.0 : 0.0;
            double slack = cfg.epsilon + 3 * e.M_err[i][j];
            if (std::abs(e.M[i][j] - target) >= slack) e.diagonal_dominant = false;
            if (3 * e.M_err[i][j] > cfg.epsilon) e.ci_too_wide = true;
        }
    return e;
}

struct NormBoundReport {
    std::vector<int> exponents;
    double lower = 0;          // max_i |sum_j d_j M_ij| / defect_i
    double formula_lower = 0;  // sum |d_i| / (m * D), D = max defect of the dual family
    double upper = 0;          // sum |d_i| * primitive count
    std::string tag = "Aut";
    bool zero_defect = false;
};

inline NormBoundReport norm_lower_bound(const EmbeddingExperiment& e, const std::vector<int>& d) {
    if (static_cast<int>(d.size()) != e.m) throw std::invalid_argument("exponent vector size differs from m");
    NormBoundReport r;
    r.exponents = d;
    long total = 0;
    for (int i = 0; i < e.m; ++i) {
        total += std::abs(d[static_cast<std::size_t>(i)]);
        r.upper += std::abs(d[static_cast<std::size_t>(i)]) * e.primitive_counts[static_cast<std::size_t>(i)];
    }
    for (double D : e.defects)
        if (D <= 0) r.zero_defect = true;
    if (r.zero_defect) return r;
    for (int i = 0; i < e.m; ++i) {
        double s = 0;
        for (int j = 0; j < e.m; ++j) s += d[static_cast<std::size_t>(j)] * e.M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        r.lower = std::max(r.lower, std::abs(s) / e.defects[static_cast<std::size_t>(i)]);
    }
    // dual family Omega = M^{-1} Psi satisfies Omega_i(f_j) = delta_ij
    auto inv = inverse(e.M);
    double Dmax = 0;
    for (int i = 0; i < e.m; ++i) {
        double s = 0;
        for (int k = 0; k < e.m; ++k)
            s += std::abs(inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) * e.defects[static_cast<std::size_t>(k)];
        Dmax = std::max(Dmax, s);
    }
    r.formula_lower = static_cast<double>(total) / (e.m * Dmax);
    return r;
}

struct VanishingCase {
    std::string name;
    Isotopy flow;
    QuasiMorphism qm;
    bool compatible = true;  // qm vanishes on the flow's level classes
    bool control = false;    // expected nonzero
};

struct VanishingRow {
    std::string flow, qm;
    double value = 0, std_error = 0, hom_error = 0;
    long samples = 0, rejected = 0;
    bool control = false, within = false;
};

inline std::vector<VanishingRow> autonomous_vanishing_suite(const std::vector<VanishingCase>& cases, long samples,
                                                            std::uint64_t seed, std::vector<int> powers = {1, 2, 4, 8, 16},
                                                            int workers = 0) {
    std::vector<VanishingRow> rows;
    for (const auto& c : cases) {
        if (!c.flow.autonomous()) throw std::invalid_argument("flow '" + c.name + "' is not autonomous");
        if (!c.compatible && !c.control) throw std::invalid_argument("qm '" + c.qm.name + "' is not flagged compatible with '" + c.name + "'");
        EstimatorConfig ec;
        ec.n = 1;
        ec.samples = samples;
        ec.seed = seed;
        ec.powers = powers;
        ec.workers = workers;
        if (c.flow.model.kind == SurfaceKind::genus2) ec.basepoints = std::vector<Point>{{0, 0}};
        auto h = phi_n_homogenized(c.qm, c.flow, ec);
        VanishingRow r{c.name, c.qm.name, h.limit.value, h.limit.std_error, h.report.error_bound,
                       h.limit.samples, h.limit.rejected, c.control, false};
        r.within = std::abs(r.value) <= 3 * r.std_error + r.hom_error;
        rows.push_back(r);
    }
    return rows;
}

inline Isotopy alpha1_twist(double ramp = 0.1, double collar_area = 2.8736, double turns = 1.0) {
    auto m = genus2_model();
    AnnulusChart ch;
    ch.kind = AnnulusChart::collar;
    ch.generator = 1;
    ch.profile = {collar_area, ramp * collar_area, (1 - ramp) * collar_area, turns};
    auto iso = annulus_twist(ch, m);
    iso.id = "alpha1-twist";
    return iso;
}

inline std::vector<VanishingCase> default_vanishing_cases() {
    auto tw = alpha1_twist();
    std::vector<VanishingCase> c;
    c.push_back({"alpha1-twist", tw, make_qm("brooks:a1 b1 b1", 2), true, false});
    c.push_back({"alpha1-twist", tw, make_qm("brooks:b1 a2", 2), true, false});
    c.push_back({"alpha1-twist", tw, make_qm("pi:a1", 2), false, true});
    c.push_back({"identity", identity_isotopy(genus2_model()), make_qm("brooks:a1 b1 b1", 2), true, false});
    return c;
}

struct MetricRow {
    int n = 0;
    std::string map;
    int aut_witness = 1;
    double hofer = 0;      // oscillation bound on the Hofer norm
    double target = 0;     // C * n, or epsilon for the small map
};

// H on the core curve of a collar twist, relative to the collar boundary where H vanishes
inline double core_level(const Isotopy& twist) {
    auto ts = std::dynamic_pointer_cast<const TwistSegment>(twist.pieces.at(0).segment);
    if (!ts) throw std::invalid_argument("metric comparison expects an annulus twist");
    const auto& pr = ts->chart().profile;
    const int N = 4000;
    double a = pr.r / 2, h = (pr.r - a) / N, s = 0;
    for (int k = 0; k < N; ++k) s += pr(a + (k + 0.5) * h);
    return std::abs(s * h * twist.pieces[0].rate) * twist.primitive_count();
}

inline std::vector<MetricRow> metric_comparison(const std::vector<Isotopy>& family, int nmax = 10, double epsilon = 0.01) {
    std::vector<MetricRow> rows;
    for (const auto& h : family) {
        if (!h.autonomous()) throw std::invalid_argument("metric family members must be autonomous");
        double C = core_level(h);
        for (int n = 1; n <= nmax; ++n) {
            // h^n is the time-one map of the autonomous Hamiltonian nH
            Isotopy hn = scale(h, n);
            rows.push_back({n, h.id + "^" + std::to_string(n), 1, hofer_oscillation(hn), C * n});
        }
        double osc = hofer_oscillation(h);
        Isotopy small = scale(h, 0.5 * epsilon / osc);
        rows.push_back({1, h.id + ":eps", 1, hofer_oscillation(small), epsilon});
    }
    return rows;
}

inline std::string fmt(double v, int prec = 6) {
    std::ostringstream o;
    o << std::setprecision(prec) << v;
    return o.str();
}

inline std::string embedding_markdown(const EmbeddingExperiment& e) {
    std::ostringstream o;
    o << "## delta-matrix (constructive Brooks analogue)\n\n";
    o << "A = " << fmt(e.A) << ", det M = " << fmt(e.det) << ", samples = " << e.samples << ", rejected = " << e.rejected << "\n\n";
    o << "| qm \\ diffeo |";
    for (const auto& d : e.diffeos) o << " " << d << " |";
    o << "\n|---|";
    for (int j = 0; j < e.m; ++j) o << "---|";
    o << "\n";
    for (int i = 0; i < e.m; ++i) {
        o << "| " << e.qms[static_cast<std::size_t>(i)] << " |";
        for (int j = 0; j < e.m; ++j)
            o << " " << fmt(e.M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 4) << " +- "
              << fmt(e.M_err[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 2) << " |";
        o << "\n";
    }
    o << "\nsupports disjoint: " << (e.supports_disjoint ? "yes" : "no") << ", commute: " << (e.commute ? "yes" : "no")
      << ", near-identity within eps + 3 sigma: " << (e.diagonal_dominant ? "yes" : "no")
      << (e.ci_too_wide ? " (confidence interval wider than eps)" : "") << "\n";
    return o.str();
}

inline std::string embedding_csv(const EmbeddingExperiment& e) {
    std::ostringstream o;
    o << "i,j,qm,diffeo,M,std_error,hom_error,raw\n";
    for (int i = 0; i < e.m; ++i)
        for (int j = 0; j < e.m; ++j) {
            auto I = static_cast<std::size_t>(i), J = static_cast<std::size_t>(j);
            o << i + 1 << "," << j + 1 << "," << e.qms[I] << "," << e.diffeos[J] << "," << fmt(e.M[I][J], 10) << ","
              << fmt(e.M_err[I][J], 10) << "," << fmt(e.M_hom_err[I][J], 10) << "," << fmt(e.raw[I][J], 10) << "\n";
        }
    return o.str();
}

inline std::string vanishing_markdown(const std::vector<VanishingRow>& rows) {
    std::ostringstream o;
    o << "## autonomous vanishing\n\n| flow | qm | value | std_error | hom_error | samples | control | within |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows)
        o << "| " << r.flow << " | " << r.qm << " | " << fmt(r.value) << " | " << fmt(r.std_error, 3) << " | "
          << fmt(r.hom_error, 3) << " | " << r.samples << " | " << (r.control ? "yes" : "no") << " | "
          << (r.within ? "yes" : "no") << " |\n";
    return o.str();
}

inline std::string vanishing_csv(const std::vector<VanishingRow>& rows) {
    std::ostringstream o;
    o << "flow,qm,value,std_error,hom_error,samples,rejected,control,within\n";
    for (const auto& r : rows)
        o << r.flow << "," << r.qm << "," << fmt(r.value, 10) << "," << fmt(r.std_error, 10) << "," << fmt(r.hom_error, 10)
          << "," << r.samples << "," << r.rejected << "," << r.control << "," << r.within << "\n";
    return o.str();
}

inline std::string metric_markdown(const std::vector<MetricRow>& rows) {
    std::ostringstream o;
    o << "## autonomous vs Hofer scale\n\n| n | map | aut witness | Hofer bound | target |\n|---|---|---|---|---|\n";
    for (const auto& r : rows)
        o << "| " << r.n << " | " << r.map << " | " << r.aut_witness << " | " << fmt(r.hofer) << " | " << fmt(r.target) << " |\n";
    return o.str();
}

inline std::string metric_csv(const std::vector<MetricRow>& rows) {
    std::ostringstream o;
    o << "n,map,aut_witness,hofer,target\n";
    for (const auto& r : rows) o << r.n << "," << r.map << "," << r.aut_witness << "," << fmt(r.hofer, 10) << "," << fmt(r.target, 10) << "\n";
    return o.str();
}

}  // namespace ggqm
