#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "ggqm/io.hpp"

using namespace ggqm;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << detail << std::endl;
    if (!ok) ++failures;
}

std::string num(double v, int prec = 4) { return fmt(v, prec); }

// ---------------------------------------------------------------- words

// every freely reduced word over letters +-1..+-g of length <= max_len, shortest first
std::vector<Word> reduced_words(int g, int max_len) {
    std::vector<Word> out{{}};
    std::size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        std::size_t end = out.size();
        for (std::size_t k = begin; k < end; ++k)
            for (int a = 1; a <= g; ++a)
                for (int s : {1, -1}) {
                    Letter l = s * a;
                    if (!out[k].empty() && out[k].back() == -l) continue;
                    Word w = out[k];
                    w.push_back(l);
                    out.push_back(std::move(w));
                }
        begin = end;
    }
    return out;
}

// Breadth-first exploration of the Cayley graph of the surface group out to radius 4.
// Elements are told apart by the orbit of the octagon center, which no nontrivial
// element fixes; distinct orbit points are at least twice the inradius apart.
class BallOracle {
public:
    BallOracle() {
        const Octagon& oct = octagon();
        id_.assign(key_space, -1);
        std::vector<std::pair<Word, Mobius>> frontier{{{}, Mobius{}}};
        id_[0] = node(cplx(0, 0));
        for (int depth = 1; depth <= 4; ++depth) {
            std::vector<std::pair<Word, Mobius>> next;
            for (const auto& [w, g] : frontier)
                for (int a = 1; a <= 4; ++a)
                    for (int s : {1, -1}) {
                        Letter l = s * a;
                        if (!w.empty() && w.back() == -l) continue;
                        Word u = w;
                        u.push_back(l);
                        Mobius h = g * (s > 0 ? oct.generator(a) : oct.generator(a).inverse());
                        id_[key(u)] = node(h(cplx(0, 0)));
                        next.push_back({u, h});
                    }
            frontier = std::move(next);
        }
    }

    // w freely reduced, |w| <= 8
    bool is_trivial(const Word& w) const {
        std::size_t half = (w.size() + 1) / 2;
        Word u(w.begin(), w.begin() + static_cast<long>(half));
        Word v(w.begin() + static_cast<long>(half), w.end());
        return id_[key(u)] == id_[key(invert(v))];
    }

    std::size_t elements() const { return points_.size(); }

private:
    static constexpr int key_space = 9 * 9 * 9 * 9;
    static int key(const Word& w) {
        int k = 0;
        for (Letter l : w) k = 9 * k + (l > 0 ? l : 4 - l);
        return k;
    }
    int node(cplx p) {
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (hyp_distance(points_[i], p) < 1.0) return static_cast<int>(i);
        points_.push_back(p);
        return static_cast<int>(points_.size() - 1);
    }
    std::vector<int> id_;
    std::vector<cplx> points_;
};

void criterion1() {
    BallOracle oracle;
    const DehnReducer& dehn = octagon().dehn();
    long total = 0, trivial = 0, disagree = 0;
    Word w;
    std::function<void()> rec = [&] {
        ++total;
        bool d = dehn.is_trivial(w), o = oracle.is_trivial(w);
        if (d != o) ++disagree;
        if (o) ++trivial;
        if (w.size() == 8) return;
        for (int a = 1; a <= 4; ++a)
            for (int s : {1, -1}) {
                Letter l = s * a;
                if (!w.empty() && w.back() == -l) continue;
                w.push_back(l);
                rec();
                w.pop_back();
            }
    };
    rec();
    // the cyclic conjugates of the relator and its inverse are the nonempty trivial words of length 8
    report(1, disagree == 0 && trivial == 1 + 16,
           "Dehn vs breadth-first oracle on " + std::to_string(total) + " reduced words of length <= 8 (" +
               std::to_string(oracle.elements()) + " elements in the radius-4 ball): " + std::to_string(disagree) +
               " disagreements, " + std::to_string(trivial) + " trivial");
}

// ---------------------------------------------------------------- defects

struct DefectCase {
    QuasiMorphism q;
    std::vector<Word> words;
    int max_total;  // |u| + |v| bound, 0 for none
    std::function<bool(const Word&)> admissible;
};

void criterion2() {
    auto b3 = reduced_words(2, 6);
    auto f2 = b3;  // the same four letters read as a1, b1
    auto pi1 = reduced_words(4, 6);
    auto pure = [](const Word& w) { return is_pure(braid(3, w)); };
    std::vector<DefectCase> cases{
        {expsum_qm(), b3, 0, {}},
        {rademacher_b3(), b3, 0, {}},
        {make_qm("brooks:s1 s2^-1"), b3, 0, {}},
        {linking_qm(1, 2), b3, 0, pure},
        {linking_qm(2, 3), b3, 0, pure},
        {make_qm("brooks:a1 b1", 1), f2, 0, {}},
        {make_qm("pi:a1"), pi1, 6, {}},
        {make_qm("pi:b2"), pi1, 6, {}},
        {make_qm("brooks:a1 b1 b1"), pi1, 6, {}},
        {make_qm("brooks:b1 a2"), pi1, 6, {}},
    };
    bool ok = true;
    std::ostringstream detail;
    for (auto& c : cases) {
        std::vector<const Word*> ws;
        std::vector<double> val;
        for (const auto& w : c.words)
            if (!c.admissible || c.admissible(w)) ws.push_back(&w);
        for (const Word* w : ws) val.push_back(c.q(*w));
        double worst = 0;
        long pairs = 0;
        // words come shortest first, so the admissible partners of u form a prefix
        std::vector<std::size_t> upto(14, ws.size());
        for (std::size_t k = ws.size(); k-- > 0;) upto[ws[k]->size()] = std::min(upto[ws[k]->size()], k);
        for (std::size_t i = 0; i < ws.size(); ++i) {
            std::size_t end = ws.size();
            if (c.max_total) end = upto[static_cast<std::size_t>(c.max_total) - ws[i]->size() + 1];
            for (std::size_t j = 0; j < end; ++j) {
                worst = std::max(worst, std::abs(c.q(multiply(*ws[i], *ws[j])) - val[i] - val[j]));
                ++pairs;
            }
        }
        double D = *c.q.declared_defect;
        bool pass = c.q.is_homomorphism ? worst == 0.0 : worst <= D + 1e-9;
        ok = ok && pass;
        detail << c.q.name << " " << num(worst) << "/" << num(D) << (pass ? "" : "!") << " (" << pairs << " pairs); ";
    }
    report(2, ok, "max |q(uv)-q(u)-q(v)| / declared defect: " + detail.str());
}

// ---------------------------------------------------------------- Calabi on the disc

double radial_integral(const std::function<double(double)>& h, double support) {
    // composite Simpson for 2 pi int_0^s H(r) r dr
    const int N = 20000;
    double step = support / N, s = 0;
    for (int k = 0; k <= N; ++k) {
        double r = k * step, w = (k == 0 || k == N) ? 1 : (k % 2 ? 4 : 2);
        s += w * h(r) * r;
    }
    return 2 * M_PI * s * step / 3;
}

void criterion3() {
    struct Case {
        Point center;
        std::string expr;
        double support;
        std::function<double(double)> h;
    };
    std::vector<Case> cases{
        {{0, 0}, "30*(0.81-x^2)^2", 0.9, [](double r) { return 30 * std::pow(0.81 - r * r, 2); }},
        {{0.1, -0.05}, "40*(0.64-x^2)^2*(1+x^2)", 0.8, [](double r) { return 40 * std::pow(0.64 - r * r, 2) * (1 + r * r); }},
        {{-0.05, 0.08}, "15*(0.7225-x^2)^3*(2-x)", 0.85, [](double r) { return 15 * std::pow(0.7225 - r * r, 3) * (2 - r); }},
    };
    std::vector<double> ratio, err;
    std::ostringstream detail;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        auto f = radial_hamiltonian(disc_model(), c.center, c.expr, c.support);
        auto res = calabi_disc(f, 100000, 300 + k);
        double integral = radial_integral(c.h, c.support);
        ratio.push_back(res.value[0] / integral);
        err.push_back(res.std_error[0] / integral);
        detail << num(ratio.back()) << "+-" << num(err.back(), 2) << " ";
    }
    // rigid rotation of the unit disc by theta: every pair winds theta/2pi, so C = pi^2 theta/2pi,
    // and its Hamiltonian theta (1 - r^2)/2 integrates to pi theta/4
    const double rigid = 2.0;
    double lo = *std::min_element(ratio.begin(), ratio.end()), hi = *std::max_element(ratio.begin(), ratio.end());
    bool agree = hi / lo - 1 <= 0.02;
    bool match = true;
    for (double r : ratio) match = match && std::abs(r / rigid - 1) <= 0.02;
    report(3, agree && match,
           "C_D / int H dA at 1e5 samples: " + detail.str() + "; spread " + num(100 * (hi / lo - 1), 3) + "%, rigid-rotation constant " +
               num(rigid));
}

Isotopy random_disc_isotopy(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    double a = 2 * M_PI * u(rng), rad = 0.25 * u(rng);
    Point c{rad * std::cos(a), rad * std::sin(a)};
    double rho2 = 0.35 + 0.3 * u(rng), rho1 = rho2 * (0.3 + 0.4 * u(rng));
    if (u(rng) < 0.5) return radial_twist(disc_model(), c, rho1, rho2, (u(rng) < 0.5 ? -1 : 1) * (0.3 + 1.2 * u(rng)));
    std::ostringstream h;
    h << (u(rng) < 0.5 ? -1 : 1) * (2 + 6 * u(rng)) << "*(" << rho2 * rho2 << "-x^2)^2";
    return radial_hamiltonian(disc_model(), c, h.str(), rho2);
}

void criterion4() {
    std::mt19937_64 rng(404);
    int bad = 0;
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
        auto f = random_disc_isotopy(rng), g = random_disc_isotopy(rng);
        auto cfg = calabi_disc(compose(f, g), 4000, 1000 + 3 * k), cf = calabi_disc(f, 4000, 1001 + 3 * k), cg = calabi_disc(g, 4000, 1002 + 3 * k);
        double diff = cfg.value[0] - cf.value[0] - cg.value[0];
        double sigma = std::sqrt(std::pow(cfg.std_error[0], 2) + std::pow(cf.std_error[0], 2) + std::pow(cg.std_error[0], 2));
        worst = std::max(worst, std::abs(diff) / sigma);
        if (std::abs(diff) > 3 * sigma) ++bad;
    }
    report(4, bad == 0, "C_D(fg) - C_D(f) - C_D(g) on 10 random pairs, independent samples: worst " + num(worst, 3) + " sigma, " +
                            std::to_string(bad) + " beyond 3 sigma");
}

// ---------------------------------------------------------------- autonomous vanishing

void criterion5() {
    auto rows = autonomous_vanishing_suite(default_vanishing_cases(), 2000, 55, {1, 2, 4, 8, 16});
    bool ok = true;
    std::ostringstream detail;
    for (const auto& r : rows) {
        bool pass = r.control ? std::abs(r.value) >= 10 * r.std_error : r.within;
        ok = ok && pass;
        detail << r.flow << "/" << r.qm << " " << num(r.value) << "+-" << num(r.std_error, 2);
        if (r.control) detail << " (" << num(std::abs(r.value) / r.std_error, 3) << " sigma)";
        detail << "; ";
    }
    report(5, ok, "powers to 16: " + detail.str());
}

// ---------------------------------------------------------------- embedding and norms

EmbeddingExperiment embedding;

void criterion6() {
    EmbeddingConfig cfg;
    cfg.m = 2;
    embedding = run_embedding(cfg);
    const auto& e = embedding;
    bool ok = true;
    std::ostringstream detail;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double v = e.M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], s = e.M_err[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            ok = ok && std::abs(v - (i == j ? 1.0 : 0.0)) < 0.1 + 3 * s;
            detail << "M" << i + 1 << j + 1 << "=" << num(v) << "+-" << num(s, 2) << " ";
        }
    ok = ok && std::abs(e.det) > 0.5;
    report(6, ok, detail.str() + "det=" + num(e.det) + " (" + std::to_string(e.samples) + " samples)");
}

void criterion7() {
    const auto& e = embedding;
    std::vector<double> lower;
    for (int k = 0; k <= 10; ++k) lower.push_back(norm_lower_bound(e, {k, 0}).lower);
    double slope = lower[10] / 10, residual = 0;
    for (int k = 0; k <= 10; ++k) residual = std::max(residual, std::abs(lower[static_cast<std::size_t>(k)] - slope * k));
    double expected = std::abs(e.M[0][0]) / e.defects[0];
    bool ok = residual <= 1e-9 * std::max(1.0, lower[10]) && slope > 0 && std::abs(slope / expected - 1) <= 0.2;
    report(7, ok, "lower bound for d=(k,0), k<=10: slope " + num(slope) + " vs |M11|/D1 " + num(expected) + ", max deviation from a line " +
                      num(residual, 2));
}

void criterion8() {
    auto rows = metric_comparison({alpha1_twist()}, 10, 0.01);
    bool ok = rows.size() == 11;
    double worst = 1e300;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        ok = ok && rows[k].aut_witness == 1 && rows[k].hofer >= rows[k].target && rows[k].n == static_cast<int>(k) + 1;
        worst = std::min(worst, rows[k].hofer / rows[k].target);
    }
    ok = ok && rows.back().aut_witness == 1 && rows.back().hofer < 0.01;
    report(8, ok, "autonomous norm 1 with Hofer oscillation >= C n for n<=10 (min ratio " + num(worst) + ", C=" + num(rows[0].target) +
                      "); epsilon map oscillation " + num(rows.back().hofer));
}

// ---------------------------------------------------------------- trace

Word reduced_letters(const BraidWord& b) { return free_reduce(b.letters); }

void criterion9() {
    bool ok = true;
    std::ostringstream detail;
    auto disc = disc_model();
    std::vector<Point> pair{{-0.2, 0.05}, {0.25, -0.05}};
    int twist_ok = 0;
    for (int k = -5; k <= 5; ++k) {
        if (k == 0) continue;
        auto b = extract_braid(build_loops(radial_twist(disc, {0, 0}, 0.5, 0.7, k), pair, disc));
        if (reduced_letters(b) == power(Word{1}, 2 * k)) ++twist_ok;
    }
    ok = ok && twist_ok == 10;
    detail << "full twists " << twist_ok << "/10; ";

    auto torus = torus_model();
    auto band = annulus_twist(AnnulusChart{AnnulusChart::band, {0.4, 0.05, 0.35, 1.0}, {}, 0, 0, 0.3, 1}, torus);
    auto tw = extract_pi1(build_loops(band, {{0.6, 0.5}}, torus))[0].letters;
    auto g2 = genus2_model();
    auto a1 = alpha1_twist(0.01);
    const auto* seg = dynamic_cast<const TwistSegment*>(a1.pieces[0].segment.get());
    Point u = seg->chart_point(1.4, 0.3);
    Word gw = cyclic_reduce(octagon().dehn().reduce(extract_pi1(build_loops(a1, {u}, g2))[0].letters));
    bool wraps = tw == Word{1} && gw == Word{1};
    ok = ok && wraps;
    detail << "torus wrap " << to_string(tw, Alphabet::surface) << ", genus-2 wrap (cyclically reduced) " << to_string(gw, Alphabet::surface) << "; ";

    // refinement corpus: 30 disc braids on 3 strands, 10 torus and 10 genus-2 loops
    std::mt19937_64 rng(909);
    Rng pts(909, 0);
    TraceOptions fine;
    fine.density = 2.0;
    int stable = 0, cases = 0, collisions = 0;
    while (cases < 50) {
        Isotopy iso;
        SurfaceModel m;
        if (cases < 30) {
            m = disc;
            iso = compose(random_disc_isotopy(rng), random_disc_isotopy(rng));
        } else if (cases < 40) {
            m = torus;
            std::uniform_real_distribution<double> u01(0, 1);
            AnnulusChart ch{AnnulusChart::band, {0.4, 0.05, 0.35, 0.5 + u01(rng)}, {}, 0, static_cast<int>(u01(rng) * 2), u01(rng), 1};
            iso = compose(annulus_twist(ch, m), hamiltonian_flow(HamiltonianField::from_expression("sin(2*pi*x)*cos(2*pi*y)/(2*pi)", m)));
        } else {
            m = g2;
            iso = compose(alpha1_twist(0.1), figure_eight_pair(2, m, 0.3, 2.5, 2.8736).g);
        }
        int n = m.kind == SurfaceKind::disc ? 3 : 1;
        auto x = sample_configuration(m, n, pts);
        try {
            auto coarse = build_loops(iso, x, m), dense = build_loops(iso, x, m, fine);
            bool same;
            if (m.kind == SurfaceKind::disc) {
                same = reduced_letters(extract_braid(coarse)) == reduced_letters(extract_braid(dense));
            } else {
                auto reduce = [&](const Word& w) { return m.kind == SurfaceKind::genus2 ? octagon().dehn().reduce(w) : free_reduce(w); };
                same = reduce(extract_pi1(coarse)[0].letters) == reduce(extract_pi1(dense)[0].letters);
            }
            if (same) ++stable;
            ++cases;
        } catch (const TraceCollision&) {
            ++collisions;  // a configuration passing through a coincidence; draw again
        }
    }
    ok = ok && stable == 50;
    detail << "refinement-stable " << stable << "/50 (" << collisions << " redraws)";
    report(9, ok, detail.str());
}

// ---------------------------------------------------------------- quasi-morphism bound for Phi_2

void criterion10() {
    std::mt19937_64 rng(1010);
    auto lk = linking_qm(1, 2);
    double D = *lk.declared_defect, vol = configuration_volume(disc_model(), 2);
    double worst = 0;
    int bad = 0;
    for (int k = 0; k < 10; ++k) {
        auto f = random_disc_isotopy(rng), g = random_disc_isotopy(rng);
        EstimatorConfig c;
        c.n = 2;
        c.samples = 2000;
        c.seed = 2000 + k;
        auto efg = phi_n(lk, compose(f, g), c), eg = phi_n(lk, g, c);
        // Phi(f) on the same draws pushed forward by g, which preserves the measure
        EstimatorConfig cf = c;
        cf.config_map = [g](const std::vector<Point>& x) {
            std::vector<Point> y;
            for (const auto& p : x) y.push_back(time_one(g, p));
            return y;
        };
        auto ef = phi_n(lk, f, cf);
        double defect = std::abs(efg.value - ef.value - eg.value);
        double sigma = std::sqrt(efg.std_error * efg.std_error + ef.std_error * ef.std_error + eg.std_error * eg.std_error);
        double bound = vol * D + 3 * sigma;
        worst = std::max(worst, defect / bound);
        if (defect > bound) ++bad;
    }
    report(10, bad == 0, "three-term defect of Phi_2(lk) on 10 random disc pairs: worst defect/bound " + num(worst, 3) + ", " +
                             std::to_string(bad) + " violations");
}

// ---------------------------------------------------------------- determinism

void criterion11() {
    auto iso = load_isotopy(GGQM_SOURCE_DIR "/examples_src/isotopies/disc_radial.json");
    auto g2 = load_isotopy(GGQM_SOURCE_DIR "/examples_src/isotopies/genus2_alpha1.json");
    std::vector<std::string> payloads;
    bool ok = true;
    for (int workers : {1, 2, 4, 1}) {
        EstimatorConfig c;
        c.n = 2;
        c.samples = 600;
        c.seed = 77;
        c.workers = workers;
        std::string a = to_json(phi_n(linking_qm(1, 2), iso, c)).dump();
        EstimatorConfig h = c;
        h.n = 1;
        h.powers = {1, 2, 4};
        h.samples = 200;
        std::string b = to_json(phi_n_homogenized(make_qm("brooks:a1 b1 b1"), g2, h)).dump();
        std::string d = to_json(calabi_disc(iso, 600, 77, workers)).dump();
        payloads.push_back(a + b + d);
    }
    for (const auto& p : payloads) ok = ok && p == payloads[0];
    report(11, ok, "estimate, homogenized and calabi payloads byte-identical across workers {1,2,4} and a repeat (" +
                       std::to_string(payloads[0].size()) + " bytes)");
}

}  // namespace

// optional arguments select criteria by number
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
    std::vector<std::pair<int, std::function<void()>>> steps{{1, criterion1}, {2, criterion2},  {3, criterion3}, {4, criterion4},
                                                             {5, criterion5}, {6, criterion6},  {7, criterion7}, {8, criterion8},
                                                             {9, criterion9}, {10, criterion10}, {11, criterion11}};
    for (auto& [id, step] : steps) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        try {
            step();
        } catch (const std::exception& e) {
            report(id, false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "  criterion " << id << ": " << fmt(secs, 3) << " s\n";
    }
    return failures == 0 ? 0 : 1;
}
