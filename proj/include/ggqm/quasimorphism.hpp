#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggqm/braid.hpp"
#include "ggqm/surface_group.hpp"
#include "ggqm/words.hpp"

namespace ggqm {

enum class Domain { braid, pure_braid, surface_group, free_pattern };

inline const char* to_string(Domain d) {
    switch (d) {
        case Domain::braid: return "B_n";
        case Domain::pure_braid: return "P_n";
        case Domain::surface_group: return "pi1";
        default: return "F2";
    }
}

struct QuasiMorphism {
    std::string name;
    Domain domain = Domain::braid;
    std::function<double(const Word&)> evaluator;
    std::optional<double> declared_defect;
    bool is_homomorphism = false;
    bool homogeneous = false;
    // exact stable value when the evaluator admits one (counting functions on free words)
    std::function<std::optional<double>(const Word&)> exact_homogenized;

    double operator()(const Word& w) const { return evaluator(w); }
};

// non-overlapping, left-to-right greedy count
inline int count_occurrences(const Word& w, const Word& pattern) {
    int c = 0;
    std::size_t L = pattern.size(), i = 0;
    while (L && i + L <= w.size()) {
        if (std::equal(pattern.begin(), pattern.end(), w.begin() + static_cast<long>(i))) {
            ++c;
            i += L;
        } else {
            ++i;
        }
    }
    return c;
}

inline bool is_proper_power(const Word& w) {
    std::size_t n = w.size();
    for (std::size_t d = 1; d < n; ++d) {
        if (n % d) continue;
        bool rep = true;
        for (std::size_t i = d; i < n && rep; ++i) rep = w[i] == w[i - d];
        if (rep) return true;
    }
    return false;
}

// Greedy scan over the bi-infinite periodic word u^inf: occurrences per period.
inline double periodic_density(const Word& u, const Word& pattern) {
    std::size_t n = u.size(), L = pattern.size();
    if (n == 0) return 0.0;
    auto match_at = [&](std::size_t pos) {
        for (std::size_t k = 0; k < L; ++k)
            if (u[(pos + k) % n] != pattern[k]) return false;
        return true;
    };
    // state = scan position mod n; follow until a state repeats
    std::vector<long> seen_step(n, -1);
    std::vector<long> seen_count(n, 0);
    std::vector<long> seen_pos(n, 0);
    long pos = 0, count = 0, step = 0;
    while (true) {
        std::size_t s = static_cast<std::size_t>(pos % static_cast<long>(n));
        if (seen_step[s] >= 0) {
            long dpos = pos - seen_pos[s];
            long dcount = count - seen_count[s];
            return static_cast<double>(dcount) * static_cast<double>(n) / static_cast<double>(dpos);
        }
        seen_step[s] = step;
        seen_count[s] = count;
        seen_pos[s] = pos;
        if (match_at(s)) {
            ++count;
            pos += static_cast<long>(L);
        } else {
            ++pos;
        }
        ++step;
    }
}

inline QuasiMorphism expsum_qm() {
    QuasiMorphism q;
    q.name = "expsum";
    q.domain = Domain::braid;
    q.evaluator = [](const Word& w) { return static_cast<double>(exponent_sum(w)); };
    q.declared_defect = 0.0;
    q.is_homomorphism = true;
    q.homogeneous = true;
    return q;
}

// Crossing linking of the strands starting at i and j. Additive on pure braids (and on B_2).
inline QuasiMorphism linking_qm(int i, int j) {
    if (i < 1 || j < 1 || i == j) throw std::invalid_argument("lk needs two distinct strands");
    QuasiMorphism q;
    q.name = "lk:" + std::to_string(i) + "," + std::to_string(j);
    q.domain = Domain::pure_braid;
    int need = std::max(i, j);
    q.evaluator = [i, j, need](const Word& w) {
        int n = need;
        for (Letter l : w) n = std::max(n, std::abs(l) + 1);
        return crossing_linking(w, n, i, j);
    };
    q.declared_defect = 0.0;
    q.is_homomorphism = true;
    q.homogeneous = true;
    return q;
}

inline QuasiMorphism pi_count_qm(const std::string& label, int genus) {
    int code = generator_code(label, genus);
    QuasiMorphism q;
    q.name = "pi:" + label;
    q.domain = Domain::surface_group;
    q.evaluator = [code](const Word& w) { return static_cast<double>(pi_count(w, code)); };
    q.declared_defect = 0.0;
    q.is_homomorphism = true;
    q.homogeneous = true;
    return q;
}

// Defect bound for non-overlapping counting differences on reduced words.
inline constexpr double brooks_defect_bound = 3.0;

inline QuasiMorphism brooks_counting_qm(const Word& pattern, Domain domain, int genus = 2) {
    if (pattern.empty()) throw std::invalid_argument("Brooks pattern must be nonempty");
    if (free_reduce(pattern) != pattern) throw std::invalid_argument("Brooks pattern must be freely reduced");
    if (is_proper_power(pattern)) throw std::invalid_argument("Brooks pattern must not be a proper power");
    Word inv = invert(pattern);
    QuasiMorphism q;
    Alphabet alpha = domain == Domain::braid || domain == Domain::pure_braid ? Alphabet::braid : Alphabet::surface;
    q.name = "brooks:" + to_string(pattern, alpha);
    q.domain = domain;
    std::shared_ptr<DehnReducer> dehn;
    if (domain == Domain::surface_group && genus >= 2) dehn = std::make_shared<DehnReducer>(genus);
    q.evaluator = [pattern, inv, dehn](const Word& w) {
        Word r = dehn ? dehn->reduce(w) : free_reduce(w);
        return static_cast<double>(count_occurrences(r, pattern) - count_occurrences(r, inv));
    };
    q.declared_defect = brooks_defect_bound;
    if (!dehn)
        q.exact_homogenized = [pattern, inv](const Word& w) -> std::optional<double> {
            Word u = cyclic_reduce(w);
            if (u.empty()) return 0.0;
            return periodic_density(u, pattern) - periodic_density(u, inv);
        };
    return q;
}

namespace detail {

// One pass of the lifted projective action of B_3 on directions, applied right to left.
// (x, y) carries the direction; each image is taken on the side within a quarter turn of
// its preimage, and the return value is the total lifted angle change.
inline double lifted_pass(const Word& w, double& x, double& y) {
    double turned = 0;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        Letter l = *it;
        double nx = x, ny = y;
        if (std::abs(l) == 1)
            nx += l > 0 ? y : -y;
        else
            ny += l > 0 ? -x : x;
        if (x * nx + y * ny < 0) {
            nx = -nx;
            ny = -ny;
        }
        turned += std::atan2(x * ny - y * nx, x * nx + y * ny);
        double n = std::hypot(nx, ny);
        x = nx / n;
        y = ny / n;
    }
    return turned;
}

}  // namespace detail

// Translation number of the lifted action, in half-turns of the direction circle, rounded
// to sixths (its exact lattice for B_3). k passes land within 1/k of the true value, so
// 24 passes leave a margin of half a lattice step.
inline double b3_translation_number(const Word& w, int iterations = 24) {
    if (w.empty()) return 0.0;
    double x = std::cos(0.3141592653589793), y = std::sin(0.3141592653589793), turned = 0;
    for (int k = 0; k < iterations; ++k) turned += detail::lifted_pass(w, x, y);
    double tau = turned / (M_PI * iterations);
    return std::round(6.0 * tau) / 6.0;
}

inline QuasiMorphism rademacher_b3() {
    QuasiMorphism q;
    q.name = "rademacher3";
    q.domain = Domain::braid;
    q.evaluator = [](const Word& w) {
        for (Letter l : w)
            if (std::abs(l) > 2) throw std::invalid_argument("rademacher3 evaluates 3-strand braids only");
        return static_cast<double>(exponent_sum(w)) + 6.0 * b3_translation_number(w);
    };
    q.declared_defect = 6.0;
    q.homogeneous = true;
    return q;
}

inline QuasiMorphism scaled(const QuasiMorphism& q, double c) {
    QuasiMorphism r = q;
    std::ostringstream os;
    os << c << "*" << q.name;
    r.name = os.str();
    auto f = q.evaluator;
    r.evaluator = [f, c](const Word& w) { return c * f(w); };
    if (q.declared_defect) r.declared_defect = std::abs(c) * *q.declared_defect;
    if (q.exact_homogenized) {
        auto h = q.exact_homogenized;
        r.exact_homogenized = [h, c](const Word& w) -> std::optional<double> {
            auto v = h(w);
            if (!v) return std::nullopt;
            return c * *v;
        };
    }
    return r;
}

inline QuasiMorphism linear_combination(double a, const QuasiMorphism& p, double b, const QuasiMorphism& q) {
    if (p.domain != q.domain) throw std::invalid_argument("linear combination across domains");
    QuasiMorphism r;
    std::ostringstream os;
    os << a << "*" << p.name << "+" << b << "*" << q.name;
    r.name = os.str();
    r.domain = p.domain;
    auto f = p.evaluator, g = q.evaluator;
    r.evaluator = [f, g, a, b](const Word& w) { return a * f(w) + b * g(w); };
    if (p.declared_defect && q.declared_defect)
        r.declared_defect = std::abs(a) * *p.declared_defect + std::abs(b) * *q.declared_defect;
    r.is_homomorphism = p.is_homomorphism && q.is_homomorphism;
    r.homogeneous = p.homogeneous && q.homogeneous;
    return r;
}

// lk:1,2 | expsum | brooks:<pattern> | rademacher3 | pi:<label>
inline QuasiMorphism make_qm(const std::string& spec, int genus = 2) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "expsum") return expsum_qm();
    if (head == "rademacher3") return rademacher_b3();
    if (head == "lk") {
        auto comma = arg.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("lk needs i,j");
        return linking_qm(std::stoi(arg.substr(0, comma)), std::stoi(arg.substr(comma + 1)));
    }
    if (head == "pi") return pi_count_qm(arg, genus);
    if (head == "brooks") {
        std::size_t k = arg.find_first_not_of(" \t");
        if (k == std::string::npos) throw std::invalid_argument("Brooks pattern must be nonempty");
        if (arg[k] == 's' || arg[k] == 'A') return brooks_counting_qm(parse_word(arg, Alphabet::braid), Domain::braid);
        Word p = parse_word(arg, Alphabet::surface);
        return brooks_counting_qm(p, genus >= 2 ? Domain::surface_group : Domain::free_pattern, genus);
    }
    throw std::invalid_argument("unknown quasi-morphism '" + spec + "'");
}

struct HomogenizationReport {
    std::vector<int> powers;
    std::vector<double> values;  // psi(w^p)/p
    double limit = 0.0;
    bool converged = false;
    double error_bound = 0.0;
};

inline double aitken(double x0, double x1, double x2) {
    double d1 = x1 - x0, d2 = x2 - x1, den = d2 - d1;
    double scale = std::max({1.0, std::abs(x0), std::abs(x1), std::abs(x2)});
    if (std::abs(den) <= 1e-13 * scale) return x2;
    return x2 - d2 * d2 / den;
}

// Extrapolate a sequence of psi(w^p)/p over increasing powers.
inline HomogenizationReport extrapolate(const std::vector<int>& powers, const std::vector<double>& values,
                                        double tolerance) {
    HomogenizationReport r;
    r.powers = powers;
    r.values = values;
    if (values.empty()) return r;
    std::size_t n = values.size();
    if (n < 3) {
        r.limit = values.back();
        r.converged = n >= 2 && std::abs(values[n - 1] - values[n - 2]) < tolerance;
    } else {
        std::vector<double> ext;
        for (std::size_t k = 2; k < n; ++k) ext.push_back(aitken(values[k - 2], values[k - 1], values[k]));
        r.limit = ext.back();
        r.converged = ext.size() >= 2 ? std::abs(ext.back() - ext[ext.size() - 2]) < tolerance
                                      : std::abs(values[n - 1] - values[n - 2]) < tolerance;
    }
    r.error_bound = std::abs(r.limit - values.back());
    return r;
}

inline const std::vector<int>& default_power_schedule() {
    static const std::vector<int> s{1, 2, 4, 8, 16, 32};
    return s;
}

inline HomogenizationReport homogenize(const QuasiMorphism& q, const Word& w,
                                       const std::vector<int>& schedule = default_power_schedule()) {
    std::vector<double> vals;
    for (int p : schedule) {
        if (p < 1) throw std::invalid_argument("powers must be positive");
        vals.push_back(q(power(w, p)) / p);
    }
    if (q.is_homomorphism || q.homogeneous) {
        HomogenizationReport r;
        r.powers = schedule;
        r.values = vals;
        r.limit = q(w);
        r.converged = true;
        r.error_bound = 0.0;
        return r;
    }
    auto r = extrapolate(schedule, vals, 1e-9);
    if (q.exact_homogenized) {
        if (auto e = q.exact_homogenized(w)) {
            r.limit = *e;
            r.converged = true;
            r.error_bound = 0.0;
        }
    }
    return r;
}

inline double stable_value(const QuasiMorphism& q, const Word& w) { return homogenize(q, w).limit; }

using WordPairSampler = std::function<std::pair<Word, Word>(std::mt19937_64&)>;

inline Word random_reduced_word(std::mt19937_64& rng, int generators, int max_len) {
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<int> gen(1, generators);
    std::bernoulli_distribution sgn(0.5);
    int L = len(rng);
    Word w;
    while (static_cast<int>(w.size()) < L) {
        Letter l = gen(rng) * (sgn(rng) ? 1 : -1);
        if (!w.empty() && w.back() == -l) continue;
        w.push_back(l);
    }
    return w;
}

inline WordPairSampler uniform_pair_sampler(int generators, int max_len) {
    return [generators, max_len](std::mt19937_64& rng) {
        Word u = random_reduced_word(rng, generators, max_len);
        Word v = random_reduced_word(rng, generators, max_len);
        return std::make_pair(u, v);
    };
}

inline double defect_estimate(const QuasiMorphism& q, const WordPairSampler& sampler, int trials,
                              std::uint64_t seed = 1) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::mt19937_64 rng(seed);
    double d = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto [u, v] = sampler(rng);
        Word uv = u;
        uv.insert(uv.end(), v.begin(), v.end());
        d = std::max(d, std::abs(q(uv) - q(u) - q(v)));
    }
    return d;
}

// All freely reduced words of length <= max_len over generators 1..g (shortlex order).
inline std::vector<Word> enumerate_reduced_words(int generators, int max_len) {
    std::vector<Word> out{Word{}};
    std::size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        std::size_t end = out.size();
        for (std::size_t k = begin; k < end; ++k) {
            for (int g = 1; g <= generators; ++g)
                for (int s : {1, -1}) {
                    Letter l = s * g;
                    const Word& base = out[k];
                    if (!base.empty() && base.back() == -l) continue;
                    Word w = base;
                    w.push_back(l);
                    out.push_back(std::move(w));
                }
        }
        begin = end;
    }
    return out;
}

struct ConjugationReport {
    double max_deviation = 0.0;
    double allowance = 0.0;  // homogenization error carried by the values compared
    std::size_t conjugators = 0;
};

inline ConjugationReport conjugation_invariance_check(const QuasiMorphism& q, const Word& w,
                                                      const std::vector<Word>& conjugators,
                                                      const std::vector<int>& schedule = default_power_schedule()) {
    ConjugationReport r;
    auto base = homogenize(q, w, schedule);
    for (const Word& g : conjugators) {
        Word c = g;
        c.insert(c.end(), w.begin(), w.end());
        Word gi = invert(g);
        c.insert(c.end(), gi.begin(), gi.end());
        auto h = homogenize(q, c, schedule);
        r.max_deviation = std::max(r.max_deviation, std::abs(h.limit - base.limit));
        r.allowance = std::max(r.allowance, h.error_bound + base.error_bound);
        ++r.conjugators;
    }
    return r;
}

}  // namespace ggqm
