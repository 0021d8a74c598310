#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ggqm/quasimorphism.hpp"
#include "ggqm/rng.hpp"
#include "ggqm/trace.hpp"

namespace ggqm {

struct GGEstimate {
    double value = 0;      // integral scaling: mean x vol(X_n)
    double std_error = 0;  // of value
    double mean = 0;       // probabilistic scaling
    long samples = 0;      // accepted configurations
    long rejected = 0;
    int n = 0;
    std::string qm, isotopy, label = "Phi";
    int power = 1;
    std::uint64_t seed = 0;
    double volume = 1;
};

struct EstimatorConfig {
    int n = 2;
    long samples = 10000;
    std::uint64_t seed = 1;
    std::vector<int> powers{1};
    int workers = 0;  // 0: GGQM_WORKERS or 1
    std::optional<std::vector<Point>> basepoints;
    double max_reject_fraction = 0.05;
    int attempts_per_slot = 8;
    TraceOptions trace;
    // configurations are pushed through this map before tracing (paired experiments)
    std::function<std::vector<Point>(const std::vector<Point>&)> config_map;
};

inline int worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* e = std::getenv("GGQM_WORKERS")) {
        int w = std::atoi(e);
        if (w > 0) return w;
    }
    return 1;
}

// Neumaier summation
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0, c_ = 0;
};

// Per-slot values phi(gamma(f^p; x))/p for each power; NaN marks a dropped slot.
struct SampleTable {
    std::vector<int> powers;
    std::vector<std::vector<double>> values;  // [slot][power index]
    std::vector<std::vector<Point>> configs;
    long rejected = 0;
    double volume = 1;
};

inline double configuration_volume(const SurfaceModel& m, int n) { return std::pow(m.total_area, n); }

inline void check_compatible(const QuasiMorphism& q, const SurfaceModel& m, int n) {
    if (m.planar()) {
        if (q.domain == Domain::surface_group) throw std::invalid_argument("qm '" + q.name + "' expects surface-group words, trace yields braids");
        if (n == 1 && m.kind == SurfaceKind::annulus && q.domain != Domain::free_pattern)
            throw std::invalid_argument("annulus n=1 traces yield winding words; use a surface-alphabet qm");
        return;
    }
    if (n != 1) throw std::invalid_argument("n > 1 on closed surfaces is not supported");
    if (q.domain == Domain::braid || q.domain == Domain::pure_braid)
        throw std::invalid_argument("qm '" + q.name + "' expects braids, trace yields surface words");
}

namespace detail {

inline std::vector<Word> trace_words(const Isotopy& iso, const SurfaceModel& m, const std::vector<Point>& z,
                                     const std::vector<Point>& x, const std::vector<int>& powers, const TraceOptions& o) {
    std::vector<Word> out;
    if (m.closed()) {
        for (auto& w : trace_pi1_exact(iso, m, z[0], x[0], powers)) out.push_back(w.letters);
    } else if (x.size() == 1) {
        if (m.kind == SurfaceKind::disc) return std::vector<Word>(powers.size());
        for (int p : powers) {
            auto loop = build_loops(iso, x, m, o, z, p);
            out.push_back(extract_pi1(loop)[0].letters);
        }
    } else {
        for (auto& b : trace_braids(iso, m, z, x, powers, o)) out.push_back(b.letters);
    }
    return out;
}

}  // namespace detail

// Evaluates several qms on the same traced words.
inline std::vector<SampleTable> sample_values_multi(const std::vector<QuasiMorphism>& qms, const Isotopy& iso,
                                                    const EstimatorConfig& cfg) {
    const SurfaceModel& m = iso.model;
    if (cfg.samples < 1) throw std::invalid_argument("samples must be positive");
    if (cfg.powers.empty()) throw std::invalid_argument("power schedule is empty");
    for (std::size_t k = 0; k < cfg.powers.size(); ++k)
        if (cfg.powers[k] < 1 || (k && cfg.powers[k] <= cfg.powers[k - 1]))
            throw std::invalid_argument("powers must be positive and increasing");
    for (const auto& q : qms) check_compatible(q, m, cfg.n);
    auto z = cfg.basepoints ? *cfg.basepoints : default_basepoints(m, cfg.n);
    if (static_cast<int>(z.size()) != cfg.n) throw std::invalid_argument("basepoint count differs from n");

    auto N = static_cast<std::size_t>(cfg.samples);
    std::vector<SampleTable> tables(qms.size());
    for (auto& t : tables) {
        t.powers = cfg.powers;
        t.values.assign(N, {});
        t.configs.assign(N, {});
        t.volume = configuration_volume(m, cfg.n);
    }
    std::vector<int> rejections(N, 0);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    auto work = [&](std::size_t k) {
        Rng rng(cfg.seed, k);
        for (int attempt = 0; attempt < cfg.attempts_per_slot; ++attempt) {
            try {
                auto x = sample_configuration(m, cfg.n, rng);
                if (cfg.config_map) x = cfg.config_map(x);
                auto words = detail::trace_words(iso, m, z, x, cfg.powers, cfg.trace);
                for (std::size_t q = 0; q < qms.size(); ++q) {
                    std::vector<double> v;
                    for (std::size_t i = 0; i < words.size(); ++i) v.push_back(qms[q](words[i]) / cfg.powers[i]);
                    tables[q].values[k] = std::move(v);
                    tables[q].configs[k] = x;
                }
                return;
            } catch (const TraceCollision&) {
            } catch (const DegenerateProjection&) {
            } catch (const StepUnderflow&) {
            } catch (const StepTooLarge&) {
            }
            ++rejections[k];
        }
        for (auto& t : tables) t.values[k].assign(cfg.powers.size(), nan);
    };

    int W = worker_count(cfg.workers);
    if (W <= 1) {
        for (std::size_t k = 0; k < N; ++k) work(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr err;
        std::mutex err_mu;
        for (int w = 0; w < W; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t k = next.fetch_add(1);
                    if (k >= N) return;
                    try {
                        work(k);
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(err_mu);
                        if (!err) err = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (err) std::rethrow_exception(err);
    }
    long rej = 0;
    for (int r : rejections) rej += r;
    if (static_cast<double>(rej) > cfg.max_reject_fraction * static_cast<double>(cfg.samples))
        throw std::runtime_error("excessive rejection rate: " + std::to_string(rej) + " of " + std::to_string(cfg.samples));
    for (auto& t : tables) t.rejected = rej;
    return tables;
}

inline SampleTable sample_values(const QuasiMorphism& q, const Isotopy& iso, const EstimatorConfig& cfg) {
    return sample_values_multi({q}, iso, cfg)[0];
}

// Mean and standard error of a per-slot statistic, summed in slot order.
inline GGEstimate summarize(const std::vector<double>& vals, double volume) {
    CompensatedSum s, s2;
    long n = 0;
    for (double v : vals)
        if (!std::isnan(v)) {
            s.add(v);
            ++n;
        }
    GGEstimate e;
    e.samples = n;
    e.volume = volume;
    if (n == 0) return e;
    e.mean = s.value() / static_cast<double>(n);
    for (double v : vals)
        if (!std::isnan(v)) s2.add((v - e.mean) * (v - e.mean));
    double var = n > 1 ? s2.value() / static_cast<double>(n - 1) : 0.0;
    e.value = e.mean * volume;
    e.std_error = std::sqrt(var / static_cast<double>(n)) * volume;
    return e;
}

inline GGEstimate estimate_at(const SampleTable& t, std::size_t power_index) {
    std::vector<double> col;
    for (const auto& row : t.values) col.push_back(row[power_index]);
    auto e = summarize(col, t.volume);
    e.rejected = t.rejected;
    e.power = t.powers[power_index];
    return e;
}

inline void label_estimate(GGEstimate& e, const QuasiMorphism& q, const Isotopy& iso, const EstimatorConfig& cfg) {
    e.n = cfg.n;
    e.qm = q.name;
    e.isotopy = iso.id;
    e.seed = cfg.seed;
}

inline GGEstimate phi_n(const QuasiMorphism& q, const Isotopy& iso, EstimatorConfig cfg) {
    cfg.powers = {1};
    auto t = sample_values(q, iso, cfg);
    auto e = estimate_at(t, 0);
    label_estimate(e, q, iso, cfg);
    return e;
}

struct HomogenizedEstimate {
    GGEstimate limit;
    std::vector<GGEstimate> per_power;
    HomogenizationReport report;
};

// Aitken limit of the per-power means, falling back to the last value when the jump is implausible.
inline HomogenizedEstimate homogenize_table(const SampleTable& t) {
    HomogenizedEstimate h;
    std::vector<double> vals;
    for (std::size_t i = 0; i < t.powers.size(); ++i) {
        h.per_power.push_back(estimate_at(t, i));
        vals.push_back(h.per_power.back().value);
    }
    const GGEstimate& last = h.per_power.back();
    double tol = 3 * last.std_error + 1e-12;
    h.report = extrapolate(t.powers, vals, tol);
    if (vals.size() >= 2) {
        double step = std::abs(vals.back() - vals[vals.size() - 2]);
        if (std::abs(h.report.limit - vals.back()) > 2 * step + tol) {
            h.report.limit = vals.back();
            h.report.error_bound = step;
            h.report.converged = false;
        }
        if (vals.size() >= 3) {
            // successive extrapolants disagree beyond the confidence interval
            double prev = vals.size() >= 4 ? aitken(vals[vals.size() - 4], vals[vals.size() - 3], vals[vals.size() - 2])
                                           : vals[vals.size() - 2];
            h.report.converged = std::abs(h.report.limit - prev) <= tol + h.report.error_bound;
        }
    } else {
        h.report.converged = false;
    }
    h.limit = last;
    h.limit.value = h.report.limit;
    h.limit.mean = h.report.limit / t.volume;
    h.limit.power = 0;
    return h;
}

inline HomogenizedEstimate phi_n_homogenized(const QuasiMorphism& q, const Isotopy& iso, EstimatorConfig cfg) {
    if (q.is_homomorphism) {
        // homomorphisms need no homogenization: the raw integral is already the limit
        cfg.powers = {1};
        auto t = sample_values(q, iso, cfg);
        HomogenizedEstimate h;
        h.per_power.push_back(estimate_at(t, 0));
        h.limit = h.per_power[0];
        h.limit.power = 0;
        h.report.powers = {1};
        h.report.values = {h.limit.value};
        h.report.limit = h.limit.value;
        h.report.converged = true;
        for (auto& e : h.per_power) label_estimate(e, q, iso, cfg);
        label_estimate(h.limit, q, iso, cfg);
        return h;
    }
    auto t = sample_values(q, iso, cfg);
    auto h = homogenize_table(t);
    for (auto& e : h.per_power) label_estimate(e, q, iso, cfg);
    label_estimate(h.limit, q, iso, cfg);
    return h;
}

struct CalabiResult {
    std::vector<double> value, std_error;
    std::vector<std::string> components;
    std::string method;
    long samples = 0, rejected = 0;
};

inline void require_compact_support(const Isotopy& iso) {
    // the isotopy must fix a neighbourhood of the boundary circle
    for (int k = 0; k < 64; ++k) {
        double a = 2 * M_PI * k / 64;
        for (double r : {0.999, 0.99}) {
            Point p{r * std::cos(a), r * std::sin(a)};
            for (const auto& pc : iso.pieces)
                if (pc.segment->in_support(p)) throw std::invalid_argument("isotopy is not compactly supported in the open disc");
        }
    }
}

inline CalabiResult calabi_disc(const Isotopy& iso, long samples, std::uint64_t seed, int workers = 0) {
    if (iso.model.kind != SurfaceKind::disc) throw std::invalid_argument("calabi_disc needs the disc model");
    require_compact_support(iso);
    EstimatorConfig cfg;
    cfg.n = 2;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.workers = workers;
    auto e = phi_n(linking_qm(1, 2), iso, cfg);
    return {{e.value}, {e.std_error}, {"C"}, "Phi2-lk", e.samples, e.rejected};
}

inline CalabiResult calabi_surface(const Isotopy& iso, long samples, std::uint64_t seed, int workers = 0) {
    const SurfaceModel& m = iso.model;
    if (!m.closed()) throw std::invalid_argument("calabi_surface needs the torus or a genus >= 2 model");
    std::vector<QuasiMorphism> qms;
    std::vector<std::string> names;
    for (const char* kind : {"a", "b"})
        for (int i = 1; i <= m.genus; ++i) {
            names.push_back(kind + std::to_string(i));
            qms.push_back(pi_count_qm(names.back(), m.genus));
        }
    EstimatorConfig cfg;
    cfg.n = 1;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.workers = workers;
    auto tables = sample_values_multi(qms, iso, cfg);
    CalabiResult r;
    r.components = names;
    r.method = "pi-count";
    for (const auto& t : tables) {
        auto e = estimate_at(t, 0);
        r.value.push_back(e.value);
        r.std_error.push_back(e.std_error);
        r.samples = e.samples;
        r.rejected = e.rejected;
    }
    return r;
}

inline HomogenizedEstimate polterovich_psi(const QuasiMorphism& q, const Isotopy& iso, EstimatorConfig cfg) {
    if (iso.model.kind == SurfaceKind::disc) throw std::invalid_argument("the n=1 construction needs a surface with nontrivial pi1");
    cfg.n = 1;
    auto h = phi_n_homogenized(q, iso, cfg);
    h.limit.label = "Psi-bar";
    for (auto& e : h.per_power) e.label = "Psi";
    return h;
}

}  // namespace ggqm
