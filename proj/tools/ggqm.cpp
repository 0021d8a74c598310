#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ggqm/io.hpp"

using namespace ggqm;
namespace fs = std::filesystem;

namespace {

std::string now_utc() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Cli {
    RunConfig cfg;
    std::string config_file, powers, dump_dir;
    std::vector<std::string> isotopies, qms, points;
    bool isotopy_given = false;
};

// flags > file > defaults
void resolve(Cli& c, CLI::App& sub) {
    RunConfig base;
    if (!c.config_file.empty()) apply_key_values(base, parse_key_values(read_file(c.config_file)));
    auto given = [&](const char* name) { return sub.count(name) > 0; };
    RunConfig& r = c.cfg;
    if (!given("--n")) r.n = base.n;
    if (!given("--samples")) r.samples = base.samples;
    if (!given("--seed")) r.seed = base.seed;
    if (!given("--workers")) r.workers = base.workers;
    if (!given("--output")) r.output = base.output;
    r.powers = given("--powers") ? parse_int_list(c.powers) : base.powers;
    r.qms = given("--qm") ? c.qms : base.qms;
    r.surface = base.surface;
    r.basepoints = base.basepoints;
    c.isotopy_given = given("--isotopy") || (!c.config_file.empty() && parse_key_values(read_file(c.config_file)).count("isotopy"));
    r.isotopies.clear();
    for (const auto& s : given("--isotopy") ? c.isotopies : base.isotopies)
        if (!s.empty()) r.isotopies.push_back(s);
    for (const auto& p : r.isotopies)
        if (!fs::exists(p)) throw std::runtime_error("isotopy file '" + p + "' does not exist");
}

Isotopy load_checked(const RunConfig& r, const std::string& path) {
    Isotopy iso = load_isotopy(path);
    if (!r.surface.empty() && model_name(iso.model) != r.surface)
        throw std::runtime_error("isotopy '" + path + "' lives on " + model_name(iso.model) + ", config asks for " + r.surface);
    return iso;
}

void emit(const RunConfig& r, const json& rec) {
    fs::create_directories(r.output);
    append_line((fs::path(r.output) / "results.jsonl").string(), rec.dump());
    std::cout << rec["payload"].dump() << "\n";
}

EstimatorConfig estimator_config(const RunConfig& r) {
    EstimatorConfig ec;
    ec.n = r.n;
    ec.samples = r.samples;
    ec.seed = r.seed;
    ec.powers = r.powers;
    ec.workers = r.workers;
    if (!r.basepoints.empty()) ec.basepoints = r.basepoints;
    return ec;
}

int cmd_estimate(Cli& c, CLI::App& sub) {
    resolve(c, sub);
    const RunConfig& r = c.cfg;
    if (r.isotopies.size() != 1) throw std::runtime_error("estimate needs exactly one isotopy file");
    Isotopy iso = load_checked(r, r.isotopies[0]);
    for (const auto& spec : r.qms) {
        auto q = make_qm(spec, iso.model.genus);
        auto ec = estimator_config(r);
        json payload;
        std::string tag;
        if (r.powers.size() == 1 && r.powers[0] == 1) {
            payload = to_json(phi_n(q, iso, ec));
            tag = "gg-integral";
        } else {
            payload = to_json(phi_n_homogenized(q, iso, ec));
            tag = "homogenized-gg";
        }
        json cj = r.to_json();
        cj["qms"] = json::array({spec});
        emit(r, result_record("estimate", tag, cj, payload, now_utc()));
    }
    return 0;
}

int cmd_calabi(Cli& c, CLI::App& sub) {
    resolve(c, sub);
    const RunConfig& r = c.cfg;
    if (r.isotopies.size() != 1) throw std::runtime_error("calabi needs exactly one isotopy file");
    Isotopy iso = load_checked(r, r.isotopies[0]);
    bool disc = iso.model.kind == SurfaceKind::disc;
    auto res = disc ? calabi_disc(iso, r.samples, r.seed, r.workers) : calabi_surface(iso, r.samples, r.seed, r.workers);
    emit(r, result_record("calabi", disc ? "calabi-disc" : "calabi-surface", r.to_json(), to_json(res), now_utc()));
    return 0;
}

int cmd_trace(Cli& c, CLI::App& sub) {
    resolve(c, sub);
    const RunConfig& r = c.cfg;
    if (r.isotopies.size() != 1) throw std::runtime_error("trace needs exactly one isotopy file");
    Isotopy iso = load_checked(r, r.isotopies[0]);
    std::vector<Point> x;
    for (const auto& p : c.points) {
        auto xy = split(p, ',');
        if (xy.size() != 2) throw std::runtime_error("points are given as x,y");
        x.push_back({std::stod(xy[0]), std::stod(xy[1])});
    }
    if (x.empty()) {
        Rng rng(r.seed, 0);
        x = sample_configuration(iso.model, r.n, rng);
    }
    std::optional<std::vector<Point>> z;
    if (!r.basepoints.empty()) z = r.basepoints;
    int reps = r.powers.empty() ? 1 : r.powers.back();
    TracedLoop loop = build_loops(iso, x, iso.model, {}, z, reps);
    json payload;
    std::vector<CrossingEvent> events;
    if (iso.model.planar() && x.size() > 1) {
        auto ex = extract_braid_detailed(loop);
        events = ex.events;
        payload["braid"] = to_string(ex.braid.letters, Alphabet::braid);
        payload["strands"] = ex.braid.strands;
    } else {
        json words = json::array();
        for (const auto& w : extract_pi1(loop)) words.push_back(to_string(w.letters, Alphabet::surface));
        payload["pi1"] = words;
    }
    json pts = json::array();
    for (const auto& p : x) pts.push_back({p.x, p.y});
    payload["config"] = pts;
    json bp = json::array();
    for (const auto& p : loop.basepoints) bp.push_back({p.x, p.y});
    payload["basepoints"] = bp;
    payload["power"] = reps;
    payload["samples"] = loop.times.size();
    if (!c.dump_dir.empty()) {
        fs::create_directories(c.dump_dir);
        write_file((fs::path(c.dump_dir) / "trace.json").string(), trace_dump(loop, events).dump(1) + "\n");
    }
    emit(r, result_record("trace", "trace", r.to_json(), payload, now_utc()));
    return 0;
}

struct ExperimentOpts {
    int m = 2;
    double ramp = 0.01, epsilon = 0.1;
    bool conjugate = false;
    int nmax = 10, kmax = 10;
};

int cmd_experiment(Cli& c, CLI::App& sub, const std::string& which, const ExperimentOpts& o) {
    resolve(c, sub);
    const RunConfig& r = c.cfg;
    fs::create_directories(r.output);
    auto out = [&](const std::string& name) { return (fs::path(r.output) / name).string(); };
    json cj = r.to_json();
    if (which == "embedding") {
        EmbeddingConfig ec;
        ec.m = o.m;
        ec.ramp = o.ramp;
        ec.epsilon = o.epsilon;
        ec.conjugate = o.conjugate;
        ec.samples = r.samples;
        ec.seed = r.seed;
        ec.workers = r.workers;
        if (sub.count("--powers")) ec.powers = r.powers;
        cj["m"] = ec.m;
        cj["ramp"] = ec.ramp;
        cj["conjugate"] = ec.conjugate;
        cj["powers"] = ec.powers;
        auto e = run_embedding(ec);
        std::string md = embedding_markdown(e);
        json bounds = json::array();
        md += "\n## norm bounds\n\n| d | lower | dual-family lower | upper |\n|---|---|---|---|\n";
        std::string csv = "k,lower,formula_lower,upper\n";
        for (int k = 0; k <= o.kmax; ++k) {
            std::vector<int> d(static_cast<std::size_t>(e.m), 0);
            d[0] = k;
            auto b = norm_lower_bound(e, d);
            bounds.push_back(to_json(b));
            md += "| (" + std::to_string(k) + (e.m > 1 ? ",0" : "") + ") | " + fmt(b.lower) + " | " + fmt(b.formula_lower) + " | " + fmt(b.upper) + " |\n";
            csv += std::to_string(k) + "," + fmt(b.lower, 10) + "," + fmt(b.formula_lower, 10) + "," + fmt(b.upper, 10) + "\n";
        }
        write_file(out("embedding.md"), md);
        write_file(out("embedding.csv"), embedding_csv(e));
        write_file(out("norm_bounds.csv"), csv);
        json payload = to_json(e);
        payload["norm_bounds"] = bounds;
        std::cout << md;
        emit(r, result_record("experiment-embedding", "delta-matrix", cj, payload, now_utc()));
    } else if (which == "vanishing") {
        std::vector<VanishingCase> cases;
        if (c.isotopy_given) {
            for (const auto& p : r.isotopies) {
                Isotopy iso = load_checked(r, p);
                for (const auto& spec : r.qms) cases.push_back({iso.id, iso, make_qm(spec, iso.model.genus), true, false});
            }
        } else {
            cases = default_vanishing_cases();
        }
        auto powers = sub.count("--powers") ? r.powers : std::vector<int>{1, 2, 4, 8, 16};
        cj["powers"] = powers;
        auto rows = autonomous_vanishing_suite(cases, r.samples, r.seed, powers, r.workers);
        write_file(out("vanishing.md"), vanishing_markdown(rows));
        write_file(out("vanishing.csv"), vanishing_csv(rows));
        std::cout << vanishing_markdown(rows);
        emit(r, result_record("experiment-vanishing", "autonomous-vanishing", cj, to_json(rows), now_utc()));
    } else if (which == "metrics") {
        std::vector<Isotopy> family;
        if (c.isotopy_given) {
            for (const auto& p : r.isotopies) family.push_back(load_checked(r, p));
        } else {
            family.push_back(alpha1_twist());
        }
        auto rows = metric_comparison(family, o.nmax, 0.01);
        write_file(out("metrics.md"), metric_markdown(rows));
        write_file(out("metrics.csv"), metric_csv(rows));
        std::cout << metric_markdown(rows);
        emit(r, result_record("experiment-metrics", "metric-divergence", cj, to_json(rows), now_utc()));
    } else {
        throw std::runtime_error("unknown experiment '" + which + "'");
    }
    return 0;
}

int cmd_selftest() {
    int fails = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++fails;
    };
    const Octagon& oct = octagon();
    check("octagon relator is the identity", oct.element(surface_relator(2)).distance_to_identity() < 1e-9);
    DehnReducer dehn(2);
    check("dehn reduces the relator", dehn.is_trivial(surface_relator(2)));
    check("dehn keeps a1 b1", !dehn.is_trivial({1, 2}));
    auto disc = disc_model();
    auto tw = radial_twist(disc, {0, 0}, 0.5, 0.8, 2.0);
    auto b = extract_braid(build_loops(tw, {{0.1, 0.05}, {-0.3, 0.2}}, disc));
    check("double full twist traces to s1^4", b.letters == Word{1, 1, 1, 1});
    auto torus = torus_model();
    AnnulusChart ch;
    ch.kind = AnnulusChart::band;
    ch.profile = {0.4, 0.1, 0.3, 1.0};
    ch.offset = 0.3;
    auto band = annulus_twist(ch, torus);
    auto w = extract_pi1(build_loops(band, {{0.4, 0.5}}, torus));
    check("torus band twist traces to a1", w[0].letters == Word{1});
    auto q = rademacher_b3();
    check("rademacher vanishes on s1 s2", std::abs(q({1, 2})) < 1e-9);
    return fails == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"braid quasi-morphism invariants of surface isotopies"};
    app.require_subcommand(1);
    Cli cli;
    ExperimentOpts eo;
    std::string which;

    auto common = [&](CLI::App* s) {
        s->add_option("--config", cli.config_file, "key = value config file");
        s->add_option("--isotopy", cli.isotopies, "isotopy JSON file");
        s->add_option("--qm", cli.qms, "quasi-morphism spec (lk:1,2 | expsum | rademacher3 | pi:a1 | brooks:<word>)");
        s->add_option("--n", cli.cfg.n, "number of points");
        s->add_option("--samples", cli.cfg.samples, "Monte Carlo configurations");
        s->add_option("--seed", cli.cfg.seed, "master seed");
        s->add_option("--powers", cli.powers, "power schedule, e.g. 1,2,4,8,16");
        s->add_option("--output", cli.cfg.output, "output directory");
        s->add_option("--workers", cli.cfg.workers, "worker threads (default GGQM_WORKERS or 1)");
    };
    auto* est = app.add_subcommand("estimate", "Monte Carlo estimate of Phi_n or its homogenization");
    common(est);
    auto* cal = app.add_subcommand("calabi", "Calabi invariant on the disc or a closed surface");
    common(cal);
    auto* tr = app.add_subcommand("trace", "trace loops and extract braid or pi1 words");
    common(tr);
    tr->add_option("--point", cli.points, "configuration point x,y (repeatable)");
    tr->add_option("--dump-trace", cli.dump_dir, "directory for the loop and crossing-event dump");
    auto* ex = app.add_subcommand("experiment", "scripted experiments");
    common(ex);
    ex->add_option("which", which, "embedding | vanishing | metrics")->required()->check(CLI::IsMember({"embedding", "vanishing", "metrics"}));
    ex->add_option("--m", eo.m, "number of figure-eight sites");
    ex->add_option("--ramp", eo.ramp, "ramp width as a fraction of the collar");
    ex->add_option("--epsilon", eo.epsilon, "near-identity tolerance");
    ex->add_flag("--conjugate", eo.conjugate, "conjugate the site maps");
    ex->add_option("--nmax", eo.nmax, "largest power in the metric table");
    ex->add_option("--kmax", eo.kmax, "largest exponent in the norm-bound table");
    auto* st = app.add_subcommand("selftest", "quick internal checks");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*est) return cmd_estimate(cli, *est);
        if (*cal) return cmd_calabi(cli, *cal);
        if (*tr) return cmd_trace(cli, *tr);
        if (*ex) return cmd_experiment(cli, *ex, which, eo);
        if (*st) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
