#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ggqm/estimator.hpp"
#include "ggqm/experiments.hpp"

namespace ggqm {

using json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Point json_point(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("points are [x, y] arrays");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline PlateauProfile json_profile(const json& j) {
    PlateauProfile p;
    p.r = j.value("r", p.r);
    p.r1 = j.value("r1", p.r1 * p.r);
    p.r2 = j.value("r2", p.r2 * p.r);
    p.turns = j.value("turns", p.turns);
    return p;
}

inline Isotopy isotopy_piece(const json& j, const SurfaceModel& m) {
    std::string type = j.at("type").get<std::string>();
    double duration = j.value("duration", 1.0);
    Isotopy iso;
    if (type == "identity") {
        iso = identity_isotopy(m);
    } else if (type == "radial") {
        iso = radial_hamiltonian(m, json_point(j.value("center", json::array({0.0, 0.0}))), j.at("H").get<std::string>(),
                                 j.at("support").get<double>(), duration);
    } else if (type == "radial-twist") {
        iso = radial_twist(m, json_point(j.value("center", json::array({0.0, 0.0}))), j.at("rho1").get<double>(),
                           j.at("rho2").get<double>(), j.value("turns", 1.0), duration);
    } else if (type == "hamiltonian") {
        iso = hamiltonian_flow(HamiltonianField::from_expression(j.at("H").get<std::string>(), m, j.value("scale", 1.0)), duration);
    } else if (type == "twist") {
        AnnulusChart ch;
        std::string kind = j.at("chart").get<std::string>();
        if (kind == "ring") {
            ch.kind = AnnulusChart::ring;
            ch.center = json_point(j.value("center", json::array({0.0, 0.0})));
            ch.inner = j.value("inner", 0.0);
        } else if (kind == "band") {
            ch.kind = AnnulusChart::band;
            ch.direction = j.value("direction", 0);
            ch.offset = j.value("offset", 0.0);
        } else if (kind == "collar") {
            ch.kind = AnnulusChart::collar;
            ch.generator = generator_code(j.value("generator", std::string("a1")), 2);
        } else {
            throw std::invalid_argument("unknown chart '" + kind + "'");
        }
        ch.profile = json_profile(j);
        iso = annulus_twist(ch, m, duration);
    } else if (type == "figure-eight") {
        double r = j.value("r", 2.8736), ramp = j.value("ramp", 0.01);
        auto site = figure_eight_pair(j.value("site", 1), m, ramp * r, (1 - ramp) * r, r, j.value("turns", 1.0));
        iso = word_diffeo(j.value("word", std::string("abb")), site.h, site.g);
    } else if (type == "braid") {
        auto b = parse_braid(j.at("n").get<int>(), j.at("word").get<std::string>());
        BraidPlacement pl = line_placement(b.strands, j.value("spacing", 0.3));
        iso = realize_pure_braid(mixed_from_artin(b), pl, m);
    } else {
        throw std::invalid_argument("unknown isotopy piece '" + type + "'");
    }
    if (j.contains("rate")) iso = scale(iso, j["rate"].get<double>());
    if (j.contains("power")) iso = iterate(iso, j["power"].get<int>());
    return iso;
}

// {"id", "surface", "pieces": [...], "power"}; pieces run in order
inline Isotopy parse_isotopy(const json& j) {
    SurfaceModel m = make_model(j.value("surface", std::string("disc")));
    Isotopy iso = identity_isotopy(m);
    if (j.contains("pieces"))
        for (const auto& p : j["pieces"]) iso = compose(isotopy_piece(p, m), iso);
    if (j.contains("power")) iso = iterate(iso, j["power"].get<int>());
    iso.model = m;
    iso.id = j.value("id", iso.pieces.empty() ? std::string("identity") : iso.id);
    return iso;
}

inline Isotopy load_isotopy(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("isotopy file '" + path + "': " + e.what());
    }
    return parse_isotopy(j);
}

// key = value lines, '#' comments
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(std::stoi(item));
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

struct RunConfig {
    std::string surface;           // overrides the isotopy file when set
    std::vector<std::string> isotopies;
    std::vector<std::string> qms{"lk:1,2"};
    int n = 2;
    long samples = 10000;
    std::uint64_t seed = 1;
    std::vector<int> powers{1};
    std::string output = ".";
    int workers = 0;
    std::vector<Point> basepoints;

    json to_json() const {
        json j;
        j["surface"] = surface;
        j["isotopies"] = isotopies;
        j["qms"] = qms;
        j["n"] = n;
        j["samples"] = samples;
        j["seed"] = seed;
        j["powers"] = powers;
        json bp = json::array();
        for (const auto& p : basepoints) bp.push_back({p.x, p.y});
        j["basepoints"] = bp;
        return j;
    }
};

inline void apply_key_values(RunConfig& c, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "surface") c.surface = v;
        else if (k == "isotopy") c.isotopies = split(v, ';');
        else if (k == "qm") c.qms = split(v, ';');
        else if (k == "n") c.n = std::stoi(v);
        else if (k == "samples") c.samples = std::stol(v);
        else if (k == "seed") c.seed = std::stoull(v);
        else if (k == "powers") c.powers = parse_int_list(v);
        else if (k == "output") c.output = v;
        else if (k == "workers") c.workers = std::stoi(v);
        else if (k == "basepoints") {
            c.basepoints.clear();
            for (const auto& p : split(v, ';')) {
                auto xy = split(p, ',');
                if (xy.size() != 2) throw std::invalid_argument("basepoints are 'x,y; x,y; ...'");
                c.basepoints.push_back({std::stod(xy[0]), std::stod(xy[1])});
            }
        } else
            throw std::invalid_argument("unknown config key '" + k + "'");
    }
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << v;
    return o.str();
}

inline json to_json(const GGEstimate& e) {
    json j;
    j["label"] = e.label;
    j["value"] = e.value;
    j["std_error"] = e.std_error;
    j["mean"] = e.mean;
    j["samples"] = e.samples;
    j["rejected"] = e.rejected;
    j["n"] = e.n;
    j["qm"] = e.qm;
    j["isotopy"] = e.isotopy;
    j["power"] = e.power;
    j["seed"] = e.seed;
    j["volume"] = e.volume;
    return j;
}

inline json to_json(const HomogenizedEstimate& h) {
    json j;
    j["limit"] = to_json(h.limit);
    json pp = json::array();
    for (const auto& e : h.per_power) pp.push_back(to_json(e));
    j["per_power"] = pp;
    j["converged"] = h.report.converged;
    j["homogenization_error"] = h.report.error_bound;
    return j;
}

inline json to_json(const CalabiResult& c) {
    json j;
    j["method"] = c.method;
    j["components"] = c.components;
    j["value"] = c.value;
    j["std_error"] = c.std_error;
    j["samples"] = c.samples;
    j["rejected"] = c.rejected;
    return j;
}

inline json to_json(const EmbeddingExperiment& e) {
    json j;
    j["m"] = e.m;
    j["diffeos"] = e.diffeos;
    j["qms"] = e.qms;
    j["M"] = e.M;
    j["M_std_error"] = e.M_err;
    j["M_homogenization_error"] = e.M_hom_err;
    j["A"] = e.A;
    j["site_area"] = e.site_area;
    j["defects"] = e.defects;
    j["det"] = e.det;
    j["supports_disjoint"] = e.supports_disjoint;
    j["commute"] = e.commute;
    j["near_identity"] = e.diagonal_dominant;
    j["ci_too_wide"] = e.ci_too_wide;
    j["samples"] = e.samples;
    j["rejected"] = e.rejected;
    j["construction"] = "constructive Brooks analogue";
    return j;
}

inline json to_json(const NormBoundReport& r) {
    return json{{"exponents", r.exponents}, {"lower", r.lower}, {"formula_lower", r.formula_lower},
                {"upper", r.upper}, {"tag", r.tag}, {"zero_defect", r.zero_defect}};
}

inline json to_json(const std::vector<VanishingRow>& rows) {
    json a = json::array();
    for (const auto& r : rows)
        a.push_back({{"flow", r.flow}, {"qm", r.qm}, {"value", r.value}, {"std_error", r.std_error},
                     {"homogenization_error", r.hom_error}, {"samples", r.samples}, {"rejected", r.rejected},
                     {"control", r.control}, {"within", r.within}});
    return a;
}

inline json to_json(const std::vector<MetricRow>& rows) {
    json a = json::array();
    for (const auto& r : rows)
        a.push_back({{"n", r.n}, {"map", r.map}, {"aut_witness", r.aut_witness}, {"hofer", r.hofer}, {"target", r.target}});
    return a;
}

// One JSON-lines record; the payload excludes the timestamp so reruns compare byte for byte.
inline json result_record(const std::string& operation, const std::string& tag, const json& config, const json& payload,
                          const std::string& timestamp) {
    json j;
    j["timestamp"] = timestamp;
    j["config_hash"] = hex64(fnv1a(config.dump()));
    j["operation"] = operation;
    j["tag"] = tag;
    j["config"] = config;
    j["payload"] = payload;
    return j;
}

inline void append_line(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << line << "\n";
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

inline json trace_dump(const TracedLoop& loop, const std::vector<CrossingEvent>& events) {
    json j;
    j["surface"] = model_name(loop.model);
    json bp = json::array(), cf = json::array();
    for (const auto& p : loop.basepoints) bp.push_back({p.x, p.y});
    for (const auto& p : loop.config) cf.push_back({p.x, p.y});
    j["basepoints"] = bp;
    j["config"] = cf;
    j["times"] = loop.times;
    json paths = json::array();
    for (const auto& path : loop.paths) {
        json pa = json::array();
        for (const auto& p : path) pa.push_back({p.x, p.y});
        paths.push_back(pa);
    }
    j["paths"] = paths;
    json ev = json::array();
    for (const auto& e : events) ev.push_back({{"t", e.t}, {"strands", {e.strand_a + 1, e.strand_b + 1}}, {"letter", e.generator}});
    j["events"] = ev;
    return j;
}

}  // namespace ggqm
