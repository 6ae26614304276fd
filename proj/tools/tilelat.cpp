// Command-line driver: build groups, run certifications, emit reports.
//
// Exit codes: 0 all checks passed, 1 a check found a verified violation,
// 2 configuration error, 3 I/O error. All commands are deterministic for a
// given flag set; sample points and probe directions derive from the group's
// seed with fixed salts, never from wall clock or global state.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tilelat/io.hpp"

namespace {

using namespace tilelat;

constexpr std::uint64_t kDirectionSalt = 1;
constexpr std::uint64_t kSampleSalt = 2;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

Rat parse_cli_rat(const std::string& s) {
    if (auto v = parse_rat(s)) return *v;
    try {
        return Rat(Int(s));
    } catch (const std::exception&) {
        throw ConfigError("not a rational (expected \"n\" or \"num/den\"): " + s);
    }
}

Rat parse_positive_rat(const std::string& s, const char* what) {
    Rat v = parse_cli_rat(s);
    if (v <= 0) throw ConfigError(std::string(what) + " must be positive: " + s);
    return v;
}

// Site/point syntax: "0" for the zero vector, "idx:rat,idx:rat,...", or a
// JSON term array as written in group files.
SparseVector parse_point(const std::string& s) {
    if (s.empty() || s == "0") return SparseVector{};
    if (s.front() == '[') return vector_from_json(Json::parse(s));
    std::vector<SparseVector::Term> terms;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        std::string tok = s.substr(pos, comma - pos);
        std::size_t colon = tok.find(':');
        if (colon == std::string::npos)
            throw ConfigError("point term needs idx:value, got: " + tok);
        terms.emplace_back(std::stoull(tok.substr(0, colon)),
                           parse_cli_rat(tok.substr(colon + 1)));
        pos = comma + 1;
    }
    return SparseVector::from_terms(std::move(terms));
}

std::vector<Rat> parse_rat_list(const std::string& s, const char* what) {
    std::vector<Rat> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(parse_positive_rat(s.substr(pos, comma - pos), what));
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
    return out;
}

struct BuildFlags {
    unsigned p = 2;
    std::size_t steps = 0;
    std::string scheme = "grid";
    std::uint64_t seed = 0;
    unsigned support_base = 2;
    unsigned magnitude_base = 2;
    unsigned stream_max_index = 16;
    unsigned stream_max_den_log2 = 3;
    std::string mode = "exact_lp";
    std::string epsilon;
    std::string out;
};

struct VerifyFlags {
    std::string check;
    std::string group;
    std::string threshold;
    bool strict = false;
    std::size_t samples = 500;
    std::string radius = "1";
    std::string out;
};

struct VoronoiFlags {
    std::string group;
    std::string site = "0";
    std::string radius = "1";
    bool assume_dense = false;
    std::string inclusion_sep;
    std::size_t directions = 100;
    std::string out;
};

struct ReportFlags {
    std::string group;
    std::string radius = "1";
    std::string radii = "1,2,4";
    std::size_t samples = 100;
    std::string out;
    std::string csv;
};

struct BasisFlags {
    std::string group;
    std::string out;
};

EnumerationScheme scheme_from_flags(const BuildFlags& f) {
    EnumerationScheme s;
    if (f.scheme == "grid")
        s.kind = SchemeKind::Grid;
    else if (f.scheme == "stream")
        s.kind = SchemeKind::Stream;
    else
        throw ConfigError("--scheme must be grid or stream, got: " + f.scheme);
    s.seed = f.seed;
    s.support_base = f.support_base;
    s.magnitude_base = f.magnitude_base;
    s.stream_max_index = f.stream_max_index;
    s.stream_max_den_log2 = f.stream_max_den_log2;
    return s;
}

int cmd_build(const BuildFlags& f) {
    if (f.p < 1) throw ConfigError("--p must be a positive integer");
    if (f.steps < 1) throw ConfigError("--steps must be at least 1");
    EnumerationScheme scheme = scheme_from_flags(f);

    Json config;
    config["command"] = "build";
    config["p"] = f.p;
    config["steps"] = f.steps;
    config["scheme"] = scheme_to_json(scheme);
    config["mode"] = f.mode;
    if (!f.epsilon.empty()) config["epsilon"] = format_rat(parse_cli_rat(f.epsilon));

    Subgroup d;
    if (f.mode == "exact_lp") {
        if (!f.epsilon.empty()) throw ConfigError("--epsilon applies to riesz_general only");
        d = build_lp(PNorm{f.p}, scheme, f.steps);
    } else if (f.mode == "riesz_general") {
        if (f.epsilon.empty()) throw ConfigError("riesz_general needs --epsilon");
        Rat eps = parse_positive_rat(f.epsilon, "--epsilon");
        d = build_riesz(PNorm{f.p}, scheme, f.steps, eps);
    } else {
        throw ConfigError("--mode must be exact_lp or riesz_general, got: " + f.mode);
    }

    std::size_t added = d.records.size();
    std::cout << "built p=" << f.p << " group: " << added << " generators from " << f.steps
              << " targets (" << (f.steps - added) << " skipped); "
              << d.used_indices.size() << " coordinates touched\n";
    if (!f.out.empty()) {
        save_group(f.out, d, config);
        std::cout << "wrote " << f.out << "\n";
    }
    return 0;
}

void write_certificate(const std::string& out, const Json& config, const Certificate& cert) {
    if (out.empty()) return;
    Json payload;
    payload["certificate"] = certificate_to_json(cert);
    save_payload(out, kCertificateFormat, config, payload);
    std::cout << "wrote " << out << "\n";
}

int cmd_verify(const VerifyFlags& f) {
    Subgroup d = load_group(f.group);

    Json config;
    config["command"] = "verify";
    config["check"] = f.check;
    config["group"] = f.group;
    config["p"] = d.p.p;

    if (f.check == "separation") {
        if (f.threshold.empty()) throw ConfigError("separation needs --threshold");
        PowThreshold c{parse_positive_rat(f.threshold, "--threshold")};
        config["threshold"] = format_rat(c.c);
        config["strict"] = f.strict;
        Certificate cert = verify_separation(d, c, f.strict);
        std::cout << cert_kind_name(cert.kind) << " (nodes=" << cert.bound.nodes << ")";
        if (cert.witness) std::cout << " witness " << to_string(*cert.witness);
        std::cout << "\n";
        write_certificate(f.out, config, cert);
        return certificate_ok(cert) ? 0 : 1;
    }
    if (f.check == "density") {
        PowThreshold c{f.threshold.empty() ? Rat(1)
                                           : parse_positive_rat(f.threshold, "--threshold")};
        config["threshold"] = format_rat(c.c);
        auto targets = processed_targets(d);
        Certificate cert = verify_density(d, targets, c);
        std::cout << cert_kind_name(cert.kind) << " over " << targets.size()
                  << " targets (nodes=" << cert.bound.nodes << ")";
        if (cert.witness) std::cout << " gap at " << to_string(*cert.witness);
        std::cout << "\n";
        write_certificate(f.out, config, cert);
        return certificate_ok(cert) ? 0 : 1;
    }
    if (f.check == "vertex-contact") {
        Certificate cert = verify_vertex_contact(d);
        std::cout << cert_kind_name(cert.kind);
        if (cert.count) std::cout << " (" << *cert.count << " contact elements)";
        if (cert.witness) std::cout << " witness " << to_string(*cert.witness);
        std::cout << "\n";
        write_certificate(f.out, config, cert);
        return certificate_ok(cert) ? 0 : 1;
    }
    if (f.check == "point-finiteness") {
        PowThreshold r{parse_positive_rat(f.radius, "--radius")};
        config["radius"] = format_rat(r.c);
        config["samples"] = f.samples;
        auto points = sample_points(d.scheme, f.samples, kSampleSalt);
        std::uint64_t worst = 0;
        SparseVector worst_point;
        auto rr = detail::resolve_route(d, Route::Auto);
        std::vector<std::uint64_t> counts(points.size());
        parallel_for(points.size(), [&](std::size_t i) {
            counts[i] = detail::run_ball(rr, points[i], d.p, r, false, BallMode::Count).count;
        });
        for (std::size_t i = 0; i < points.size(); ++i)
            if (counts[i] > worst) worst = counts[i], worst_point = points[i];
        bool ok = worst <= 2;
        std::cout << (ok ? "PointFinitenessOK" : "PointFinitenessViolated") << " max "
                  << worst << " tiles over " << points.size() << " samples";
        if (!ok) std::cout << " at " << to_string(worst_point);
        std::cout << "\n";
        if (!f.out.empty()) {
            Json payload;
            payload["max_tiles"] = worst;
            payload["samples"] = points.size();
            payload["ok"] = ok;
            if (!ok) payload["witness"] = vector_to_json(worst_point);
            save_payload(f.out, kCertificateFormat, config, payload);
            std::cout << "wrote " << f.out << "\n";
        }
        return ok ? 0 : 1;
    }
    throw ConfigError(
        "check must be one of separation|density|vertex-contact|point-finiteness, got: " +
        f.check);
}

int cmd_voronoi(const VoronoiFlags& f) {
    Subgroup d = load_group(f.group);
    SparseVector site = parse_point(f.site);
    PowThreshold r{parse_positive_rat(f.radius, "--radius")};

    Json config;
    config["command"] = "voronoi";
    config["group"] = f.group;
    config["site"] = vector_to_json(site);
    config["radius"] = format_rat(r.c);
    config["assume_dense"] = f.assume_dense;

    HPolytope cell = voronoi_cell(d, site, r,
                                  f.assume_dense ? std::optional<bool>(true) : std::nullopt);
    std::cout << "cell at " << to_string(site) << ": " << cell.halfspaces.size()
              << " half-spaces, density " << (cell.density_certified ? "certified" : "open")
              << "\n";

    int rc = 0;
    Json payload;
    payload["polytope"] = polytope_to_json(cell);
    if (!f.inclusion_sep.empty()) {
        PowThreshold R{parse_positive_rat(f.inclusion_sep, "--inclusion-sep")};
        config["inclusion_sep"] = format_rat(R.c);
        config["directions"] = f.directions;
        auto dirs = direction_probes(d, r, f.directions, kDirectionSalt);
        Certificate cert = inclusion_check(cell, R, r, dirs);
        std::cout << cert_kind_name(cert.kind) << " over " << dirs.size() << " directions";
        if (cert.witness) std::cout << " witness " << to_string(*cert.witness);
        std::cout << "\n";
        payload["inclusion"] = certificate_to_json(cert);
        rc = certificate_ok(cert) ? 0 : 1;
    }
    if (!f.out.empty()) {
        save_payload(f.out, kPolytopeFormat, config, payload);
        std::cout << "wrote " << f.out << "\n";
    }
    return rc;
}

int cmd_report(const ReportFlags& f) {
    Subgroup d = load_group(f.group);
    PowThreshold r{parse_positive_rat(f.radius, "--radius")};
    std::vector<Rat> radii = parse_rat_list(f.radii, "--radii");

    Json config;
    config["command"] = "report";
    config["group"] = f.group;
    config["radius"] = format_rat(r.c);
    config["radii"] = Json::array();
    for (const auto& c : radii) config["radii"].push_back(format_rat(c));
    config["samples"] = f.samples;

    auto points = sample_points(d.scheme, f.samples, kSampleSalt);
    TilingReport rep = make_tiling_report(d, r, radii, points);

    std::cout << "star degree " << rep.star_degree << "\n";
    for (const auto& [c, n] : rep.ball_counts)
        std::cout << "ball c=" << format_rat(c) << ": " << n << " elements\n";
    std::uint64_t worst = 0;
    for (const auto& [x, n] : rep.point_finiteness_samples)
        if (n > worst) worst = n;
    std::cout << "max tiles at a sample point: " << worst << "\n";
    if (rep.disjointness)
        std::cout << "disjointness witness d=" << to_string(rep.disjointness->d)
                  << " other=" << to_string(rep.disjointness->other) << "\n";
    if (rep.vertex_contact)
        std::cout << "vertex contact: " << cert_kind_name(rep.vertex_contact->kind) << "\n";

    if (!f.out.empty()) {
        save_payload(f.out, kReportFormat, config, report_to_json(rep));
        std::cout << "wrote " << f.out << "\n";
    }
    if (!f.csv.empty()) {
        write_file_atomic(f.csv, report_to_csv(rep));
        std::cout << "wrote " << f.csv << "\n";
    }
    return 0;
}

int cmd_basis(const BasisFlags& f) {
    Subgroup d = load_group(f.group);
    auto gens = d.generators();
    auto basis = free_basis(gens);

    Json config;
    config["command"] = "basis";
    config["group"] = f.group;

    Json payload;
    payload["rank"] = basis.size();
    payload["basis"] = Json::array();
    for (const auto& b : basis) payload["basis"].push_back(vector_to_json(b));
    payload["generators_over_basis"] = Json::array();
    payload["basis_over_generators"] = Json::array();
    bool ok = true;
    for (const auto& g : gens) {
        auto coeffs = subgroup_membership(basis, g);
        if (!coeffs) {
            ok = false;
            break;
        }
        Json row = Json::array();
        for (const auto& n : *coeffs) row.push_back(int_to_json(n));
        payload["generators_over_basis"].push_back(std::move(row));
    }
    for (const auto& b : basis) {
        auto coeffs = subgroup_membership(gens, b);
        if (!coeffs) {
            ok = false;
            break;
        }
        Json row = Json::array();
        for (const auto& n : *coeffs) row.push_back(int_to_json(n));
        payload["basis_over_generators"].push_back(std::move(row));
    }
    payload["round_trip_ok"] = ok;

    std::cout << "basis rank " << basis.size() << " from " << gens.size()
              << " generators; round trip " << (ok ? "ok" : "FAILED") << "\n";
    if (!f.out.empty()) {
        save_payload(f.out, kBasisFormat, config, payload);
        std::cout << "wrote " << f.out << "\n";
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-arithmetic discrete subgroups of rational sequence spaces: "
                 "greedy builds, ball enumeration, separation/density certificates, "
                 "tiling reports"};
    app.require_subcommand(1);

    BuildFlags bf;
    auto* build = app.add_subcommand("build", "Run the greedy construction, write a group file");
    build->add_option("--p", bf.p, "norm exponent (positive integer)")->required();
    build->add_option("--steps", bf.steps, "number of candidate targets to process")->required();
    build->add_option("--scheme", bf.scheme, "candidate scheme: grid|stream");
    build->add_option("--seed", bf.seed, "scheme seed (0 = canonical order)");
    build->add_option("--support-base", bf.support_base, "grid: coordinates at level 0");
    build->add_option("--magnitude-base", bf.magnitude_base, "grid: magnitude bound at level 0");
    build->add_option("--stream-max-index", bf.stream_max_index, "stream: coordinate bound");
    build->add_option("--stream-max-den-log2", bf.stream_max_den_log2,
                      "stream: max denominator exponent");
    build->add_option("--mode", bf.mode, "exact_lp|riesz_general");
    build->add_option("--epsilon", bf.epsilon, "riesz slack (rational)");
    build->add_option("--out", bf.out, "output group file");

    VerifyFlags vf;
    auto* verify = app.add_subcommand("verify", "Certify a property of a group file");
    verify->add_option("check", vf.check,
                       "separation|density|vertex-contact|point-finiteness")->required();
    verify->add_option("--group", vf.group, "group file")->required();
    verify->add_option("--threshold", vf.threshold,
                       "pow-threshold c = threshold^p (rational)");
    verify->add_flag("--strict", vf.strict, "strict comparison");
    verify->add_option("--samples", vf.samples, "sample point count");
    verify->add_option("--radius", vf.radius, "tile radius pow-value c");
    verify->add_option("--out", vf.out, "certificate file");

    VoronoiFlags wf;
    auto* voronoi = app.add_subcommand("voronoi", "Voronoi cell as an exact H-polytope (p=2)");
    voronoi->add_option("--group", wf.group, "group file")->required();
    voronoi->add_option("--site", wf.site, "cell site: 0, idx:rat,... or JSON terms");
    voronoi->add_option("--radius", wf.radius, "density radius pow-value c");
    voronoi->add_flag("--assume-dense", wf.assume_dense,
                      "mark density as externally certified");
    voronoi->add_option("--inclusion-sep", wf.inclusion_sep,
                        "also check R/2-ball inner inclusion with this separation pow-value");
    voronoi->add_option("--directions", wf.directions, "outer-inclusion probe directions");
    voronoi->add_option("--out", wf.out, "polytope file");

    ReportFlags rf;
    auto* report = app.add_subcommand("report", "Tiling report: star degree, counts, witnesses");
    report->add_option("--group", rf.group, "group file")->required();
    report->add_option("--radius", rf.radius, "tile radius pow-value c");
    report->add_option("--radii", rf.radii, "comma list of ball pow-radii");
    report->add_option("--samples", rf.samples, "point-finiteness sample count");
    report->add_option("--out", rf.out, "report JSON file");
    report->add_option("--csv", rf.csv, "report CSV file");

    BasisFlags sf;
    auto* basis = app.add_subcommand("basis", "Canonical basis + round-trip membership");
    basis->add_option("--group", sf.group, "group file")->required();
    basis->add_option("--out", sf.out, "basis file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (build->parsed()) return cmd_build(bf);
        if (verify->parsed()) return cmd_verify(vf);
        if (voronoi->parsed()) return cmd_voronoi(wf);
        if (report->parsed()) return cmd_report(rf);
        if (basis->parsed()) return cmd_basis(sf);
        throw ConfigError("no subcommand");
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const Json::exception& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const NoWitnessAtStage& e) {
        std::cerr << "no witness: " << e.what() << "\n";
        return 1;
    } catch (const BoundUnderivable& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
