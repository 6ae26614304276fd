#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tilelat/abelian.hpp"
#include "tilelat/enumerate.hpp"
#include "tilelat/subgroup.hpp"
#include "tilelat/tiling.hpp"

namespace tilelat {

// Field order is fixed at insertion, so identical inputs serialize to
// identical bytes; all rationals travel as "num/den" strings and all
// arbitrary-precision integers as decimal strings.
using Json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Json rat_to_json(const Rat& v) { return format_rat(v); }

inline Rat rat_from_json(const Json& j) {
    if (!j.is_string()) throw IoError("expected a rational \"num/den\" string");
    auto v = parse_rat(j.get<std::string>());
    if (!v) throw IoError("malformed rational: " + j.get<std::string>());
    return *v;
}

inline Json int_to_json(const Int& v) { return v.str(); }

inline Int int_from_json(const Json& j) {
    if (j.is_number_integer()) return Int(j.get<long long>());
    if (j.is_number_unsigned()) return Int(j.get<unsigned long long>());
    if (!j.is_string()) throw IoError("expected an integer or decimal string");
    Rat r = rat_from_json(j);
    if (denominator(r) != 1) throw IoError("expected an integer, got a fraction");
    return numerator(r);
}

inline Json vector_to_json(const SparseVector& v) {
    Json out = Json::array();
    for (const auto& [i, c] : v.terms()) out.push_back(Json::array({i, rat_to_json(c)}));
    return out;
}

inline SparseVector vector_from_json(const Json& j) {
    if (!j.is_array()) throw IoError("expected a vector: array of [index, \"num/den\"]");
    std::vector<SparseVector::Term> terms;
    for (const auto& t : j) {
        if (!t.is_array() || t.size() != 2 || !t[0].is_number())
            throw IoError("expected vector term [index, \"num/den\"]");
        terms.emplace_back(t[0].get<std::uint64_t>(), rat_from_json(t[1]));
    }
    return SparseVector::from_terms(std::move(terms));
}

inline Json scheme_to_json(const EnumerationScheme& s) {
    Json j;
    j["kind"] = s.kind == SchemeKind::Grid ? "grid" : "stream";
    j["seed"] = s.seed;
    j["support_base"] = s.support_base;
    j["magnitude_base"] = s.magnitude_base;
    j["stream_max_index"] = s.stream_max_index;
    j["stream_max_den_log2"] = s.stream_max_den_log2;
    return j;
}

inline EnumerationScheme scheme_from_json(const Json& j) {
    EnumerationScheme s;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "grid")
        s.kind = SchemeKind::Grid;
    else if (kind == "stream")
        s.kind = SchemeKind::Stream;
    else
        throw IoError("unknown scheme kind: " + kind);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.support_base = j.value("support_base", s.support_base);
    s.magnitude_base = j.value("magnitude_base", s.magnitude_base);
    s.stream_max_index = j.value("stream_max_index", s.stream_max_index);
    s.stream_max_den_log2 = j.value("stream_max_den_log2", s.stream_max_den_log2);
    return s;
}

inline const char* group_mode_name(GroupMode m) {
    switch (m) {
        case GroupMode::ExactLp: return "exact_lp";
        case GroupMode::RieszGeneral: return "riesz_general";
        case GroupMode::Generators: return "generators";
    }
    return "?";
}

inline GroupMode group_mode_from_name(const std::string& s) {
    if (s == "exact_lp") return GroupMode::ExactLp;
    if (s == "riesz_general") return GroupMode::RieszGeneral;
    if (s == "generators") return GroupMode::Generators;
    throw IoError("unknown group mode: " + s);
}

inline Json group_to_json(const Subgroup& d) {
    Json j;
    j["p"] = d.p.p;
    j["mode"] = group_mode_name(d.mode);
    j["records"] = Json::array();
    for (const auto& r : d.records) {
        Json jr;
        jr["step"] = r.step;
        jr["fresh"] = r.fresh_index;
        jr["u"] = vector_to_json(r.u);
        jr["g"] = vector_to_json(r.g);
        j["records"].push_back(std::move(jr));
    }
    j["scheme"] = scheme_to_json(d.scheme);
    j["steps"] = d.steps_consumed;
    if (d.epsilon) j["epsilon"] = rat_to_json(*d.epsilon);
    if (d.mode == GroupMode::Generators) {
        j["generators"] = Json::array();
        for (const auto& g : d.raw_generators) j["generators"].push_back(vector_to_json(g));
    }
    return j;
}

inline Subgroup group_from_json(const Json& j) {
    Subgroup d;
    unsigned p = j.at("p").get<unsigned>();
    if (p < 1) throw IoError("p must be a positive integer");
    d.p = PNorm{p};
    d.mode = group_mode_from_name(j.at("mode").get<std::string>());
    d.scheme = scheme_from_json(j.at("scheme"));
    d.steps_consumed = j.at("steps").get<std::size_t>();
    if (j.contains("epsilon")) d.epsilon = rat_from_json(j.at("epsilon"));
    for (const auto& jr : j.at("records")) {
        GeneratorRecord r;
        r.step = jr.at("step").get<std::size_t>();
        r.fresh_index = jr.at("fresh").get<std::uint64_t>();
        r.u = vector_from_json(jr.at("u"));
        r.g = vector_from_json(jr.at("g"));
        d.records.push_back(std::move(r));
    }
    if (d.mode == GroupMode::Generators) {
        for (const auto& jg : j.at("generators"))
            d.raw_generators.push_back(vector_from_json(jg));
        for (const auto& g : d.raw_generators)
            for (const auto& [i, c] : g.terms()) d.used_indices.insert(i);
    } else {
        // Rebuild the support union the build had seen: processed targets
        // from the scheme plus everything recorded.
        for (const auto& u : enumerate_candidates(d.scheme, d.steps_consumed))
            for (const auto& [i, c] : u.terms()) d.used_indices.insert(i);
        for (const auto& r : d.records) {
            d.used_indices.insert(r.fresh_index);
            for (const auto& [i, c] : r.g.terms()) d.used_indices.insert(i);
        }
    }
    return d;
}

inline Json bound_to_json(const SearchBound& b) {
    Json j;
    j["route"] = b.route;
    j["p"] = b.p;
    j["c"] = rat_to_json(b.radius_c);
    j["strict"] = b.strict;
    j["nodes"] = b.nodes;
    return j;
}

inline Json certificate_to_json(const Certificate& c) {
    Json j;
    j["kind"] = cert_kind_name(c.kind);
    j["ok"] = certificate_ok(c);
    if (c.witness) j["witness"] = vector_to_json(*c.witness);
    if (!c.coefficients.empty()) {
        j["coefficients"] = Json::array();
        for (const auto& n : c.coefficients) j["coefficients"].push_back(int_to_json(n));
    }
    if (c.count) j["count"] = *c.count;
    j["bound"] = bound_to_json(c.bound);
    return j;
}

inline Json halfspace_to_json(const HalfSpace& h) {
    Json j;
    j["normal"] = vector_to_json(h.normal);
    j["offset"] = rat_to_json(h.offset);
    return j;
}

inline Json polytope_to_json(const HPolytope& cell) {
    Json j;
    j["center"] = vector_to_json(cell.center);
    j["cutoff"] = rat_to_json(cell.cutoff.c);
    j["density_certified"] = cell.density_certified;
    j["halfspaces"] = Json::array();
    for (const auto& h : cell.halfspaces) j["halfspaces"].push_back(halfspace_to_json(h));
    return j;
}

inline HPolytope polytope_from_json(const Json& j) {
    HPolytope cell;
    cell.center = vector_from_json(j.at("center"));
    cell.cutoff = PowThreshold{rat_from_json(j.at("cutoff"))};
    cell.density_certified = j.at("density_certified").get<bool>();
    for (const auto& jh : j.at("halfspaces")) {
        HalfSpace h;
        h.normal = vector_from_json(jh.at("normal"));
        h.offset = rat_from_json(jh.at("offset"));
        cell.halfspaces.push_back(std::move(h));
    }
    return cell;
}

inline Json matrix_to_json(const IntegerMatrix& m) {
    Json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["entries"] = Json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < m.cols; ++k) row.push_back(int_to_json(m.at(i, k)));
        j["entries"].push_back(std::move(row));
    }
    return j;
}

inline IntegerMatrix matrix_from_json(const Json& j) {
    IntegerMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto& e = j.at("entries");
    if (e.size() != m.rows) throw IoError("matrix row count mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (e[i].size() != m.cols) throw IoError("matrix column count mismatch");
        for (std::size_t k = 0; k < m.cols; ++k) m.at(i, k) = int_from_json(e[i][k]);
    }
    return m;
}

inline Json report_to_json(const TilingReport& rep) {
    Json j;
    j["star_degree"] = rep.star_degree;
    j["ball_counts"] = Json::array();
    for (const auto& [c, n] : rep.ball_counts)
        j["ball_counts"].push_back(Json{{"c", rat_to_json(c)}, {"count", n}});
    if (rep.disjointness) {
        j["disjointness_witness"] = Json{{"d", vector_to_json(rep.disjointness->d)},
                                         {"other", vector_to_json(rep.disjointness->other)},
                                         {"h", vector_to_json(rep.disjointness->h)}};
    }
    if (rep.vertex_contact) j["vertex_contact"] = certificate_to_json(*rep.vertex_contact);
    j["point_finiteness_samples"] = Json::array();
    for (const auto& [x, n] : rep.point_finiteness_samples)
        j["point_finiteness_samples"].push_back(
            Json{{"point", vector_to_json(x)}, {"tiles", n}});
    return j;
}

// CSV for external plotting; the float column is display-only.
inline std::string report_to_csv(const TilingReport& rep) {
    std::string out = "record,key,value,float_display\n";
    auto fl = [](const Rat& v) {
        return std::to_string(numerator(v).convert_to<double>() /
                              denominator(v).convert_to<double>());
    };
    out += "star_degree,," + std::to_string(rep.star_degree) + ",\n";
    for (const auto& [c, n] : rep.ball_counts)
        out += "ball_count," + format_rat(c) + "," + std::to_string(n) + "," + fl(c) + "\n";
    for (std::size_t i = 0; i < rep.point_finiteness_samples.size(); ++i)
        out += "sample_tiles," + std::to_string(i) + "," +
               std::to_string(rep.point_finiteness_samples[i].second) + ",\n";
    return out;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& body) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp.string());
        f << body;
        f.flush();
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    Json j = Json::parse(f, nullptr, false);
    if (j.is_discarded()) throw IoError("malformed JSON: " + path.string());
    return j;
}

// Every file carries a format tag and the run configuration that produced it.
inline void save_payload(const std::filesystem::path& path, const std::string& format,
                         const Json& config, Json payload) {
    Json j;
    j["format"] = format;
    j["config"] = config;
    for (auto& [k, v] : payload.items()) j[k] = std::move(v);
    write_file_atomic(path, j.dump(2) + "\n");
}

inline Json load_payload(const std::filesystem::path& path, const std::string& format) {
    Json j = read_json_file(path);
    if (!j.contains("format") || j.at("format").get<std::string>() != format)
        throw IoError(path.string() + " is not a " + format + " file");
    return j;
}

inline constexpr const char* kGroupFormat = "tilelat-group/1";
inline constexpr const char* kCertificateFormat = "tilelat-certificate/1";
inline constexpr const char* kPolytopeFormat = "tilelat-polytope/1";
inline constexpr const char* kReportFormat = "tilelat-report/1";
inline constexpr const char* kBasisFormat = "tilelat-basis/1";

inline void save_group(const std::filesystem::path& path, const Subgroup& d,
                       const Json& config) {
    save_payload(path, kGroupFormat, config, group_to_json(d));
}

inline Subgroup load_group(const std::filesystem::path& path) {
    return group_from_json(load_payload(path, kGroupFormat));
}

}  // namespace tilelat
