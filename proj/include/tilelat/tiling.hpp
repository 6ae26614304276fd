#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tilelat/builder.hpp"
#include "tilelat/enumerate.hpp"
#include "tilelat/parallel.hpp"

namespace tilelat {

// <x, normal> <= offset, the bisector constraint between a site d and a
// neighbor h: normal = h - d, offset = (||h||^2 - ||d||^2) / 2.
struct HalfSpace {
    SparseVector normal;
    Rat offset;
};

struct HPolytope {
    SparseVector center;
    std::vector<HalfSpace> halfspaces;
    PowThreshold cutoff{Rat(0)};    // neighbor radius (squared) used
    bool density_certified = false;  // constraints complete inside radius r
};

enum class CellMembership { Interior, Boundary, Outside };

inline const char* cell_membership_name(CellMembership m) {
    switch (m) {
        case CellMembership::Interior: return "Interior";
        case CellMembership::Boundary: return "Boundary";
        case CellMembership::Outside: return "Outside";
    }
    return "?";
}

struct NoWitnessAtStage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Voronoi cell of a site as an exact half-space intersection (p = 2 only;
// Hilbert geometry guarantees convexity). Neighbors within 2 * r_dense
// suffice: the certified cell lies inside the r_dense ball around the site,
// where farther constraints are inactive. Without a density certificate the
// polytope is still returned, flagged non-certified.
inline HPolytope voronoi_cell(const Subgroup& d, const SparseVector& site,
                              const PowThreshold& r_dense,
                              std::optional<bool> density_vouched = std::nullopt) {
    if (d.p.p != 2) throw std::invalid_argument("voronoi cells are computed for p = 2 only");
    if (!subgroup_membership(d.generators(), site))
        throw std::invalid_argument("site is not an element of the group");

    bool certified;
    if (density_vouched.has_value()) {
        certified = *density_vouched;
    } else if (d.mode != GroupMode::Generators) {
        certified = certificate_ok(verify_density(d, processed_targets(d), r_dense));
    } else {
        certified = false;
    }

    HPolytope cell;
    cell.center = site;
    cell.cutoff = PowThreshold{4 * r_dense.c};
    Rat site_norm = norm_pow(site, PNorm{2});
    GroupBall ball = enumerate_group_ball(d, BallQuery{site, cell.cutoff, false});
    for (auto& h : ball.hits) {
        if (h.element == site) continue;
        HalfSpace hs;
        hs.offset = (norm_pow(h.element, PNorm{2}) - site_norm) / 2;
        hs.normal = std::move(h.element) - site;
        cell.halfspaces.push_back(std::move(hs));
    }
    cell.density_certified = certified && !cell.halfspaces.empty();
    return cell;
}

inline CellMembership cell_membership(const HPolytope& cell, const SparseVector& x) {
    bool boundary = false;
    for (const auto& hs : cell.halfspaces) {
        Rat s = dot(x, hs.normal);
        if (s > hs.offset) return CellMembership::Outside;
        if (s == hs.offset) boundary = true;
    }
    return boundary ? CellMembership::Boundary : CellMembership::Interior;
}

// Eq.-(2.1)-style inclusions for the cell at the origin. Inner: every
// bounding hyperplane lies at distance >= R_sep/2 from 0, proved exactly per
// half-space (squared comparison). Outer: along each direction the ray's
// exact exit parameter satisfies ||t* v|| <= r_dense.
inline Certificate inclusion_check(const HPolytope& cell, const PowThreshold& R_sep,
                                   const PowThreshold& r_dense,
                                   const std::vector<SparseVector>& directions) {
    if (!cell.center.is_zero())
        throw std::invalid_argument("inclusion check expects the cell at the origin");
    Certificate cert;
    cert.bound =
        SearchBound{"polytope", 2, r_dense.c, false, cell.halfspaces.size()};
    for (const auto& hs : cell.halfspaces) {
        // distance(0, plane) = offset / ||normal||
        if (hs.offset < 0 || 4 * hs.offset * hs.offset <
                                 R_sep.c * norm_pow(hs.normal, PNorm{2})) {
            cert.kind = CertKind::InclusionViolation;
            cert.witness = hs.normal;
            return cert;
        }
    }
    for (const auto& v : directions) {
        if (v.is_zero()) throw std::invalid_argument("zero direction");
        std::optional<Rat> t_exit;
        for (const auto& hs : cell.halfspaces) {
            Rat den = dot(v, hs.normal);
            if (den <= 0) continue;
            Rat t = hs.offset / den;
            if (!t_exit || t < *t_exit) t_exit = std::move(t);
        }
        if (!t_exit || *t_exit * *t_exit * norm_pow(v, PNorm{2}) > r_dense.c) {
            cert.kind = CertKind::InclusionViolation;
            cert.witness = v;
            return cert;
        }
    }
    cert.kind = CertKind::InclusionOK;
    cert.count = directions.size();
    return cert;
}

// Sites whose tile (ball of tile_radius) contains x; canonical order.
inline std::vector<SparseVector> tiles_containing(const Subgroup& d, const SparseVector& x,
                                                  const PowThreshold& tile_radius) {
    GroupBall ball = enumerate_group_ball(d, BallQuery{x, tile_radius, false});
    std::vector<SparseVector> sites;
    sites.reserve(ball.hits.size());
    for (auto& h : ball.hits) sites.push_back(std::move(h.element));
    std::sort(sites.begin(), sites.end(), vec_less);
    return sites;
}

// p = 1 contact set: every group element on the sphere ||x||_1 = 2 must be
// +-2 e_alpha (the only tile-boundary contacts of the unit l_1 ball tiling).
inline Certificate verify_vertex_contact(const Subgroup& d) {
    if (d.p.p != 1) throw std::invalid_argument("vertex contact targets the p = 1 tiling");
    GroupBall ball =
        enumerate_group_ball(d, BallQuery{SparseVector{}, PowThreshold{Rat(2)}, false});
    Certificate cert;
    cert.bound = ball.bound;
    std::uint64_t contacts = 0;
    for (auto& h : ball.hits) {
        if (h.dist_pow != 2) continue;
        ++contacts;
        const auto& terms = h.element.terms();
        bool vertex = terms.size() == 1 && abs_pow(terms[0].second, 1) == 2;
        if (!vertex) {
            cert.kind = CertKind::ContactViolation;
            SparseVector w = h.element;
            std::vector<Int> cs = h.coeffs;
            detail::canonicalize_sign(w, cs);
            cert.witness = std::move(w);
            cert.coefficients = std::move(cs);
            return cert;
        }
    }
    cert.kind = CertKind::ContactOK;
    cert.count = contacts;
    return cert;
}

struct DisjointnessWitness {
    SparseVector d;      // tile center with d/2 outside the group
    SparseVector other;  // = 2h for h within tile_radius of d/2; other != d
    SparseVector h;
};

namespace detail {

// Probe order: distance first, then positive representative of each +-pair
// before longer vectors.
inline bool probe_less(const BallHit& a, const BallHit& b) {
    if (a.dist_pow != b.dist_pow) return a.dist_pow < b.dist_pow;
    SparseVector na = -a.element, nb = -b.element;
    const SparseVector& ca = vec_less(a.element, na) ? na : a.element;
    const SparseVector& cb = vec_less(b.element, nb) ? nb : b.element;
    if (ca == cb) return a.element == ca && !(b.element == cb);  // positive one first
    return vec_less(ca, cb);
}

}  // namespace detail

// Constructive non-disjointness: find d in D with d/2 not in D, then some
// h in D within tile_radius of d/2; the tiles at d and 2h are distinct and
// ||d - 2h|| <= 2 * tile_radius, so they intersect.
inline DisjointnessWitness disjointness_witness(const Subgroup& d,
                                                const PowThreshold& tile_radius) {
    auto gens = d.generators();
    Rat pair_c = Rat(Int(1) << d.p.p) * tile_radius.c;  // (2r)^p
    GroupBall probes = enumerate_group_ball(d, BallQuery{SparseVector{}, PowThreshold{pair_c},
                                                         false});
    std::sort(probes.hits.begin(), probes.hits.end(), detail::probe_less);
    for (const auto& cand : probes.hits) {
        if (cand.element.is_zero()) continue;
        SparseVector half = Rat(1, 2) * cand.element;
        if (subgroup_membership(gens, half)) continue;
        GroupBall near = enumerate_group_ball(d, BallQuery{half, tile_radius, false});
        if (near.hits.empty()) continue;
        DisjointnessWitness w;
        w.d = cand.element;
        w.h = near.hits.front().element;
        w.other = Rat(2) * w.h;
        return w;
    }
    throw NoWitnessAtStage(
        "every probed element d has d/2 in the group or no tile near d/2");
}

// Number of tiles meeting the central tile: nonzero elements within twice the
// tile radius.
inline std::uint64_t star_degree(const Subgroup& d, const PowThreshold& tile_radius) {
    Rat c = Rat(Int(1) << d.p.p) * tile_radius.c;  // (2r)^p
    Certificate cert = count_in_ball(d, PowThreshold{c});
    return *cert.count - 1;
}

// Tiles (balls of tile_radius) meeting the delta-ball around x, i.e. sites
// with ||x - d|| <= r + s where r^2 = c_r, s^2 = c_d. The bound is irrational
// for p = 2, so enumerate inside a rational over-approximation and keep
// elements by the exact radical comparison.
inline std::uint64_t local_tile_count(const Subgroup& d, const SparseVector& x,
                                      const PowThreshold& delta,
                                      const PowThreshold& tile_radius) {
    if (d.p.p != 2) throw std::invalid_argument("local tile counts target p = 2");
    Rat prod = tile_radius.c * delta.c;
    Rat root_up(boost::multiprecision::sqrt(numerator(prod) * denominator(prod)) + 1,
                denominator(prod));
    Rat c_up = tile_radius.c + delta.c + 2 * root_up;
    GroupBall ball = enumerate_group_ball(d, BallQuery{x, PowThreshold{c_up}, false});
    std::uint64_t n = 0;
    for (const auto& h : ball.hits) {
        // dist <= r + s  <=>  N - c_r - c_d <= 2 sqrt(c_r c_d), N = dist^2
        Rat L = h.dist_pow - tile_radius.c - delta.c;
        if (L <= 0 || L * L <= 4 * prod) ++n;
    }
    return n;
}

// Probe directions for the outer inclusion check: nonzero group elements
// within 2r of the site, in a seeded shuffle of their canonical order. A ray
// along any such element v is cut by v's own half-space at t = 1/2, so the
// exit point has norm at most r whenever the half-space family is complete;
// ambient directions outside the explored region would not carry that
// guarantee at a finite stage.
inline std::vector<SparseVector> direction_probes(const Subgroup& d,
                                                  const PowThreshold& r_dense,
                                                  std::size_t count, std::uint64_t salt) {
    Rat c = Rat(Int(1) << d.p.p) * r_dense.c;  // (2r)^p
    GroupBall ball = enumerate_group_ball(d, BallQuery{SparseVector{}, PowThreshold{c}, false});
    std::vector<SparseVector> dirs;
    dirs.reserve(ball.hits.size());
    for (const auto& h : ball.hits)
        if (!h.element.is_zero()) dirs.push_back(h.element);
    std::mt19937_64 rng(d.scheme.seed ^ (0xD1E5C7ED00000000ULL + salt));
    for (std::size_t i = dirs.size(); i > 1; --i)
        std::swap(dirs[i - 1], dirs[rng() % i]);
    if (dirs.size() > count) dirs.resize(count);
    return dirs;
}

struct TilingReport {
    std::uint64_t star_degree = 0;
    std::vector<std::pair<Rat, std::uint64_t>> ball_counts;  // (radius c, count)
    std::optional<DisjointnessWitness> disjointness;
    std::optional<Certificate> vertex_contact;  // p = 1 builds only
    std::vector<std::pair<SparseVector, std::uint64_t>> point_finiteness_samples;
};

inline TilingReport make_tiling_report(const Subgroup& d, const PowThreshold& tile_radius,
                                       const std::vector<Rat>& radii,
                                       const std::vector<SparseVector>& samples) {
    TilingReport rep;
    rep.star_degree = star_degree(d, tile_radius);
    for (const auto& c : radii)
        rep.ball_counts.emplace_back(c, *count_in_ball(d, PowThreshold{c}).count);
    try {
        rep.disjointness = disjointness_witness(d, tile_radius);
    } catch (const NoWitnessAtStage&) {
        rep.disjointness = std::nullopt;
    }
    if (d.p.p == 1 && d.mode != GroupMode::Generators)
        rep.vertex_contact = verify_vertex_contact(d);
    auto rr = detail::resolve_route(d, Route::Auto);
    rep.point_finiteness_samples.resize(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        GroupBall b = detail::run_ball(rr, samples[i], d.p, tile_radius, false,
                                       BallMode::Count);
        rep.point_finiteness_samples[i] = {samples[i], b.count};
    });
    return rep;
}

}  // namespace tilelat
