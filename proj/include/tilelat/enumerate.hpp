#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tilelat/abelian.hpp"
#include "tilelat/gram.hpp"
#include "tilelat/parallel.hpp"
#include "tilelat/subgroup.hpp"
#include "tilelat/triangular.hpp"

namespace tilelat {

struct BallQuery {
    SparseVector center;
    PowThreshold radius;
    bool strict = false;
};

// Fresh: unitriangular fresh-coordinate system, newest generator first.
// Hnf: Hermite basis of the generated lattice (works for any rational
// generators). Gram: exact LDL^T on the Gram matrix, p = 2 only — complete
// pruning on the true quadratic form, the default there because projection
// slack makes the coordinate routes blow up at useful radii.
enum class Route { Auto, Fresh, Hnf, Gram };

struct BoundUnderivable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyBall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SearchBound {
    std::string route;
    unsigned p = 2;
    Rat radius_c{0};
    bool strict = false;
    std::uint64_t nodes = 0;
};

struct GroupBall {
    std::vector<BallHit> hits;   // coefficients in original generator order
    std::uint64_t count = 0;
    SearchBound bound;
};

enum class CertKind {
    SeparationOK,
    SeparationViolated,
    DensityOK,
    DensityGap,
    CountExact,
    InclusionOK,
    InclusionViolation,
    ContactOK,
    ContactViolation,
};

inline const char* cert_kind_name(CertKind k) {
    switch (k) {
        case CertKind::SeparationOK: return "SeparationOK";
        case CertKind::SeparationViolated: return "SeparationViolated";
        case CertKind::DensityOK: return "DensityOK";
        case CertKind::DensityGap: return "DensityGap";
        case CertKind::CountExact: return "CountExact";
        case CertKind::InclusionOK: return "InclusionOK";
        case CertKind::InclusionViolation: return "InclusionViolation";
        case CertKind::ContactOK: return "ContactOK";
        case CertKind::ContactViolation: return "ContactViolation";
    }
    return "?";
}

struct Certificate {
    CertKind kind;
    std::optional<SparseVector> witness;
    std::vector<Int> coefficients;
    std::optional<std::uint64_t> count;
    SearchBound bound;
};

inline bool certificate_ok(const Certificate& c) {
    switch (c.kind) {
        case CertKind::SeparationOK:
        case CertKind::DensityOK:
        case CertKind::CountExact:
        case CertKind::InclusionOK:
        case CertKind::ContactOK: return true;
        default: return false;
    }
}

namespace detail {

// An engine-ready view of a subgroup: either a front-triangular system or a
// Gram factorization, plus the map from engine coefficients back to original
// generator order.
struct ResolvedRoute {
    std::string name;
    bool trivial = false;  // rank 0: the group is {0}
    bool use_gram = false;
    TriangularSystem tri;
    std::optional<GramSystem> gram;
    enum class Map { Identity, Reverse, TransU } map = Map::Identity;
    IntegerMatrix U{1, 1};  // TransU only: n_j = sum_k m_k * U(k, j)
    std::size_t rank = 0;
    std::size_t ngens = 0;
};

inline void resolve_hnf_basis(const std::vector<SparseVector>& gens, ResolvedRoute& rr,
                              std::vector<SparseVector>& basis_out) {
    auto frame = CoordinateFrame::of(gens);
    if (frame.coords.empty()) {
        rr.trivial = true;
        return;
    }
    IntegerMatrix A(gens.size(), frame.coords.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        auto r = *frame.row(gens[i]);
        for (std::size_t j = 0; j < A.cols; ++j) A.at(i, j) = r[j];
    }
    NormalFormResult nf = hnf(A);
    rr.rank = nf.rank;
    if (nf.rank == 0) {
        rr.trivial = true;
        return;
    }
    rr.map = ResolvedRoute::Map::TransU;
    rr.U = nf.U;
    for (std::size_t k = 0; k < nf.rank; ++k) {
        std::vector<Int> row(nf.H.cols);
        std::size_t pivot = nf.H.cols;
        for (std::size_t j = 0; j < nf.H.cols; ++j) {
            row[j] = nf.H.at(k, j);
            if (pivot == nf.H.cols && row[j] != 0) pivot = j;
        }
        basis_out.push_back(frame.vector_of(row));
        rr.tri.control.push_back(frame.coords[pivot]);
    }
    rr.tri.basis = basis_out;
}

inline ResolvedRoute resolve_route(const Subgroup& d, Route route) {
    ResolvedRoute rr;
    auto gens = d.generators();
    rr.ngens = gens.size();
    if (gens.empty()) {
        rr.trivial = true;
        rr.name = "trivial";
        return rr;
    }
    const bool fresh = has_fresh_structure(d);
    if (route == Route::Auto)
        route = (d.p.p == 2) ? Route::Gram : (fresh ? Route::Fresh : Route::Hnf);

    switch (route) {
        case Route::Fresh: {
            if (!fresh)
                throw BoundUnderivable(
                    "group lacks the fresh-coordinate structure; use the hnf route");
            rr.name = "fresh";
            rr.map = ResolvedRoute::Map::Reverse;
            rr.rank = gens.size();
            for (std::size_t k = gens.size(); k-- > 0;) {
                rr.tri.basis.push_back(gens[k]);
                rr.tri.control.push_back(d.records[k].fresh_index);
            }
            return rr;
        }
        case Route::Hnf: {
            rr.name = "hnf";
            std::vector<SparseVector> basis;
            resolve_hnf_basis(gens, rr, basis);
            if (rr.trivial) rr.name = "trivial";
            return rr;
        }
        case Route::Gram: {
            if (d.p.p != 2)
                throw std::invalid_argument("gram route requires p = 2");
            rr.name = "gram";
            rr.use_gram = true;
            if (fresh) {
                rr.gram = gram_factor(gens);
                if (!rr.gram)
                    throw BoundUnderivable("gram factorization failed on a fresh system");
                rr.map = ResolvedRoute::Map::Identity;
                rr.rank = gens.size();
                return rr;
            }
            std::vector<SparseVector> basis;
            resolve_hnf_basis(gens, rr, basis);
            if (rr.trivial) {
                rr.name = "trivial";
                rr.use_gram = false;
                return rr;
            }
            rr.gram = gram_factor(basis);
            if (!rr.gram)
                throw BoundUnderivable("gram factorization failed on an independent basis");
            rr.tri = TriangularSystem{};
            return rr;
        }
        default: throw std::invalid_argument("unresolved route");
    }
}

inline std::vector<Int> map_coeffs(const ResolvedRoute& rr, const std::vector<Int>& m) {
    std::vector<Int> n(rr.ngens);
    switch (rr.map) {
        case ResolvedRoute::Map::Identity:
            for (std::size_t i = 0; i < m.size(); ++i) n[i] = m[i];
            break;
        case ResolvedRoute::Map::Reverse:
            for (std::size_t i = 0; i < m.size(); ++i) n[rr.ngens - 1 - i] = m[i];
            break;
        case ResolvedRoute::Map::TransU:
            for (std::size_t k = 0; k < rr.rank; ++k)
                if (m[k] != 0)
                    for (std::size_t j = 0; j < rr.ngens; ++j)
                        if (rr.U.at(k, j) != 0) n[j] += m[k] * rr.U.at(k, j);
            break;
    }
    return n;
}

inline GroupBall run_ball(const ResolvedRoute& rr, const SparseVector& center, PNorm p,
                          const PowThreshold& radius, bool strict, BallMode mode) {
    GroupBall out;
    out.bound = SearchBound{rr.name, p.p, radius.c, strict, 0};
    if (rr.trivial) {
        out.bound.nodes = 1;
        Rat dist = norm_pow(center, p);
        bool in = strict ? dist < radius.c : dist <= radius.c;
        if (in && mode != BallMode::ExistNonzero) {
            out.count = 1;
            if (mode != BallMode::Count)
                out.hits.push_back(
                    BallHit{std::vector<Int>(rr.ngens, Int(0)), SparseVector{}, dist});
        }
        return out;
    }
    BallOutcome raw = rr.use_gram
                          ? gram_enumerate(*rr.gram, center, radius, strict, mode)
                          : enumerate_triangular(rr.tri, center, p, radius, strict, mode);
    out.count = raw.count;
    out.bound.nodes = raw.nodes;
    out.hits.reserve(raw.hits.size());
    for (auto& h : raw.hits)
        out.hits.push_back(BallHit{map_coeffs(rr, h.coeffs), std::move(h.element),
                                   std::move(h.dist_pow)});
    if (mode == BallMode::Collect)
        std::sort(out.hits.begin(), out.hits.end(), [](const BallHit& a, const BallHit& b) {
            if (a.dist_pow != b.dist_pow) return a.dist_pow < b.dist_pow;
            return vec_less(a.element, b.element);
        });
    return out;
}

}  // namespace detail

// Exactly the group elements x with ||x - center||_p <= radius (< when
// strict), with integer coefficients in original generator order, sorted by
// (distance, canonical vector order).
inline GroupBall enumerate_group_ball(const Subgroup& d, const BallQuery& q,
                                      Route route = Route::Auto,
                                      BallMode mode = BallMode::Collect) {
    auto rr = detail::resolve_route(d, route);
    return detail::run_ball(rr, q.center, d.p, q.radius, q.strict, mode);
}

namespace detail {

// Positive representative of {v, -v} in the canonical order, negating the
// coefficients alongside.
inline void canonicalize_sign(SparseVector& v, std::vector<Int>& coeffs) {
    SparseVector neg = -v;
    if (vec_less(v, neg)) {
        v = std::move(neg);
        for (auto& c : coeffs) c = -c;
    }
}

}  // namespace detail

// Non-strict mode certifies "every nonzero element has norm >= threshold",
// strict mode "... > threshold"; the ball query inverts the flag because the
// violating set is the complement.
inline Certificate verify_separation(const Subgroup& d, const PowThreshold& threshold,
                                     bool strict, Route route = Route::Auto) {
    // Separation at threshold t means every nonzero element has norm >= t
    // (> t in strict mode), so a violation is a nonzero element inside the
    // ball with the comparison flipped. The search stops at the first one.
    GroupBall ball = enumerate_group_ball(
        d, BallQuery{SparseVector{}, threshold, !strict}, route, BallMode::ExistNonzero);
    Certificate cert;
    cert.bound = ball.bound;
    for (auto& h : ball.hits) {
        if (h.element.is_zero()) continue;
        cert.kind = CertKind::SeparationViolated;
        SparseVector w = h.element;
        std::vector<Int> cs = h.coeffs;
        detail::canonicalize_sign(w, cs);
        cert.witness = std::move(w);
        cert.coefficients = std::move(cs);
        return cert;
    }
    cert.kind = CertKind::SeparationOK;
    return cert;
}

// All elements within the search radius of x, sorted by exact distance then
// canonical order; the head realizes dist(x, D) whenever the list is
// nonempty. Throws EmptyBall when nothing lies within the radius.
inline std::vector<BallHit> nearest_elements(const Subgroup& d, const SparseVector& x,
                                             const PowThreshold& search_radius,
                                             Route route = Route::Auto) {
    GroupBall ball = enumerate_group_ball(d, BallQuery{x, search_radius, false}, route);
    if (ball.hits.empty())
        throw EmptyBall("no group element within the search radius; enlarge it");
    return std::move(ball.hits);
}

// Every target must have an element within r (non-strict).
inline Certificate verify_density(const Subgroup& d, const std::vector<SparseVector>& targets,
                                  const PowThreshold& r, Route route = Route::Auto) {
    auto rr = detail::resolve_route(d, route);
    std::vector<char> ok(targets.size(), 0);
    std::vector<std::uint64_t> nodes(targets.size(), 0);
    parallel_for(targets.size(), [&](std::size_t i) {
        GroupBall b = detail::run_ball(rr, targets[i], d.p, r, false, BallMode::Exist);
        ok[i] = b.count > 0 ? 1 : 0;
        nodes[i] = b.bound.nodes;
    });
    Certificate cert;
    cert.bound = SearchBound{rr.name, d.p.p, r.c, false, 0};
    for (auto n : nodes) cert.bound.nodes += n;
    for (std::size_t i = 0; i < targets.size(); ++i)
        if (!ok[i]) {
            cert.kind = CertKind::DensityGap;
            cert.witness = targets[i];
            return cert;
        }
    cert.kind = CertKind::DensityOK;
    cert.count = targets.size();
    return cert;
}

// |D intersect radius-ball around 0|, exact.
inline Certificate count_in_ball(const Subgroup& d, const PowThreshold& radius,
                                 Route route = Route::Auto) {
    GroupBall ball = enumerate_group_ball(d, BallQuery{SparseVector{}, radius, false}, route,
                                          BallMode::Count);
    Certificate cert;
    cert.kind = CertKind::CountExact;
    cert.count = ball.count;
    cert.bound = ball.bound;
    return cert;
}

// Greedy in input order: keep a point iff it clears every kept point by more
// than r (strict) / at least r (non-strict).
inline std::vector<SparseVector> separated_subset(const std::vector<SparseVector>& points,
                                                  const PowThreshold& r, bool strict,
                                                  PNorm p) {
    std::vector<SparseVector> kept;
    for (const auto& q : points) {
        bool clear = true;
        for (const auto& s : kept) {
            Rat dp = distance_pow(q, s, p);
            if (strict ? dp <= r.c : dp < r.c) {
                clear = false;
                break;
            }
        }
        if (clear) kept.push_back(q);
    }
    return kept;
}

// First k standard basis vectors: unit norm, pairwise distance_pow exactly 2
// in every l_p (disjoint supports), witnessing the Kottman lower bound.
inline std::vector<SparseVector> kottman_witness(PNorm p, std::size_t k) {
    (void)p;
    if (k < 2) throw std::invalid_argument("kottman witness needs k >= 2");
    std::vector<SparseVector> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(SparseVector::unit(i));
    return out;
}

// Separation of the generated group at threshold r: discreteness at scale r.
// Runs on the canonical free basis for a clean enumeration structure.
inline Certificate is_discrete(const std::vector<SparseVector>& gens, const PowThreshold& r,
                               PNorm p) {
    Subgroup d = subgroup_from_generators(p, free_basis(gens));
    return verify_separation(d, r, false);
}

}  // namespace tilelat
