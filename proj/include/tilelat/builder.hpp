#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "tilelat/enumerate.hpp"
#include "tilelat/scheme.hpp"
#include "tilelat/subgroup.hpp"

namespace tilelat {

struct RieszOracleUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Norm plug-in for the general construction: exact evaluation plus a Riesz
// witness x with ||x|| <= 1 + eps and dist(x, span(previous generators and
// u)) >= 1. Only the l_p oracle ships; the witness e_fresh is exact there,
// since ||e_fresh - z||_p^p = 1 + ||z||_p^p >= 1 for every z supported away
// from the fresh coordinate.
class NormOracle {
  public:
    virtual ~NormOracle() = default;
    virtual Rat norm_pow(const SparseVector& v, PNorm p) const = 0;
    virtual std::optional<SparseVector> riesz_witness(const Subgroup& state,
                                                      const SparseVector& u, const Rat& eps,
                                                      std::uint64_t fresh_index) const = 0;
};

class LpRieszOracle final : public NormOracle {
  public:
    Rat norm_pow(const SparseVector& v, PNorm p) const override {
        return tilelat::norm_pow(v, p);
    }
    std::optional<SparseVector> riesz_witness(const Subgroup&, const SparseVector&,
                                              const Rat&, std::uint64_t fresh_index) const
        override {
        return SparseVector::unit(fresh_index);
    }
};

namespace detail {

inline std::uint64_t smallest_unused_index(const Subgroup& st) {
    std::uint64_t i = 0;
    while (st.used_indices.count(i)) ++i;
    return i;
}

// Incremental engine state for a whole build: the p = 2 route keeps a growing
// Gram factorization, other p keep the reversed fresh-coordinate system, so a
// step costs one exists-query plus an O(m^2) extension instead of a full
// refactor.
struct BuildCache {
    bool use_gram;
    GramSystem gram;
    TriangularSystem tri;

    explicit BuildCache(const Subgroup& st) : use_gram(st.p.p == 2) {
        if (use_gram) {
            auto f = gram_factor(st.generators());
            if (!f) throw std::logic_error("dependent generators in a fresh build");
            gram = std::move(*f);
        } else {
            for (std::size_t k = st.records.size(); k-- > 0;) {
                tri.basis.push_back(st.records[k].g);
                tri.control.push_back(st.records[k].fresh_index);
            }
        }
    }

    bool any_within(const Subgroup& st, const SparseVector& u, const Rat& c) const {
        PowThreshold r{c};
        BallOutcome out = use_gram ? gram_enumerate(gram, u, r, false, BallMode::Exist)
                                   : enumerate_triangular(tri, u, st.p, r, false,
                                                          BallMode::Exist);
        return out.count > 0;
    }

    void append(const GeneratorRecord& rec) {
        if (use_gram) {
            if (!gram_append(gram, rec.g))
                throw std::logic_error("dependent generator in a fresh build");
        } else {
            tri.basis.insert(tri.basis.begin(), rec.g);
            tri.control.insert(tri.control.begin(), rec.fresh_index);
        }
    }
};

// One build step against a live cache. skip_c is the p-th power of the skip
// radius (1 for the exact l_p build, (1+eps)^p for the Riesz build).
inline void step_core(Subgroup& st, const SparseVector& u, const Rat& skip_c,
                      BuildCache& cache, const NormOracle* oracle, const Rat* eps) {
    for (const auto& [i, c] : u.terms()) st.used_indices.insert(i);
    if (!cache.any_within(st, u, skip_c)) {
        GeneratorRecord rec;
        rec.step = st.steps_consumed;
        rec.fresh_index = smallest_unused_index(st);
        rec.u = u;
        if (oracle) {
            auto x = oracle->riesz_witness(st, u, *eps, rec.fresh_index);
            if (!x)
                throw RieszOracleUnavailable(
                    "configured norm oracle has no exact Riesz witness");
            rec.g = u + *x;
            for (const auto& [i, c] : x->terms()) st.used_indices.insert(i);
        } else {
            rec.g = u + SparseVector::unit(rec.fresh_index);
        }
        st.used_indices.insert(rec.fresh_index);
        cache.append(rec);
        st.records.push_back(std::move(rec));
    }
    ++st.steps_consumed;
}

}  // namespace detail

inline Subgroup make_lp_state(PNorm p, EnumerationScheme scheme) {
    Subgroup st;
    st.p = p;
    st.mode = GroupMode::ExactLp;
    st.scheme = std::move(scheme);
    return st;
}

inline Subgroup make_riesz_state(PNorm p, EnumerationScheme scheme, Rat eps) {
    Subgroup st;
    st.p = p;
    st.mode = GroupMode::RieszGeneral;
    st.scheme = std::move(scheme);
    st.epsilon = std::move(eps);
    return st;
}

// Skip when some existing element is within distance 1 of u (ties skip);
// otherwise append g = u + e_fresh with the smallest coordinate index unused
// by every support seen so far, targets and generators alike.
inline Subgroup step_lp(Subgroup state, const SparseVector& u) {
    if (state.mode != GroupMode::ExactLp)
        throw std::invalid_argument("step_lp requires an exact_lp state");
    detail::BuildCache cache(state);
    detail::step_core(state, u, Rat(1), cache, nullptr, nullptr);
    return state;
}

// Same step with skip radius 1 + eps and the generator u + x for an exact
// Riesz witness x from the norm oracle.
inline Subgroup step_riesz(Subgroup state, const SparseVector& u, const Rat& eps,
                           const NormOracle* oracle = nullptr) {
    if (state.mode != GroupMode::RieszGeneral)
        throw std::invalid_argument("step_riesz requires a riesz_general state");
    static const LpRieszOracle lp_oracle;
    if (!oracle) oracle = &lp_oracle;
    detail::BuildCache cache(state);
    detail::step_core(state, u, abs_pow(Rat(1) + eps, state.p.p), cache, oracle, &eps);
    return state;
}

// Folds step_lp over the candidate sequence. Pure in (p, scheme, steps), and
// prefix-stable: the group at N steps is a subgroup of the group at N+1.
inline Subgroup build_lp(PNorm p, const EnumerationScheme& scheme, std::size_t steps) {
    if (steps < 1) throw std::invalid_argument("build needs at least one step");
    Subgroup st = make_lp_state(p, scheme);
    detail::BuildCache cache(st);
    for (const auto& u : enumerate_candidates(scheme, steps))
        detail::step_core(st, u, Rat(1), cache, nullptr, nullptr);
    return st;
}

// Riesz-mode fold; schedule (when nonempty) supplies a per-step eps, padded
// with the base eps beyond its length.
inline Subgroup build_riesz(PNorm p, const EnumerationScheme& scheme, std::size_t steps,
                            const Rat& eps, const std::vector<Rat>& schedule = {},
                            const NormOracle* oracle = nullptr) {
    if (steps < 1) throw std::invalid_argument("build needs at least one step");
    static const LpRieszOracle lp_oracle;
    if (!oracle) oracle = &lp_oracle;
    Subgroup st = make_riesz_state(p, scheme, eps);
    detail::BuildCache cache(st);
    auto cand = enumerate_candidates(scheme, steps);
    for (std::size_t k = 0; k < cand.size(); ++k) {
        const Rat& ek = k < schedule.size() ? schedule[k] : eps;
        detail::step_core(st, cand[k], abs_pow(Rat(1) + ek, p.p), cache, oracle, &ek);
    }
    return st;
}

namespace detail {

// Exact decision of norm <= 2 * r + eps with norm = N^(1/p), r = c^(1/p).
// Closed forms for p = 1, 2; for p >= 3 the rational-root and eps = 0 cases
// are exact and the rest is decided by interval refinement, which terminates
// whenever no exact tie is possible (a tie forces both roots rational, which
// the exact cases already cover).
inline bool norm_leq_2r_eps(const Rat& N, const Rat& c, const Rat& eps, unsigned p) {
    if (p == 1) return N <= 2 * c + eps;
    if (p == 2) {
        Rat L = N - 4 * c - eps * eps;
        if (L <= 0) return true;
        return L * L <= 16 * eps * eps * c;
    }
    if (eps == 0) return N <= Rat(Int(1) << p) * c;
    auto rn = rat_root_exact(N, p);
    auto rc = rat_root_exact(c, p);
    if (rn && rc) return *rn <= 2 * *rc + eps;
    for (unsigned bits = 32; bits <= 4096; bits *= 2) {
        Int scale = Int(1) << bits;
        // floor(x^(1/p) * 2^bits) via integer root of x * 2^(p*bits)
        auto scaled_floor = [&](const Rat& x) {
            Int t = numerator(x) * boost::multiprecision::pow(scale, p) / denominator(x);
            return iroot_floor(t, p);
        };
        Int nl = scaled_floor(N);
        Int cl = scaled_floor(c);
        Rat n_lo(nl, scale), n_hi(nl + 1, scale);
        Rat c_lo(cl, scale), c_hi(cl + 1, scale);
        if (n_hi <= 2 * c_lo + eps) return true;
        if (n_lo > 2 * c_hi + eps) return false;
    }
    throw std::logic_error("norm comparison tie unresolved at precision cap");
}

}  // namespace detail

struct BoundedGenerators {
    std::vector<SparseVector> elements;  // D within the (2r + eps)-ball, canonical order
    bool generates = true;
    std::optional<SparseVector> gap_witness;  // first generator outside spanZ(elements)
    // Per original generator: integer coefficients over `elements` (all zero
    // at the zero element's position). Empty rows past a gap.
    std::vector<std::vector<Int>> expressions;
};

// S = D intersected with the closed ball of radius 2r + eps, together with a
// verified certificate that S generates D (every original generator expressed
// over S), or the first generator witnessing the gap.
inline BoundedGenerators bounded_generators(const Subgroup& d, const PowThreshold& r,
                                            const Rat& eps) {
    if (eps < 0) throw std::invalid_argument("eps must be nonnegative");
    const unsigned p = d.p.p;
    // Rational over-approximation of (2 c^(1/p) + eps)^p for the engine, then
    // the exact predicate per element.
    Rat c_up;
    if (p == 1) {
        c_up = 2 * r.c + eps;
    } else {
        Int num = numerator(r.c), den = denominator(r.c);
        Int scaled = num * boost::multiprecision::pow(den, p - 1);
        Rat root_up(iroot_floor(scaled, p) + 1, den);
        c_up = abs_pow(2 * root_up + eps, p);
    }
    GroupBall ball = enumerate_group_ball(d, BallQuery{SparseVector{}, PowThreshold{c_up}});

    BoundedGenerators out;
    std::vector<SparseVector> span_gens;
    std::vector<std::size_t> span_pos;  // position in `elements`
    for (auto& h : ball.hits) {
        if (!detail::norm_leq_2r_eps(h.dist_pow, r.c, eps, p)) continue;
        if (!h.element.is_zero()) {
            span_gens.push_back(h.element);
            span_pos.push_back(out.elements.size());
        }
        out.elements.push_back(std::move(h.element));
    }
    for (const auto& g : d.generators()) {
        auto coeffs = subgroup_membership(span_gens, g);
        if (!coeffs) {
            out.generates = false;
            out.gap_witness = g;
            break;
        }
        std::vector<Int> row(out.elements.size(), Int(0));
        for (std::size_t k = 0; k < span_gens.size(); ++k) row[span_pos[k]] = (*coeffs)[k];
        out.expressions.push_back(std::move(row));
    }
    return out;
}

}  // namespace tilelat
