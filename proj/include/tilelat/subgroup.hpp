#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "tilelat/scheme.hpp"
#include "tilelat/sparse_vector.hpp"

namespace tilelat {

enum class GroupMode { ExactLp, RieszGeneral, Generators };

// One accepted build step: target u, the coordinate fresh_index untouched by
// everything seen before, and the stored generator g with g - u supported on
// fresh coordinates only (exactly e_fresh in the l_p build).
struct GeneratorRecord {
    std::size_t step = 0;
    std::uint64_t fresh_index = 0;
    SparseVector u;
    SparseVector g;
};

// A finitely generated subgroup together with its construction trace. For
// built groups (ExactLp / RieszGeneral) the trace regenerates the processed
// targets from the scheme; Generators mode wraps a raw generator list (test
// fixtures, external input) with no trace.
struct Subgroup {
    PNorm p{2};
    GroupMode mode = GroupMode::ExactLp;
    EnumerationScheme scheme{};
    std::size_t steps_consumed = 0;
    std::optional<Rat> epsilon;  // RieszGeneral only
    std::vector<GeneratorRecord> records;
    std::vector<SparseVector> raw_generators;  // Generators mode only
    // Union of supports of all processed targets and generators; feeds the
    // smallest-unused fresh index choice.
    std::set<std::uint64_t> used_indices;

    std::vector<SparseVector> generators() const {
        if (mode == GroupMode::Generators) return raw_generators;
        std::vector<SparseVector> gs;
        gs.reserve(records.size());
        for (const auto& r : records) gs.push_back(r.g);
        return gs;
    }

    std::size_t rank_upper_bound() const {
        return mode == GroupMode::Generators ? raw_generators.size() : records.size();
    }
};

inline Subgroup subgroup_from_generators(PNorm p, std::vector<SparseVector> gens) {
    Subgroup d;
    d.p = p;
    d.mode = GroupMode::Generators;
    d.raw_generators = std::move(gens);
    for (const auto& g : d.raw_generators)
        for (const auto& [i, c] : g.terms()) d.used_indices.insert(i);
    return d;
}

// The unitriangular completeness structure: distinct fresh indices, each
// generator exactly u + e_fresh with the fresh coordinate untouched by every
// earlier generator. This is what licenses certified ball enumeration without
// an externally supplied coefficient bound.
inline bool has_fresh_structure(const Subgroup& d) {
    if (d.mode == GroupMode::Generators) return false;
    std::set<std::uint64_t> fresh;
    for (const auto& r : d.records) {
        if (!fresh.insert(r.fresh_index).second) return false;
        if (r.u.coeff(r.fresh_index) != 0) return false;
        if (!(r.g - r.u == SparseVector::unit(r.fresh_index))) return false;
    }
    for (std::size_t i = 0; i < d.records.size(); ++i)
        for (std::size_t j = i + 1; j < d.records.size(); ++j)
            if (d.records[i].g.coeff(d.records[j].fresh_index) != 0) return false;
    return true;
}

inline SparseVector element_of(const Subgroup& d, const std::vector<Int>& coeffs) {
    auto gens = d.generators();
    if (coeffs.size() != gens.size())
        throw std::invalid_argument("coefficient count does not match generator count");
    SparseVector x;
    for (std::size_t i = 0; i < gens.size(); ++i)
        if (coeffs[i] != 0) x.add_scaled(gens[i], Rat(coeffs[i]));
    return x;
}

// Targets the build has consumed so far, regenerated from the scheme.
inline std::vector<SparseVector> processed_targets(const Subgroup& d) {
    if (d.mode == GroupMode::Generators) return {};
    return enumerate_candidates(d.scheme, d.steps_consumed);
}

}  // namespace tilelat
