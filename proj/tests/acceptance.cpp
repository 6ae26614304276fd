// Acceptance gate. Runs the twelve end-to-end checks, prints one PASS/FAIL
// line per criterion (with wall time), and exits 0 only if every criterion
// passes. argv[1] must be the path to the command-line binary; the
// determinism criterion invokes it like a user would.
#include "tilelat/abelian.hpp"
#include "tilelat/builder.hpp"
#include "tilelat/enumerate.hpp"
#include "tilelat/io.hpp"
#include "tilelat/tiling.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace fs = std::filesystem;
using namespace tilelat;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string str(const SparseVector& v) { return to_string(v); }

// Shared fixtures: the two reference constructions reused across criteria.
struct Context {
    std::string cli;
    EnumerationScheme scheme;  // canonical grid order
    std::optional<Subgroup> d1, d2;

    const Subgroup& p1() {
        if (!d1) d1 = build_lp(PNorm{1}, scheme, 200);
        return *d1;
    }
    const Subgroup& p2() {
        if (!d2) d2 = build_lp(PNorm{2}, scheme, 200);
        return *d2;
    }
};

SparseVector combine(const std::vector<SparseVector>& gens, const std::vector<Int>& coeffs) {
    SparseVector x;
    for (std::size_t i = 0; i < gens.size() && i < coeffs.size(); ++i)
        x = x + Rat(coeffs[i]) * gens[i];
    return x;
}

// ---- criteria 1-3: separation and density of the reference builds --------

void crit_separation_p2(Context& ctx) {
    Certificate c = verify_separation(ctx.p2(), PowThreshold{Rat(2)}, true);
    require(c.kind == CertKind::SeparationOK,
            "strict separation failed: " + std::string(cert_kind_name(c.kind)));
}

void crit_separation_p1(Context& ctx) {
    const Subgroup& d = ctx.p1();
    Certificate lax = verify_separation(d, PowThreshold{Rat(2)}, false);
    require(lax.kind == CertKind::SeparationOK, "non-strict separation at threshold 2 failed");

    Certificate strict = verify_separation(d, PowThreshold{Rat(2)}, true);
    require(strict.kind == CertKind::SeparationViolated,
            "strict mode unexpectedly passed at the contact threshold");
    require(strict.witness.has_value(), "violation carries no witness");
    const SparseVector& w = *strict.witness;
    require(w.terms().size() == 1, "witness is not a doubled unit vector: " + str(w));
    Rat cf = w.terms().front().second;
    require(cf == Rat(2) || cf == Rat(-2), "witness coefficient is not +-2: " + str(w));
    require(norm_pow(w, d.p) == Rat(2), "witness norm is not 2");
    require(combine(d.generators(), strict.coefficients) == w,
            "witness coefficients do not reproduce the witness");
}

void crit_density(Context& ctx) {
    std::vector<SparseVector> targets = enumerate_candidates(ctx.scheme, 200);
    for (const Subgroup* d : {&ctx.p1(), &ctx.p2()}) {
        Certificate c = verify_density(*d, targets, PowThreshold{Rat(1)});
        require(c.kind == CertKind::DensityOK,
                "a processed target sits farther than 1 from the p=" +
                    std::to_string(d->p.p) + " group" +
                    (c.witness ? " (witness " + str(*c.witness) + ")" : ""));
    }
}

// ---- criterion 4: norm-2 contact set and pointwise tile counts -----------

void crit_vertex_contact(Context& ctx) {
    const Subgroup& d = ctx.p1();
    Certificate c = verify_vertex_contact(d);
    require(c.kind == CertKind::ContactOK,
            "a norm-2 element is not a doubled unit" +
                (c.witness ? ": " + str(*c.witness) : std::string{}));

    // Independent re-enumeration of the norm-2 shell.
    GroupBall shell = enumerate_group_ball(d, BallQuery{SparseVector{}, PowThreshold{Rat(2)}});
    for (const BallHit& h : shell.hits) {
        if (h.dist_pow != Rat(2)) continue;
        require(h.element.terms().size() == 1 &&
                    (h.element.terms().front().second == Rat(2) ||
                     h.element.terms().front().second == Rat(-2)),
                "norm-2 shell contains " + str(h.element));
    }

    std::vector<SparseVector> samples = sample_points(ctx.scheme, 500, 2);
    std::uint64_t worst = 0;
    for (const SparseVector& x : samples) {
        auto tiles = tiles_containing(d, x, PowThreshold{Rat(1)});
        worst = std::max<std::uint64_t>(worst, tiles.size());
    }
    require(worst <= 2, "a sample point lies in " + std::to_string(worst) + " tiles");
}

// ---- criteria 5-6: cell geometry of the p=2 build ------------------------

void crit_cell_inclusions(Context& ctx) {
    const Subgroup& d = ctx.p2();
    HPolytope cell = voronoi_cell(d, SparseVector{}, PowThreshold{Rat(1)});
    require(cell.density_certified, "central cell is not density-certified");
    std::vector<SparseVector> dirs = direction_probes(d, PowThreshold{Rat(1)}, 100, 1);
    require(dirs.size() == 100, "expected 100 probe directions, got " +
                                    std::to_string(dirs.size()));
    Certificate c =
        inclusion_check(cell, PowThreshold{Rat(2)}, PowThreshold{Rat(1)}, dirs);
    require(c.kind == CertKind::InclusionOK,
            std::string("inclusion violated: ") + cert_kind_name(c.kind) +
                (c.witness ? " at " + str(*c.witness) : std::string{}));
}

void crit_cell_translation_symmetry(Context& ctx) {
    Subgroup d = build_lp(PNorm{2}, ctx.scheme, 60);
    HPolytope v0 = voronoi_cell(d, SparseVector{}, PowThreshold{Rat(1)});
    require(v0.density_certified, "central cell is not density-certified");
    std::vector<SparseVector> samples = sample_points(ctx.scheme, 200, 2);
    require(d.records.size() >= 5, "build too small to pick 5 sites");
    for (std::size_t i = 0; i < 5; ++i) {
        SparseVector site = d.records[i].g;
        HPolytope vd = voronoi_cell(d, site, PowThreshold{Rat(1)});
        for (const SparseVector& x : samples)
            require(cell_membership(vd, x) == cell_membership(v0, x - site),
                    "cell at " + str(site) + " is not the translated central cell at " +
                        str(x));
    }
    for (const SparseVector& x : samples)
        require(cell_membership(v0, x) == cell_membership(v0, -x),
                "central cell asymmetric at " + str(x));
}

// ---- criterion 7: overlapping-tile witnesses ------------------------------

void check_disjointness(const Subgroup& d, const PowThreshold& r) {
    DisjointnessWitness w = disjointness_witness(d, r);
    const std::vector<SparseVector> gens = d.generators();
    require(subgroup_membership(gens, w.d).has_value(), "witness d is not a group element");
    require(subgroup_membership(gens, w.other).has_value(),
            "witness partner is not a group element");
    require(!(w.d == w.other), "witness tiles coincide");
    require(w.other == Rat(2) * w.h, "witness partner is not the doubled near point");
    require(!subgroup_membership(gens, Rat(1, 2) * w.d).has_value(),
            "half of the witness is itself a group element");
    Rat pair_c = Rat(Int(1) << d.p.p) * r.c;  // (2r)^p
    require(distance_pow(w.d, w.other, d.p) <= pair_c, "witness tiles are too far apart");
    require(distance_pow(Rat(1, 2) * w.d, w.h, d.p) <= r.c,
            "near point is outside the tile radius of d/2");
}

void crit_disjointness(Context& ctx) {
    check_disjointness(ctx.p1(), PowThreshold{Rat(1)});
    Subgroup line = subgroup_from_generators(PNorm{1}, {Rat(2) * SparseVector::unit(0)});
    check_disjointness(line, PowThreshold{Rat(1)});
}

// ---- criterion 8: star degree across build stages -------------------------

void crit_star_growth(Context& ctx) {
    std::vector<std::uint64_t> stars;
    for (std::size_t steps : {std::size_t{50}, std::size_t{100}, std::size_t{200},
                              std::size_t{400}}) {
        Subgroup d = build_lp(PNorm{1}, ctx.scheme, steps);
        stars.push_back(star_degree(d, PowThreshold{Rat(1)}));
    }
    for (std::size_t i = 0; i + 1 < stars.size(); ++i)
        require(stars[i] <= stars[i + 1],
                "star degree dropped between stages: " + std::to_string(stars[i]) + " -> " +
                    std::to_string(stars[i + 1]));
    require(stars.back() > stars.front(),
            "star degree did not grow from stage 50 (" + std::to_string(stars.front()) +
                ") to stage 400 (" + std::to_string(stars.back()) + ")");
}

// ---- criterion 9: equilateral unit families -------------------------------

void crit_kottman(Context&) {
    for (unsigned p : {1u, 2u, 3u}) {
        std::vector<SparseVector> fam = kottman_witness(PNorm{p}, 100);
        require(fam.size() == 100, "family has wrong size");
        for (const SparseVector& v : fam)
            require(norm_pow(v, PNorm{p}) == Rat(1), "family member is not a unit vector");
        for (std::size_t i = 0; i < fam.size(); ++i)
            for (std::size_t j = i + 1; j < fam.size(); ++j)
                require(distance_pow(fam[i], fam[j], PNorm{p}) == Rat(2),
                        "pair distance is not exactly 2 for p=" + std::to_string(p));
    }
}

// ---- criterion 10: enumeration vs. brute-force boxes -----------------------

SparseVector random_small_vector(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(1, 3), idx(0, 2), num(-3, 3), den(1, 2);
    std::vector<SparseVector::Term> ts;
    for (int t = nterms(rng); t > 0; --t) ts.emplace_back(idx(rng), Rat(num(rng), den(rng)));
    return SparseVector::from_terms(std::move(ts));
}

void crit_oracle_equivalence(Context&) {
    // A |n| <= 4 coefficient box is a valid oracle only when it covers the
    // whole ball; draws where the engine needs a coefficient outside the box
    // are rejected up front (the rejection test does not look at agreement).
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<int> ngens(1, 3), box(-4, 4);
    const std::vector<std::pair<PNorm, std::vector<Rat>>> cases = {
        {PNorm{1}, {Rat(1), Rat(3, 2), Rat(2)}},
        {PNorm{2}, {Rat(1), Rat(2), Rat(4)}},
    };
    int accepted = 0, rejected = 0;
    while (accepted < 100) {
        std::vector<SparseVector> gens;
        for (int g = ngens(rng); g > 0; --g) gens.push_back(random_small_vector(rng));

        bool in_box = true;
        for (const auto& [p, radii] : cases) {
            Subgroup grp = subgroup_from_generators(p, gens);
            for (const Rat& c : radii) {
                GroupBall ball = enumerate_group_ball(
                    grp, BallQuery{SparseVector{}, PowThreshold{c}});
                std::set<std::string> engine;
                for (const BallHit& h : ball.hits) {
                    require(combine(grp.generators(), h.coeffs) == h.element,
                            "hit coefficients do not reproduce the element");
                    require(h.dist_pow == norm_pow(h.element, p) && h.dist_pow <= c,
                            "hit outside the requested ball");
                    engine.insert(str(h.element));
                    for (const Int& cf : h.coeffs)
                        if (cf > 4 || cf < -4) in_box = false;
                }
                if (!in_box) break;

                // Brute force over the coefficient box on the reduced basis.
                const std::vector<SparseVector>& basis = grp.generators();
                std::set<std::string> brute;
                std::vector<int> n(basis.size(), -4);
                for (;;) {
                    SparseVector x;
                    for (std::size_t i = 0; i < basis.size(); ++i)
                        x = x + Rat(n[i]) * basis[i];
                    if (norm_pow(x, p) <= c) brute.insert(str(x));
                    std::size_t k = 0;
                    while (k < n.size() && n[k] == 4) n[k++] = -4;
                    if (k == n.size()) break;
                    ++n[k];
                }
                require(engine == brute, "engine and box enumeration disagree");
            }
            if (!in_box) break;
        }
        if (in_box)
            ++accepted;
        else
            ++rejected;
    }
    require(rejected <= accepted, "rejected more draws than accepted: " +
                                      std::to_string(rejected) + " vs " +
                                      std::to_string(accepted));
}

// ---- criterion 11: integer-matrix and basis machinery ----------------------

IntegerMatrix mat_mul(const IntegerMatrix& a, const IntegerMatrix& b) {
    IntegerMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k)
            if (a.at(i, k) != 0)
                for (std::size_t j = 0; j < b.cols; ++j)
                    out.at(i, j) += a.at(i, k) * b.at(k, j);
    return out;
}

Int det_cofactor(const IntegerMatrix& m) {
    std::size_t n = m.rows;
    if (n == 0) return 1;
    if (n == 1) return m.at(0, 0);
    Int s(0);
    for (std::size_t j = 0; j < n; ++j) {
        if (m.at(0, j) == 0) continue;
        IntegerMatrix minor(n - 1, n - 1);
        for (std::size_t r = 1; r < n; ++r) {
            std::size_t cc = 0;
            for (std::size_t c = 0; c < n; ++c)
                if (c != j) minor.at(r - 1, cc++) = m.at(r, c);
        }
        Int term = m.at(0, j) * det_cofactor(minor);
        s += (j % 2 == 0) ? term : -term;
    }
    return s;
}

bool unimodular(const IntegerMatrix& m) {
    Int d = det_cofactor(m);
    return d == 1 || d == -1;
}

bool is_row_hnf(const IntegerMatrix& h, std::size_t rank) {
    long long prev_pivot_col = -1;
    for (std::size_t i = 0; i < h.rows; ++i) {
        std::size_t c = 0;
        while (c < h.cols && h.at(i, c) == 0) ++c;
        if (i >= rank) {
            if (c != h.cols) return false;
            continue;
        }
        if (c == h.cols) return false;
        if (static_cast<long long>(c) <= prev_pivot_col) return false;
        prev_pivot_col = static_cast<long long>(c);
        if (h.at(i, c) <= 0) return false;
        for (std::size_t k = 0; k < i; ++k)
            if (h.at(k, c) < 0 || h.at(k, c) >= h.at(i, c)) return false;
    }
    return true;
}

SparseVector row_vec(const IntegerMatrix& m, std::size_t i) {
    std::vector<SparseVector::Term> ts;
    for (std::size_t j = 0; j < m.cols; ++j)
        if (m.at(i, j) != 0) ts.emplace_back(j, Rat(m.at(i, j)));
    return SparseVector::from_terms(std::move(ts));
}

std::vector<SparseVector> random_unimodular_rows(std::mt19937_64& rng, std::size_t n) {
    IntegerMatrix m = IntegerMatrix::identity(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<int> q(-2, 2);
    for (int ops = 0; ops < 12; ++ops) {
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        Int k(q(rng));
        for (std::size_t c = 0; c < n; ++c) m.at(i, c) += k * m.at(j, c);
    }
    std::vector<SparseVector> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(row_vec(m, i));
    return rows;
}

bool spans_same_group(const std::vector<SparseVector>& a, const std::vector<SparseVector>& b) {
    for (const auto& v : a)
        if (!subgroup_membership(b, v)) return false;
    for (const auto& v : b)
        if (!subgroup_membership(a, v)) return false;
    return true;
}

void crit_algebra(Context&) {
    std::mt19937_64 rng(2027);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    std::uniform_int_distribution<int> val(-9, 9);

    for (int it = 0; it < 200; ++it) {
        IntegerMatrix a(dim(rng), dim(rng));
        for (auto& x : a.a) x = val(rng);

        NormalFormResult h = hnf(a);
        require(mat_mul(h.U, a) == h.H, "U*A != H");
        require(unimodular(h.U), "row transform is not unimodular");
        require(is_row_hnf(h.H, h.rank), "H is not in row normal form");

        NormalFormResult s = smith(a);
        require(s.V.has_value() && s.V_inv.has_value(), "column transform missing");
        require(mat_mul(mat_mul(s.U, a), *s.V) == s.H, "U*A*V != S");
        require(mat_mul(*s.V, *s.V_inv) == IntegerMatrix::identity(a.cols),
                "V * V^-1 != I");
        require(unimodular(s.U) && unimodular(*s.V), "transforms are not unimodular");
        require(s.invariant_factors.size() == s.rank, "factor count != rank");
        for (std::size_t i = 0; i < s.H.rows; ++i)
            for (std::size_t j = 0; j < s.H.cols; ++j)
                if (i != j)
                    require(s.H.at(i, j) == 0, "S has an off-diagonal entry");
        for (std::size_t i = 0; i < s.rank; ++i) {
            require(s.H.at(i, i) == s.invariant_factors[i] && s.invariant_factors[i] > 0,
                    "diagonal does not list the positive invariant factors");
            if (i + 1 < s.rank)
                require(s.invariant_factors[i + 1] % s.invariant_factors[i] == 0,
                        "invariant factors are not a divisibility chain");
        }
    }

    std::uniform_int_distribution<int> nv(3, 5), coord(0, 3), entry(-4, 4);
    for (int it = 0; it < 60; ++it) {
        std::vector<SparseVector> gens;
        for (int g = nv(rng); g > 0; --g) {
            std::vector<SparseVector::Term> ts;
            for (int t = 0; t < 3; ++t) {
                int e = entry(rng);
                if (e != 0) ts.emplace_back(coord(rng), Rat(e));
            }
            gens.push_back(SparseVector::from_terms(std::move(ts)));
        }
        std::vector<SparseVector> basis = free_basis(gens);
        require(spans_same_group(basis, gens),
                "basis and generators span different groups");
    }

    for (int it = 0; it < 50; ++it) {
        auto rows = random_unimodular_rows(rng, 4);
        std::vector<std::vector<SparseVector>> chain;
        chain.push_back({rows[0], rows[0] + rows[1], rows[1]});
        chain.push_back({rows[0], rows[1], rows[2]});
        chain.push_back({rows[0], rows[1], rows[2], rows[3]});
        auto res = extend_basis(chain);
        require(std::holds_alternative<std::vector<std::vector<SparseVector>>>(res),
                "valid chain rejected");
        const auto& bases = std::get<std::vector<std::vector<SparseVector>>>(res);
        require(bases.size() == 3, "wrong number of levels");
        for (std::size_t lvl = 0; lvl + 1 < bases.size(); ++lvl)
            for (std::size_t i = 0; i < bases[lvl].size(); ++i)
                require(bases[lvl][i] == bases[lvl + 1][i],
                        "inner basis is not a prefix of the next level");
        for (std::size_t lvl = 0; lvl < bases.size(); ++lvl)
            require(spans_same_group(bases[lvl], chain[lvl]),
                    "level basis spans the wrong group");
    }

    std::uniform_int_distribution<int> factor(2, 5);
    for (int it = 0; it < 50; ++it) {
        auto rows = random_unimodular_rows(rng, 3);
        int k = factor(rng);
        std::vector<std::vector<SparseVector>> chain;
        chain.push_back({Rat(k) * rows[0], rows[1]});
        chain.push_back({rows[0], rows[1]});
        auto res = extend_basis(chain);
        require(std::holds_alternative<ChainError>(res), "torsion chain accepted");
        const ChainError& err = std::get<ChainError>(res);
        require(err.kind == ChainError::Kind::TorsionQuotient && err.factor == k,
                "torsion quotient misreported");
    }
}

// ---- criterion 12: byte-identical reruns through the CLI -------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(in.good(), "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void crit_determinism(Context& ctx) {
    fs::path dir = fs::temp_directory_path() / "tilelat-acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path log = dir / "cli.log";
    auto run_build = [&](const std::string& flags, const fs::path& out) {
        std::string cmd = "\"" + ctx.cli + "\" build " + flags + " --out \"" +
                          out.string() + "\" > \"" + log.string() + "\" 2>&1";
        int rc = std::system(cmd.c_str());
        require(rc == 0, "CLI exited nonzero for: " + cmd + "\n" + slurp(log));
    };
    const std::string flag_sets[] = {"--p 1 --steps 60", "--p 2 --steps 40"};
    for (std::size_t i = 0; i < 2; ++i) {
        fs::path f1 = dir / ("a" + std::to_string(i) + ".json");
        fs::path f2 = dir / ("b" + std::to_string(i) + ".json");
        run_build(flag_sets[i], f1);
        run_build(flag_sets[i], f2);
        std::string b1 = slurp(f1), b2 = slurp(f2);
        require(!b1.empty(), "CLI wrote an empty group file");
        require(b1 == b2, "reruns differ for flags: " + flag_sets[i]);
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
        return 2;
    }
    Context ctx;
    ctx.cli = argv[1];

    struct Criterion {
        const char* label;
        double budget_s;
        std::function<void(Context&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {"p=2 build at 200 steps is strictly separated at squared threshold 2", 60,
         crit_separation_p2},
        {"p=1 build at 200 steps is separated at 2, with doubled-unit boundary contact", 60,
         crit_separation_p1},
        {"every processed target lies within distance 1 of its build", 60, crit_density},
        {"p=1 norm-2 elements are doubled units; sample points meet at most 2 tiles", 120,
         crit_vertex_contact},
        {"p=2 central cell contains the half-sqrt-2 ball and fits in the unit ball "
         "along 100 probe directions",
         120, crit_cell_inclusions},
        {"cells translate with their sites and the central cell is symmetric", 60,
         crit_cell_translation_symmetry},
        {"overlapping-tile witnesses exist for the p=1 build and the doubled line", 30,
         crit_disjointness},
        {"star degree is non-decreasing over stages 50..400 and grows overall", 300,
         crit_star_growth},
        {"100 unit vectors with all pairwise distance exactly 2^(1/p), p in {1,2,3}", 10,
         crit_kottman},
        {"ball enumeration equals brute-force coefficient boxes on 100 random groups", 120,
         crit_oracle_equivalence},
        {"normal-form identities, basis round-trips, and chain extensions", 120,
         crit_algebra},
        {"identical CLI build invocations produce byte-identical files", 60,
         crit_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& cr = criteria[i];
        auto t0 = std::chrono::steady_clock::now();
        std::string why;
        try {
            cr.fn(ctx);
        } catch (const std::exception& e) {
            why = e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
        if (why.empty() && secs > cr.budget_s)
            why = "exceeded time budget of " + std::to_string(cr.budget_s) + "s";
        if (why.empty()) {
            std::printf("PASS %2zu  %s  (%.1fs)\n", i + 1, cr.label, secs);
        } else {
            std::printf("FAIL %2zu  %s  (%.1fs): %s\n", i + 1, cr.label, secs, why.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
}
