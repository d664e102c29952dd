#include "mdcms/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mdcms/shannon.hpp"

namespace mdcms {

void SearchConfig::validate() const {
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(step_shrink > 0.0) || !(step_shrink < 1.0))
        throw std::invalid_argument("step_shrink must lie in (0, 1)");
    if (!(step_init > 0.0)) throw std::invalid_argument("step_init must be > 0");
    for (const auto& [role, size] : aux_alphabet_sizes)
        if (size < 1)
            throw std::invalid_argument("alphabet size for role '" + role + "' must be >= 1");
}

}  // namespace mdcms

namespace mdcms::search {

namespace {

constexpr double kFeasibleTol = 1e-7;   // distortion slack accepted before polish
constexpr double kImproveEps = 1e-15;

// ---------------------------------------------------------------------------
// Deterministic RNG (independent stream per restart, platform-stable).

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }
    int below(int n) { return int(uniform01() * n) % n; }
};

// ---------------------------------------------------------------------------
// Blocks and projection: each block is a slice of the parameter vector that
// must stay on a scaled probability simplex (fixed mass).

struct Block {
    std::vector<std::size_t> idx;
    double mass = 1.0;
};

void project_block(std::vector<double>& x, const Block& b) {
    const std::size_t n = b.idx.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = x[b.idx[i]];
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        css += u[k];
        const double t = (css - b.mass) / double(k + 1);
        if (u[k] - t > 0.0) theta = t;
    }
    for (std::size_t i = 0; i < n; ++i)
        x[b.idx[i]] = std::max(x[b.idx[i]] - theta, 0.0);
}

void project_all(std::vector<double>& x, const std::vector<Block>& blocks) {
    for (const auto& b : blocks) project_block(x, b);
}

// Cyclic coordinate descent with +-step probes and step halving on stall.
template <class F>
double descend(std::vector<double>& x, F&& f, const std::vector<Block>& blocks,
               const SearchConfig& cfg) {
    std::vector<int> coord_block(x.size(), -1);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        for (std::size_t i : blocks[bi].idx) coord_block[i] = int(bi);

    project_all(x, blocks);
    double fx = f(x);
    if (!std::isfinite(fx)) throw std::runtime_error("objective returned a non-finite value");
    double step = cfg.step_init;
    std::vector<double> y;
    for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
        bool improved = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (coord_block[i] < 0) continue;
            for (double sgn : {1.0, -1.0}) {
                y = x;
                y[i] += sgn * step;
                project_block(y, blocks[coord_block[i]]);
                const double fy = f(y);
                if (!std::isfinite(fy))
                    throw std::runtime_error("objective returned a non-finite value");
                if (fy < fx - kImproveEps) {
                    x.swap(y);
                    fx = fy;
                    improved = true;
                }
            }
        }
        if (!improved) {
            step *= cfg.step_shrink;
            if (step < cfg.tol) break;
        }
    }
    return fx;
}

// ---------------------------------------------------------------------------
// Fast evaluator for the L=2 cross-section families. Parameter vector is the
// joint table over (X, V, U1, U2) with X fastest-varying LAST in layout
// ((x*nv + v)*a1 + u1)*a2 + u2; the central refinement U_12 = X is implied.
// The LP collapses in closed form at L=2:
//   value = 2*alpha + max(beta_1 + beta_2, beta_12),
//   alpha = I(X;V), beta_l = I(X;U_l|V), beta_12 = H(X|V) + I(U1;U2|V).
// min_rates on the materialized model reproduces this (checked in tests).

struct PairFamily {
    int nv = 1;   // 1 = EC (no live shared variable)
    int a1 = 2, a2 = 2;
    double budget = 0.0;  // 2 D

    int size() const { return 2 * nv * a1 * a2; }

    struct Terms {
        double value = 0.0;
        double dist = 0.0;
    };

    Terms eval(const std::vector<double>& p) const {
        const int NV = nv, A1 = a1, A2 = a2;
        // accumulate marginals in fixed scratch
        thread_local std::vector<double> m_v, m_xv, m_vu1, m_vu2, m_xvu1, m_xvu2, m_vu12;
        m_v.assign(NV, 0.0);
        m_xv.assign(2 * NV, 0.0);
        m_vu1.assign(NV * A1, 0.0);
        m_vu2.assign(NV * A2, 0.0);
        m_xvu1.assign(2 * NV * A1, 0.0);
        m_xvu2.assign(2 * NV * A2, 0.0);
        m_vu12.assign(NV * A1 * A2, 0.0);
        std::size_t c = 0;
        for (int x = 0; x < 2; ++x)
            for (int v = 0; v < NV; ++v)
                for (int u1 = 0; u1 < A1; ++u1)
                    for (int u2 = 0; u2 < A2; ++u2, ++c) {
                        const double w = p[c];
                        m_v[v] += w;
                        m_xv[x * NV + v] += w;
                        m_vu1[v * A1 + u1] += w;
                        m_vu2[v * A2 + u2] += w;
                        m_xvu1[(x * NV + v) * A1 + u1] += w;
                        m_xvu2[(x * NV + v) * A2 + u2] += w;
                        m_vu12[(v * A1 + u1) * A2 + u2] += w;
                    }
        auto ent = [](const std::vector<double>& m) {
            double h = 0.0;
            for (double w : m)
                if (w > 0.0) h -= w * std::log2(w);
            return h;
        };
        const double hv = ent(m_v), hxv = ent(m_xv);
        const double hvu1 = ent(m_vu1), hvu2 = ent(m_vu2);
        const double hxvu1 = ent(m_xvu1), hxvu2 = ent(m_xvu2);
        const double hvu12 = ent(m_vu12);
        double hx = 0.0;
        for (int x = 0; x < 2; ++x) {
            double w = 0.0;
            for (int v = 0; v < NV; ++v) w += m_xv[x * NV + v];
            if (w > 0.0) hx -= w * std::log2(w);
        }
        auto clamp0 = [](double t) { return t < 0.0 ? 0.0 : t; };
        const double alpha = clamp0(hv + hx - hxv);
        const double b1 = clamp0(hxv + hvu1 - hv - hxvu1);
        const double b2 = clamp0(hxv + hvu2 - hv - hxvu2);
        const double b12 = clamp0((hxv - hv) + (hvu1 - hv) + (hvu2 - hv) - (hvu12 - hv));

        Terms t;
        t.value = 2.0 * alpha + std::max(b1 + b2, b12);
        double d = 0.0;
        for (int v = 0; v < NV; ++v) {
            for (int u1 = 0; u1 < A1; ++u1)
                d += std::min(m_xvu1[v * A1 + u1], m_xvu1[(NV + v) * A1 + u1]);
            for (int u2 = 0; u2 < A2; ++u2)
                d += std::min(m_xvu2[v * A2 + u2], m_xvu2[(NV + v) * A2 + u2]);
        }
        t.dist = d;
        return t;
    }

    std::vector<Block> blocks() const {
        std::vector<Block> out(2);
        const std::size_t half = std::size_t(size()) / 2;
        for (std::size_t i = 0; i < std::size_t(size()); ++i)
            out[i < half ? 0 : 1].idx.push_back(i);
        out[0].mass = out[1].mass = 0.5;
        return out;
    }

    // All mass on (v=0, u1=x, u2=x): decoders recover X exactly.
    std::vector<double> ideal() const {
        std::vector<double> p(size(), 0.0);
        for (int x = 0; x < 2; ++x) {
            const int u1 = std::min(x, a1 - 1), u2 = std::min(x, a2 - 1);
            p[std::size_t(((x * nv + 0) * a1 + u1) * a2 + u2)] = 0.5;
        }
        return p;
    }

    std::vector<double> random_init(Rng& rng, int mode) const {
        std::vector<double> p(size(), 0.0);
        if (mode == 0) {
            // product of independent random marginals per source symbol
            for (int x = 0; x < 2; ++x) {
                std::vector<double> qv(nv), q1(a1), q2(a2);
                auto draw = [&](std::vector<double>& q) {
                    double s = 0.0;
                    for (auto& e : q) {
                        e = -std::log(rng.uniform01() + 1e-300);
                        s += e;
                    }
                    for (auto& e : q) e /= s;
                };
                draw(qv);
                draw(q1);
                draw(q2);
                for (int v = 0; v < nv; ++v)
                    for (int u1 = 0; u1 < a1; ++u1)
                        for (int u2 = 0; u2 < a2; ++u2)
                            p[std::size_t(((x * nv + v) * a1 + u1) * a2 + u2)] =
                                0.5 * qv[v] * q1[u1] * q2[u2];
            }
        } else {
            // perturbed deterministic coupling: a random vertex plus 10% uniform
            const int half = size() / 2;
            for (int x = 0; x < 2; ++x) {
                const int k = rng.below(half);
                for (int i = 0; i < half; ++i)
                    p[std::size_t(x * half + i)] = 0.5 * 0.1 / half;
                p[std::size_t(x * half + k)] += 0.5 * 0.9;
            }
        }
        return p;
    }
};

// Materialize the search table as a full model with U_12 = X appended.
AuxModel materialize_pair_model(const PairFamily& fam, const std::vector<double>& p) {
    std::vector<VariableSpec> vars;
    vars.push_back({"X", 2});
    if (fam.nv > 1) vars.push_back({"V_12", fam.nv});
    vars.push_back({"U_1", fam.a1});
    vars.push_back({"U_2", fam.a2});
    vars.push_back({"U_12", 2});

    std::vector<double> probs;
    probs.reserve(std::size_t(fam.size()) * 2);
    for (int x = 0; x < 2; ++x)
        for (int v = 0; v < fam.nv; ++v)
            for (int u1 = 0; u1 < fam.a1; ++u1)
                for (int u2 = 0; u2 < fam.a2; ++u2) {
                    const double w = p[std::size_t(((x * fam.nv + v) * fam.a1 + u1) * fam.a2 + u2)];
                    // u12 runs fastest; it copies x
                    probs.push_back(x == 0 ? w : 0.0);
                    probs.push_back(x == 1 ? w : 0.0);
                }

    std::map<DescriptionSet, std::string> shared, aux;
    const DescriptionSet s1({1}, 2), s2({2}, 2), s12({1, 2}, 2);
    if (fam.nv > 1) shared[s12] = "V_12";
    aux[s1] = "U_1";
    aux[s2] = "U_2";
    aux[s12] = "U_12";
    std::map<DescriptionSet, DistortionMeasure> dist;
    dist[s1] = hamming_distortion(2);
    dist[s2] = hamming_distortion(2);
    dist[s12] = hamming_distortion(2);
    return AuxModel(2, fam.nv > 1 ? Scheme::ZB : Scheme::EC,
                    JointDistribution(std::move(vars), std::move(probs)), "X",
                    std::move(shared), std::move(aux), std::move(dist));
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 0) jobs = int(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

struct RestartOutcome {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> params;
};

// Penalty rounds (x10 escalation), a fine-step re-descent at the final
// penalty weight, then an exact-feasibility polish: blend toward the
// zero-distortion coupling until the budget holds.
RestartOutcome drive_to_feasible(const PairFamily& fam, std::vector<double> p,
                                 const SearchConfig& cfg) {
    const auto blocks = fam.blocks();
    double lambda = 50.0;
    for (int round = 0; round < 6; ++round) {
        descend(
            p,
            [&](const std::vector<double>& q) {
                const auto t = fam.eval(q);
                return t.value + lambda * std::max(0.0, t.dist - fam.budget);
            },
            blocks, cfg);
        if (fam.eval(p).dist <= fam.budget + kFeasibleTol) break;
        lambda *= 10.0;
    }
    SearchConfig fine = cfg;
    fine.step_init = std::min(cfg.step_init, 0.01);
    fine.tol = std::min(cfg.tol, 1e-10);
    descend(
        p,
        [&](const std::vector<double>& q) {
            const auto t = fam.eval(q);
            return t.value + lambda * std::max(0.0, t.dist - fam.budget);
        },
        blocks, fine);
    if (fam.eval(p).dist > fam.budget) {
        const auto anchor = fam.ideal();
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            std::vector<double> q(p.size());
            for (std::size_t i = 0; i < p.size(); ++i)
                q[i] = (1.0 - mid) * p[i] + mid * anchor[i];
            (fam.eval(q).dist <= fam.budget ? hi : lo) = mid;
        }
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = (1.0 - hi) * p[i] + hi * anchor[i];
    }
    RestartOutcome out;
    out.value = fam.eval(p).value;
    out.params = std::move(p);
    return out;
}

struct FamilySearchResult {
    RestartOutcome best;
    std::vector<RestartTrace> trace;
};

// Multi-restart driver. `extras` are additional deterministic starting points
// (grid winner, warm starts); they compete for the minimum after the seeded
// restarts, so reports stay identical under any thread count.
FamilySearchResult search_family(const PairFamily& fam, const SearchConfig& cfg,
                                 std::uint64_t stream_salt,
                                 const std::vector<std::vector<double>>& extras) {
    std::vector<RestartOutcome> outcomes(cfg.restarts);
    parallel_for(cfg.restarts, cfg.jobs, [&](int r) {
        Rng rng(splitmix64(cfg.seed ^ stream_salt ^ (0x9E3779B97F4A7C15ULL * std::uint64_t(r + 1))));
        outcomes[std::size_t(r)] =
            drive_to_feasible(fam, fam.random_init(rng, r % 2), cfg);
    });

    std::vector<RestartOutcome> extra_outcomes(extras.size());
    parallel_for(int(extras.size()), cfg.jobs, [&](int i) {
        extra_outcomes[std::size_t(i)] = drive_to_feasible(fam, extras[std::size_t(i)], cfg);
    });

    FamilySearchResult res;
    for (int r = 0; r < cfg.restarts; ++r) {
        res.trace.push_back({r, outcomes[std::size_t(r)].value, true});
        if (outcomes[std::size_t(r)].value < res.best.value) res.best = outcomes[std::size_t(r)];
    }
    for (const auto& eo : extra_outcomes)
        if (eo.value < res.best.value) res.best = eo;
    return res;
}

// Exhaustive 1/32 grid over binary-auxiliary EC tables (the coarse global
// stage backing the EC-side minimum).
std::vector<double> ec_grid_best(double distortion, const SearchConfig& cfg) {
    const PairFamily fam{1, 2, 2, 2.0 * distortion};
    constexpr int kHalf = 16;  // block mass 0.5 in steps of 1/32
    std::vector<std::array<double, 4>> comps;
    for (int i = 0; i <= kHalf; ++i)
        for (int j = 0; i + j <= kHalf; ++j)
            for (int k = 0; i + j + k <= kHalf; ++k)
                comps.push_back({i / 32.0, j / 32.0, k / 32.0, (kHalf - i - j - k) / 32.0});

    const int n = int(comps.size());
    struct Best {
        double value = std::numeric_limits<double>::infinity();
        int i = -1, j = -1;
    };
    std::vector<Best> per_row(n);
    parallel_for(n, cfg.jobs, [&](int i) {
        std::vector<double> p(8);
        Best b;
        for (int j = 0; j < n; ++j) {
            for (int t = 0; t < 4; ++t) {
                p[t] = comps[std::size_t(i)][std::size_t(t)];
                p[4 + t] = comps[std::size_t(j)][std::size_t(t)];
            }
            const auto terms = fam.eval(p);
            if (terms.dist <= fam.budget && terms.value < b.value) {
                b.value = terms.value;
                b.i = i;
                b.j = j;
            }
        }
        per_row[std::size_t(i)] = b;
    });
    Best best;
    for (const auto& b : per_row)
        if (b.value < best.value || (b.value == best.value && b.i >= 0 &&
                                     (best.i < 0 || b.i < best.i)))
            best = b;
    if (best.i < 0) return {};
    std::vector<double> p(8);
    for (int t = 0; t < 4; ++t) {
        p[t] = comps[std::size_t(best.i)][std::size_t(t)];
        p[4 + t] = comps[std::size_t(best.j)][std::size_t(t)];
    }
    return p;
}

// Embed a (x,u1,u2) table (matching the family's U alphabets) under an
// independent uniform V: constraint values are unchanged, so the ZB search
// starts no worse than the EC result it came from.
std::vector<double> embed_ec_in_zb(const PairFamily& zb_fam, const std::vector<double>& ec_p) {
    std::vector<double> p(zb_fam.size(), 0.0);
    for (int x = 0; x < 2; ++x)
        for (int v = 0; v < zb_fam.nv; ++v)
            for (int u1 = 0; u1 < zb_fam.a1; ++u1)
                for (int u2 = 0; u2 < zb_fam.a2; ++u2)
                    p[std::size_t(((x * zb_fam.nv + v) * zb_fam.a1 + u1) * zb_fam.a2 + u2)] =
                        ec_p[std::size_t((x * zb_fam.a1 + u1) * zb_fam.a2 + u2)] / zb_fam.nv;
    return p;
}

// Place a binary-auxiliary table inside a family with wider U alphabets.
std::vector<double> widen_binary_table(int a1, int a2, const std::vector<double>& bin) {
    std::vector<double> out(std::size_t(2 * a1 * a2), 0.0);
    for (int x = 0; x < 2; ++x)
        for (int u1 = 0; u1 < 2; ++u1)
            for (int u2 = 0; u2 < 2; ++u2)
                out[std::size_t((x * a1 + u1) * a2 + u2)] =
                    bin[std::size_t((x * 2 + u1) * 2 + u2)];
    return out;
}

void check_cross_section_args(double distortion, const SearchConfig& cfg) {
    cfg.validate();
    if (!(distortion > 0.0) || !(distortion < 0.5))
        throw std::invalid_argument("cross-section distortion must lie in (0, 0.5)");
}

CrossSectionResult finish_cross_section(const PairFamily& fam,
                                        const FamilySearchResult& res) {
    CrossSectionResult out;
    out.trace = res.trace;
    AuxModel model = materialize_pair_model(fam, res.best.params);
    // report the LP value of the materialized witness, not the fast-path value
    out.value = regions::min_rates(model, {1.0, 1.0}).objective;
    out.model = std::move(model);
    return out;
}

CrossSectionResult cross_section_ec_impl(double distortion, const SearchConfig& cfg) {
    const PairFamily fam{1, cfg.alphabet("U", 2), cfg.alphabet("U", 2), 2.0 * distortion};
    std::vector<std::vector<double>> extras;
    const auto grid = ec_grid_best(distortion, cfg);
    if (!grid.empty())
        extras.push_back(fam.a1 == 2 && fam.a2 == 2
                             ? grid
                             : widen_binary_table(fam.a1, fam.a2, grid));
    return finish_cross_section(fam, search_family(fam, cfg, 0xECECECECULL, extras));
}

CrossSectionResult cross_section_zb_impl(double distortion, const SearchConfig& cfg,
                                         const std::vector<double>& warm_ec) {
    const PairFamily fam{cfg.alphabet("V", 3), cfg.alphabet("U", 2), cfg.alphabet("U", 2),
                         2.0 * distortion};
    if (fam.nv < 2)
        throw std::invalid_argument("ZB cross-section needs a shared alphabet of size >= 2");
    std::vector<std::vector<double>> extras;
    if (!warm_ec.empty()) extras.push_back(embed_ec_in_zb(fam, warm_ec));
    return finish_cross_section(fam, search_family(fam, cfg, 0x2B2B2B2BULL, extras));
}

std::vector<double> ec_table_of(const CrossSectionResult& ec, int a1, int a2) {
    // recover the (x,u1,u2) table from the materialized witness by dropping U_12
    if (!ec.model) return {};
    const auto& joint = ec.model->joint();
    const int xi = joint.index_of("X");
    const int u1i = joint.index_of("U_1");
    const int u2i = joint.index_of("U_2");
    std::vector<double> table(std::size_t(2 * a1 * a2), 0.0);
    std::vector<int> digits(joint.variables().size(), 0);
    for (std::size_t c = 0; c < joint.cells(); ++c) {
        table[std::size_t((digits[xi] * a1 + digits[u1i]) * a2 + digits[u2i])] +=
            joint.probs()[c];
        for (int i = int(digits.size()) - 1; i >= 0; --i) {
            if (++digits[i] < joint.variables()[i].alphabet) break;
            digits[i] = 0;
        }
    }
    return table;
}

}  // namespace

std::pair<AuxModel, double> local_search(
    const std::function<double(const AuxModel&)>& objective, const AuxModel& init,
    const SearchConfig& cfg) {
    cfg.validate();
    const auto& joint = init.joint();
    const int xi = init.source_index();

    // one block per source symbol, holding that slice's mass fixed
    std::vector<Block> blocks(std::size_t(init.source_alphabet()));
    std::vector<int> digits(joint.variables().size(), 0);
    for (std::size_t c = 0; c < joint.cells(); ++c) {
        blocks[std::size_t(digits[xi])].idx.push_back(c);
        for (int i = int(digits.size()) - 1; i >= 0; --i) {
            if (++digits[i] < joint.variables()[i].alphabet) break;
            digits[i] = 0;
        }
    }
    for (auto& b : blocks) {
        b.mass = 0.0;
        for (std::size_t i : b.idx) b.mass += joint.probs()[i];
    }

    std::vector<double> x = joint.probs();
    AuxModel current = init;
    const double value = descend(
        x,
        [&](const std::vector<double>& p) {
            return objective(current.with_joint(
                JointDistribution(joint.variables(), p)));
        },
        blocks, cfg);
    return {current.with_joint(JointDistribution(joint.variables(), x)), value};
}

CrossSectionResult cross_section_ec(double distortion, const SearchConfig& cfg) {
    check_cross_section_args(distortion, cfg);
    return cross_section_ec_impl(distortion, cfg);
}

CrossSectionResult cross_section_zb(double distortion, const SearchConfig& cfg) {
    check_cross_section_args(distortion, cfg);
    const auto ec = cross_section_ec_impl(distortion, cfg);
    return cross_section_zb_impl(distortion, cfg,
                                 ec_table_of(ec, cfg.alphabet("U", 2), cfg.alphabet("U", 2)));
}

SeparationReport separation_zb(const SearchConfig& cfg, const std::vector<double>& d_grid) {
    cfg.validate();
    if (d_grid.empty()) throw std::invalid_argument("empty distortion grid");
    for (double d : d_grid)
        if (!(d > 0.0) || !(d < 0.5))
            throw std::invalid_argument("distortion grid must lie inside (0, 0.5)");

    const auto t0 = std::chrono::steady_clock::now();
    SeparationReport report;
    bool have_star = false;
    for (double d : d_grid) {
        const auto ec = cross_section_ec_impl(d, cfg);
        const auto zb = cross_section_zb_impl(
            d, cfg, ec_table_of(ec, cfg.alphabet("U", 2), cfg.alphabet("U", 2)));
        const double gap = ec.value - zb.value;
        report.curve.push_back({d, ec.value, zb.value, gap});
        if (!have_star || gap > report.gap) {
            have_star = true;
            report.d_star = d;
            report.value_ec = ec.value;
            report.value_cms_or_zb = zb.value;
            report.gap = gap;
            report.best_model = zb.model;
            report.per_restart_trace = zb.trace;
        }
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

AuxModel build_l4_cms(const AuxModel& zb_model, double d3, double d34) {
    if (zb_model.total() != 2)
        throw std::invalid_argument("the L=4 assembly starts from an L=2 model");
    if (zb_model.scheme() == Scheme::VKG)
        throw std::invalid_argument("the L=4 assembly needs a ZB/EC-structured model");
    if (zb_model.source_alphabet() != 2)
        throw std::invalid_argument("the L=4 assembly is defined for a binary source");
    if (!(d34 <= d3) || !(d3 < 0.5) || d34 < 0.0)
        throw std::invalid_argument("need 0 <= D34 <= D3 < 1/2");

    const AuxModel sr = shannon::sr_degraded_model(d3, d34);

    const auto& zj = zb_model.joint();
    const auto& sj = sr.joint();
    const DescriptionSet z12({1, 2}, 2);

    // gather the live L=2 variables (absent -> constant, skipped)
    struct Var {
        int idx;
        int alphabet;
        std::string new_name;
    };
    std::vector<Var> zvars;
    const int zx = zb_model.source_index();
    if (int v = zb_model.shared_index(z12); v >= 0)
        zvars.push_back({v, zj.variables()[std::size_t(v)].alphabet, "V_12"});
    if (int u = zb_model.aux_index(DescriptionSet({1}, 2)); u >= 0)
        zvars.push_back({u, zj.variables()[std::size_t(u)].alphabet, "U_1"});
    if (int u = zb_model.aux_index(DescriptionSet({2}, 2)); u >= 0)
        zvars.push_back({u, zj.variables()[std::size_t(u)].alphabet, "U_2"});
    if (int u = zb_model.aux_index(z12); u >= 0)
        zvars.push_back({u, zj.variables()[std::size_t(u)].alphabet, "U_12"});

    const int sx = sr.source_index();
    const int s3 = sr.aux_index(DescriptionSet({1}, 2));    // coarse layer -> U_3
    const int s34 = sr.aux_index(DescriptionSet({1, 2}, 2));  // fine layer -> U_34

    // check the two factors agree on the source marginal (fair bit)
    for (int x = 0; x < 2; ++x) {
        double pz = 0.0, ps = 0.0;
        std::vector<int> zd(zj.variables().size(), 0);
        for (std::size_t c = 0; c < zj.cells(); ++c) {
            if (zd[zx] == x) pz += zj.probs()[c];
            for (int i = int(zd.size()) - 1; i >= 0; --i) {
                if (++zd[i] < zj.variables()[std::size_t(i)].alphabet) break;
                zd[i] = 0;
            }
        }
        std::vector<int> sd(sj.variables().size(), 0);
        for (std::size_t c = 0; c < sj.cells(); ++c) {
            if (sd[sx] == x) ps += sj.probs()[c];
            for (int i = int(sd.size()) - 1; i >= 0; --i) {
                if (++sd[i] < sj.variables()[std::size_t(i)].alphabet) break;
                sd[i] = 0;
            }
        }
        if (std::abs(pz - 0.5) > 1e-9 || std::abs(ps - 0.5) > 1e-9)
            throw std::invalid_argument("the L=4 assembly needs fair-bit source marginals");
    }

    // composed variable list: X, live zb vars, U_3, U_34
    std::vector<VariableSpec> vars{{"X", 2}};
    for (const auto& v : zvars) vars.push_back({v.new_name, v.alphabet});
    vars.push_back({"U_3", 2});
    vars.push_back({"U_34", 2});

    std::size_t cells = 2;
    for (std::size_t i = 1; i < vars.size(); ++i) cells *= std::size_t(vars[i].alphabet);
    std::vector<double> probs(cells, 0.0);

    // p(x, zvars, u3, u34) = p_zb(x, zvars) * p_sr(x, u3, u34) / 0.5
    std::vector<int> zdig(zj.variables().size(), 0);
    for (std::size_t zc = 0; zc < zj.cells(); ++zc) {
        const double pz = zj.probs()[zc];
        if (pz > 0.0) {
            const int x = zdig[zx];
            for (int u3 = 0; u3 < 2; ++u3)
                for (int u34 = 0; u34 < 2; ++u34) {
                    std::vector<int> ssym(sj.variables().size(), 0);
                    ssym[std::size_t(sx)] = x;
                    if (s3 >= 0) ssym[std::size_t(s3)] = u3;
                    if (s34 >= 0) ssym[std::size_t(s34)] = u34;
                    const double ps = sj.prob(ssym);
                    if (ps == 0.0) continue;
                    std::size_t idx = std::size_t(x);
                    for (const auto& v : zvars)
                        idx = idx * std::size_t(v.alphabet) + std::size_t(zdig[std::size_t(v.idx)]);
                    idx = (idx * 2 + std::size_t(u3)) * 2 + std::size_t(u34);
                    probs[idx] += pz * ps / 0.5;
                }
        }
        for (int i = int(zdig.size()) - 1; i >= 0; --i) {
            if (++zdig[i] < zj.variables()[std::size_t(i)].alphabet) break;
            zdig[i] = 0;
        }
    }

    std::map<DescriptionSet, std::string> shared, aux;
    for (const auto& v : zvars) {
        if (v.new_name == "V_12") shared[DescriptionSet({1, 2}, 4)] = "V_12";
        if (v.new_name == "U_1") aux[DescriptionSet({1}, 4)] = "U_1";
        if (v.new_name == "U_2") aux[DescriptionSet({2}, 4)] = "U_2";
        if (v.new_name == "U_12") aux[DescriptionSet({1, 2}, 4)] = "U_12";
    }
    aux[DescriptionSet({3}, 4)] = "U_3";
    aux[DescriptionSet({3, 4}, 4)] = "U_34";

    std::map<DescriptionSet, DistortionMeasure> dist;
    for (auto s : {DescriptionSet({1}, 4), DescriptionSet({2}, 4), DescriptionSet({1, 2}, 4),
                   DescriptionSet({3}, 4), DescriptionSet({3, 4}, 4)})
        dist[s] = hamming_distortion(2);

    return AuxModel(4, Scheme::CMS, JointDistribution(std::move(vars), std::move(probs)), "X",
                    std::move(shared), std::move(aux), std::move(dist));
}

L4Report separation_l4(const SeparationReport& zb, double d3, double d34) {
    L4Report rep;
    rep.d_star = zb.d_star;
    rep.d3 = d3;
    rep.d34 = d34;
    rep.rd_d3 = shannon::rd_binary(d3);
    rep.rd_d34 = shannon::rd_binary(d34);
    if (!zb.best_model) return rep;
    rep.witness_found = true;

    const AuxModel cms = build_l4_cms(*zb.best_model, d3, d34);
    rep.r3 = regions::min_rates(cms, {0, 0, 1, 0}).objective;
    rep.r34 = regions::min_rates(cms, {0, 0, 1, 1}).objective;
    rep.r12_cms = regions::min_rates(cms, {1, 1, 0, 0}).objective;

    // VKG variant: the same joint with the live shared variable forced global
    std::map<DescriptionSet, std::string> shared;
    const DescriptionSet s12({1, 2}, 4);
    auto it = cms.shared_vars().find(s12);
    if (it != cms.shared_vars().end()) shared[DescriptionSet::full_set(4)] = it->second;
    const AuxModel vkg(4, Scheme::VKG, cms.joint(), cms.source_name(), shared,
                       cms.aux_vars(), cms.distortions());
    rep.r34_vkg = regions::min_rates(vkg, {0, 0, 1, 1}).objective;

    rep.r12_vkg_via_ec = zb.value_ec;
    rep.gap = rep.r12_vkg_via_ec - rep.r12_cms;
    rep.cms_model = cms;
    return rep;
}

L3Report separation_l3(const SeparationReport& zb) {
    L3Report rep;
    rep.d_star = zb.d_star;
    if (!zb.best_model || !(zb.gap > 0.0)) return rep;  // no separation witness
    rep.witness_found = true;

    const AuxModel& w = *zb.best_model;
    const auto witness_rates = regions::min_rates(w, {1.0, 1.0});
    rep.r1 = witness_rates.rates[0];
    rep.r2 = witness_rates.rates[1];

    // L=3 joint: the witness variables plus U_13 = X (so D_13 = 0 < D_1)
    const auto& wj = w.joint();
    std::vector<VariableSpec> vars = wj.variables();
    vars.push_back({"U_13", 2});
    const int wx = w.source_index();
    std::vector<double> probs(wj.cells() * 2, 0.0);
    std::vector<int> digits(wj.variables().size(), 0);
    for (std::size_t c = 0; c < wj.cells(); ++c) {
        probs[c * 2 + std::size_t(digits[wx])] = wj.probs()[c];
        for (int i = int(digits.size()) - 1; i >= 0; --i) {
            if (++digits[i] < wj.variables()[std::size_t(i)].alphabet) break;
            digits[i] = 0;
        }
    }

    std::map<DescriptionSet, std::string> shared_cms, shared_vkg, aux;
    const DescriptionSet w12({1, 2}, 2);
    if (auto it = w.shared_vars().find(w12); it != w.shared_vars().end()) {
        shared_cms[DescriptionSet({1, 2}, 3)] = it->second;
        shared_vkg[DescriptionSet::full_set(3)] = it->second;
    }
    auto carry = [&](std::initializer_list<int> from, std::initializer_list<int> to) {
        auto it = w.aux_vars().find(DescriptionSet(from, 2));
        if (it != w.aux_vars().end()) aux[DescriptionSet(to, 3)] = it->second;
    };
    carry({1}, {1});
    carry({2}, {2});
    carry({1, 2}, {1, 2});
    aux[DescriptionSet({1, 3}, 3)] = "U_13";

    std::map<DescriptionSet, DistortionMeasure> dist;
    for (auto s : {DescriptionSet({1}, 3), DescriptionSet({2}, 3), DescriptionSet({1, 2}, 3),
                   DescriptionSet({1, 3}, 3)})
        dist[s] = hamming_distortion(2);

    JointDistribution joint(std::move(vars), std::move(probs));
    const AuxModel cms(3, Scheme::CMS, joint, w.source_name(), shared_cms, aux, dist);
    const AuxModel vkg(3, Scheme::VKG, joint, w.source_name(), shared_vkg, aux, dist);

    rep.rc = regions::alpha(cms, 2, SubsetFamily({DescriptionSet({1, 2}, 3)}));
    const std::map<int, double> budgets{{1, rep.r1}, {2, rep.r2}};
    rep.r3_vkg = regions::min_single_rate(vkg, 3, budgets);
    rep.r3_cms = regions::min_single_rate(cms, 3, budgets);
    rep.gap = rep.r3_vkg - rep.r3_cms;
    rep.cms_model = cms;
    rep.vkg_model = vkg;
    return rep;
}

}  // namespace mdcms::search
