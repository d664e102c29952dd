#pragma once
// Nonconvex search over auxiliary joint PMFs: cross-section minimization for
// EC/ZB-structured models of the fair-bit source, and the three separation
// experiments (ZB vs EC at L=2, the L=4 assembly, the L=3 argument).
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdcms/model.hpp"
#include "mdcms/regions.hpp"

namespace mdcms {

struct SearchConfig {
    std::uint64_t seed = 0;
    int restarts = 64;
    int max_iters = 3000;       // descent sweeps per penalty round
    double step_init = 0.25;
    double step_shrink = 0.5;
    double tol = 1e-8;          // stop once the step shrinks below this
    std::map<std::string, int> aux_alphabet_sizes;  // "V" -> |V|, "U" -> |U|
    int jobs = 0;               // worker threads; 0 = hardware concurrency

    int alphabet(const std::string& role, int fallback) const {
        auto it = aux_alphabet_sizes.find(role);
        return it == aux_alphabet_sizes.end() ? fallback : it->second;
    }
    void validate() const;
};

struct RestartTrace {
    int restart = 0;
    double value = 0.0;
    bool feasible = false;
};

struct CrossSectionResult {
    double value = 0.0;
    std::optional<AuxModel> model;   // witness, U_12 = X materialized
    std::vector<RestartTrace> trace;
};

struct SeparationCurvePoint {
    double distortion = 0.0;
    double value_ec = 0.0;
    double value_zb = 0.0;
    double gap = 0.0;
};

struct SeparationReport {
    double d_star = 0.0;
    double value_ec = 0.0;
    double value_cms_or_zb = 0.0;
    double gap = 0.0;                       // value_ec - value_cms_or_zb
    std::optional<AuxModel> best_model;     // ZB witness at d_star
    std::vector<RestartTrace> per_restart_trace;
    std::vector<SeparationCurvePoint> curve;
    double wall_time_seconds = 0.0;
};

struct L4Report {
    bool witness_found = false;
    double d_star = 0.0, d3 = 0.0, d34 = 0.0;
    double r3 = 0.0, r34 = 0.0, r12_cms = 0.0;   // CMS LP minima on the assembly
    double rd_d3 = 0.0, rd_d34 = 0.0;            // binary RD references
    double r34_vkg = 0.0;        // VKG LP min of R3+R4 with the shared variable live
    double r12_vkg_via_ec = 0.0; // EC cross-section value standing in for the VKG side
    double gap = 0.0;            // r12_vkg_via_ec - r12_cms
    std::optional<AuxModel> cms_model;
};

struct L3Report {
    bool witness_found = false;
    double d_star = 0.0;
    double rc = 0.0;             // common-codeword rate alpha_2({{1,2}}) of the witness
    double r1 = 0.0, r2 = 0.0;   // fixed budgets taken from the witness rate point
    double r3_vkg = 0.0, r3_cms = 0.0;
    double gap = 0.0;            // r3_vkg - r3_cms
    std::optional<AuxModel> cms_model, vkg_model;
};

namespace search {

// Coordinate-wise perturbation descent on the model's flattened joint PMF.
// Projection keeps each source-symbol slice on its own scaled simplex, so
// the source marginal stays pinned while everything else moves freely.
// Deterministic: cyclic sweeps, step halving on stall.
std::pair<AuxModel, double> local_search(
    const std::function<double(const AuxModel&)>& objective, const AuxModel& init,
    const SearchConfig& cfg);

// Minimize R1+R2 over EC-structured models (no shared variable) of the fair
// bit under Hamming, subject to D1 + D2 <= 2 D with the central reconstruction
// lossless (U_12 = X structurally). Multi-restart descent plus the 1/32
// exhaustive grid over binary-auxiliary models.
CrossSectionResult cross_section_ec(double distortion, const SearchConfig& cfg);

// Same cross-section over ZB-structured models (V_12 live).
CrossSectionResult cross_section_zb(double distortion, const SearchConfig& cfg);

// Scan the grid, run both searches per point, report the largest EC - ZB gap.
SeparationReport separation_zb(const SearchConfig& cfg, const std::vector<double>& d_grid);

// CMS L=4 assembly: descriptions 1-2 carry the ZB witness variables,
// descriptions 3-4 the degraded cascade for (d3, d34); only V_12 is live.
AuxModel build_l4_cms(const AuxModel& zb_model, double d3, double d34);

L4Report separation_l4(const SeparationReport& zb, double d3, double d34);

L3Report separation_l3(const SeparationReport& zb);

}  // namespace search
}  // namespace mdcms
