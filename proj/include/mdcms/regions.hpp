#pragma once
// Achievable-region evaluators: the single-shared-message (VKG) rate bounds,
// the combinatorial-message-sharing (CMS) alpha/beta constraint families,
// optimal per-subset decoders, and LP minimization of description rates.
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdcms/model.hpp"
#include "mdcms/subsets.hpp"

namespace mdcms {

struct RateAllocation {
    std::map<int, double> private_rates;               // l -> R'_l
    std::map<DescriptionSet, double> shared_rates;     // S -> R''_S, |S| >= 2
};

using RateVector = std::vector<double>;
using DistortionVector = std::map<DescriptionSet, double>;

struct Decoder {
    DescriptionSet subset;
    std::vector<int> input_indices;     // joint-table variable indices, fixed order
    std::vector<std::string> input_names;
    std::vector<int> table;             // mixed-radix over inputs -> reconstruction
    double achieved = 0.0;
};

struct DecoderSynthesis {
    std::vector<Decoder> decoders;
    DistortionVector distortions;
};

struct ConstraintSlack {
    std::string label;
    double bound = 0.0;
    double lhs = 0.0;
    double slack = 0.0;  // lhs - bound
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<ConstraintSlack> violated;
    std::vector<ConstraintSlack> all;
};

struct MinRatesResult {
    RateVector rates;
    double objective = 0.0;
    std::optional<RateAllocation> allocation;  // CMS-family schemes only
    DistortionVector distortions;              // present when the model has measures
};

struct MembershipResult {
    bool member = true;
    std::vector<std::string> violations;
};

namespace regions {

// alpha_W(Q) of the CMS theorem; Q must sit inside tier W, 2 <= W <= L.
double alpha(const AuxModel& model, int width, const SubsetFamily& q);

// beta(S) of the CMS theorem, S any subset (empty -> 0).
double beta(const AuxModel& model, const DescriptionSet& s);

// Right-hand side of the VKG sum-rate constraint for nonempty S. Requires
// every strict-subset shared variable to be constant. The trailing
// refinement sum conditions on V_L by default (model flag).
double vkg_rhs(const AuxModel& model, const DescriptionSet& s);

// R_l = R'_l + sum of R''_K over K in J({l}).
RateVector description_rates(const RateAllocation& alloc, int total);

// Checks every alpha (W in 2..L, all tier subfamilies) and beta constraint.
FeasibilityReport allocation_feasible(const AuxModel& model, const RateAllocation& alloc);

// Per-subset MAP decoders against the model's distortion measures.
// Ties break toward the smallest reconstruction index; zero-probability
// cells get index 0.
DecoderSynthesis synthesize_decoders(const AuxModel& model);

// Minimize sum w_l R_l over the scheme's rate region. VKG solves directly
// over (R_1..R_L); CMS-family schemes solve over the allocation variables.
MinRatesResult min_rates(const AuxModel& model, const std::vector<double>& weights);

// Theorem part (i) machinery: the CMS model with all strict-subset shared
// variables constant collapses onto the VKG region.
AuxModel reduce_cms_to_vkg(const AuxModel& model);
// Max absolute discrepancy over S between (a) the CMS LP minimum of the
// S-sum-rate, (b) beta(S) + |S| alpha_L({L}), (c) vkg_rhs(S).
double check_reduction(const AuxModel& model);

// Is (rates, target distortions) inside the scheme's region? Boundary
// tolerance 1e-9. Subsets absent from `targets` are unconstrained.
MembershipResult membership(const AuxModel& model, const RateVector& rates,
                            const DistortionVector& targets);

// Minimize the rate of one description while holding the listed description
// rates at fixed budgets (the remaining rates are free).
double min_single_rate(const AuxModel& model, int target_description,
                       const std::map<int, double>& budgets);

}  // namespace regions
}  // namespace mdcms
