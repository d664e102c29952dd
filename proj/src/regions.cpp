#include "mdcms/regions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdcms/simplex.hpp"

namespace mdcms::regions {

namespace {

constexpr double kBoundaryTol = 1e-9;

void check_cms_family(const AuxModel& model) {
    if (model.scheme() == Scheme::VKG)
        throw std::invalid_argument("CMS constraint evaluation on a VKG-tagged model");
}

// Enumeration cap: the alpha family is exponential in the tier size.
void check_lp_size(const AuxModel& model) {
    if (model.scheme() != Scheme::VKG && model.total() > 5)
        throw std::invalid_argument("CMS constraint enumeration supported for L <= 5");
}

std::string subset_text(const DescriptionSet& s) {
    std::string out = "{";
    bool first = true;
    for (int l : s.members()) {
        if (!first) out += ",";
        out += std::to_string(l);
        first = false;
    }
    return out + "}";
}

std::string family_text(const std::vector<DescriptionSet>& q) {
    std::string out = "{";
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) out += ",";
        out += subset_text(q[i]);
    }
    return out + "}";
}

double alpha_of(const AuxModel& model, int width, const std::vector<DescriptionSet>& q) {
    const auto& joint = model.joint();
    double total = 0.0;
    std::vector<int> q_indices;
    for (const auto& s : q) {
        const int v = model.shared_index(s);
        const auto above = model.shared_indices(
            lattice::tier_above_containing(model.total(), width, s));
        if (v >= 0) {
            total += joint.conditional_entropy_indices({v}, above);
            q_indices.push_back(v);
        }
    }
    std::vector<int> cond =
        model.shared_indices(lattice::tier_above(model.total(), width));
    cond.push_back(model.source_index());
    total -= joint.conditional_entropy_indices(q_indices, cond);
    return total;
}

double beta_of(const AuxModel& model, const DescriptionSet& s) {
    if (s.empty()) return 0.0;
    const auto& joint = model.joint();
    double total = 0.0;
    for (const auto& k : lattice::nonempty_subsets(model.total())) {
        if (!k.subset_of(s)) continue;
        const int u = model.aux_index(k);
        if (u < 0) continue;
        std::vector<int> cond = model.aux_indices_proper_subsets(k);
        const auto vs = model.shared_indices(lattice::sharing_sets(model.total(), k));
        cond.insert(cond.end(), vs.begin(), vs.end());
        total += joint.conditional_entropy_indices({u}, cond);
    }
    std::vector<int> cond =
        model.shared_indices(lattice::tier_above(model.total(), 1));
    cond.push_back(model.source_index());
    total -= joint.conditional_entropy_indices(model.aux_indices_subsets(s), cond);
    return total;
}

// All nonempty subfamilies of a tier, as index masks into the tier.
// Tier sizes stay small because the LP path is capped at L <= 5.
std::vector<std::vector<DescriptionSet>> tier_subfamilies(const SubsetFamily& tier_sets) {
    std::vector<std::vector<DescriptionSet>> out;
    const std::size_t n = tier_sets.size();
    for (std::uint64_t m = 1; m < (std::uint64_t(1) << n); ++m) {
        std::vector<DescriptionSet> fam;
        for (std::size_t i = 0; i < n; ++i)
            if (m & (std::uint64_t(1) << i)) fam.push_back(tier_sets[i]);
        out.push_back(std::move(fam));
    }
    return out;
}

struct CmsLpLayout {
    // variable order: R'_1..R'_L, then R''_K over J(L) in canonical order
    std::vector<DescriptionSet> shared_keys;
    int num_vars = 0;

    explicit CmsLpLayout(int total) {
        for (const auto& s : lattice::tier_above(total, 1)) shared_keys.push_back(s);
        num_vars = total + int(shared_keys.size());
    }
    int private_var(int l) const { return l - 1; }
    int shared_var(std::size_t i) const {
        return int(i) + int(num_vars - int(shared_keys.size()));
    }
};

std::vector<LinearConstraint> cms_constraints(const AuxModel& model,
                                              const CmsLpLayout& layout) {
    const int total = model.total();
    std::vector<LinearConstraint> cons;
    for (int width = 2; width <= total; ++width) {
        const auto tier_sets = lattice::tier(total, width);
        for (const auto& fam : tier_subfamilies(tier_sets)) {
            LinearConstraint c;
            c.coeffs.assign(layout.num_vars, 0.0);
            for (const auto& s : fam) {
                for (std::size_t i = 0; i < layout.shared_keys.size(); ++i)
                    if (layout.shared_keys[i] == s) c.coeffs[layout.shared_var(i)] = 1.0;
            }
            c.relation = Relation::GreaterEq;
            c.rhs = alpha_of(model, width, fam);
            cons.push_back(std::move(c));
        }
    }
    for (const auto& s : lattice::nonempty_subsets(total)) {
        LinearConstraint c;
        c.coeffs.assign(layout.num_vars, 0.0);
        for (int l : s.members()) c.coeffs[layout.private_var(l)] = 1.0;
        c.relation = Relation::GreaterEq;
        c.rhs = beta_of(model, s);
        cons.push_back(std::move(c));
    }
    return cons;
}

RateAllocation allocation_from_lp(const CmsLpLayout& layout, int total,
                                  const std::vector<double>& x) {
    RateAllocation alloc;
    for (int l = 1; l <= total; ++l) alloc.private_rates[l] = x[layout.private_var(l)];
    for (std::size_t i = 0; i < layout.shared_keys.size(); ++i)
        alloc.shared_rates[layout.shared_keys[i]] = x[layout.shared_var(i)];
    return alloc;
}

MinRatesResult min_rates_cms(const AuxModel& model, const std::vector<double>& weights) {
    const int total = model.total();
    CmsLpLayout layout(total);
    std::vector<double> obj(layout.num_vars, 0.0);
    for (int l = 1; l <= total; ++l) obj[layout.private_var(l)] = weights[l - 1];
    for (std::size_t i = 0; i < layout.shared_keys.size(); ++i) {
        double w = 0.0;
        for (int l : layout.shared_keys[i].members()) w += weights[l - 1];
        obj[layout.shared_var(i)] = w;
    }
    const auto sol = solve_min(obj, cms_constraints(model, layout));
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("CMS rate LP did not solve (lower-bound system)");
    MinRatesResult out;
    out.allocation = allocation_from_lp(layout, total, sol.x);
    out.rates = description_rates(*out.allocation, total);
    out.objective = sol.objective;
    return out;
}

MinRatesResult min_rates_vkg(const AuxModel& model, const std::vector<double>& weights) {
    const int total = model.total();
    std::vector<LinearConstraint> cons;
    for (const auto& s : lattice::nonempty_subsets(total)) {
        LinearConstraint c;
        c.coeffs.assign(total, 0.0);
        for (int l : s.members()) c.coeffs[l - 1] = 1.0;
        c.relation = Relation::GreaterEq;
        c.rhs = vkg_rhs(model, s);
        cons.push_back(std::move(c));
    }
    const auto sol = solve_min(weights, cons);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("VKG rate LP did not solve (lower-bound system)");
    MinRatesResult out;
    out.rates = sol.x;
    out.objective = sol.objective;
    return out;
}

}  // namespace

double alpha(const AuxModel& model, int width, const SubsetFamily& q) {
    check_cms_family(model);
    if (width < 2 || width > model.total())
        throw std::invalid_argument("alpha width must be in [2, L]");
    if (q.empty()) return 0.0;
    std::vector<DescriptionSet> fam;
    for (const auto& s : q) {
        if (s.cardinality() != width)
            throw std::invalid_argument("alpha family contains subset " + subset_text(s) +
                                        " of width != " + std::to_string(width));
        fam.push_back(s);
    }
    return alpha_of(model, width, fam);
}

double beta(const AuxModel& model, const DescriptionSet& s) {
    check_cms_family(model);
    return beta_of(model, s);
}

double vkg_rhs(const AuxModel& model, const DescriptionSet& s) {
    if (s.empty()) throw std::invalid_argument("vkg_rhs needs a nonempty subset");
    const int total = model.total();
    const DescriptionSet full = DescriptionSet::full_set(total);
    for (const auto& [key, _] : model.shared_vars()) {
        if (key != full && model.shared_index(key) >= 0)
            throw std::invalid_argument(
                "VKG evaluation requires strict-subset shared variables to be constant");
    }
    const auto& joint = model.joint();
    const int x = model.source_index();
    const int v = model.shared_index(full);
    std::vector<int> vset;
    if (v >= 0) vset.push_back(v);

    const double info_xv =
        joint.entropy_indices(vset) - joint.conditional_entropy_indices(vset, {x});
    double total_rhs = double(s.cardinality()) * info_xv;
    std::vector<int> xv = vset;
    xv.push_back(x);
    total_rhs -= joint.conditional_entropy_indices(model.aux_indices_subsets(s), xv);
    for (const auto& k : lattice::nonempty_subsets(total)) {
        if (!k.subset_of(s)) continue;
        const int u = model.aux_index(k);
        if (u < 0) continue;
        std::vector<int> cond = model.aux_indices_proper_subsets(k);
        if (model.vkg_last_term_conditions_on_shared() && v >= 0) cond.push_back(v);
        total_rhs += joint.conditional_entropy_indices({u}, cond);
    }
    return total_rhs;
}

RateVector description_rates(const RateAllocation& alloc, int total) {
    RateVector rates(total, 0.0);
    for (const auto& [l, r] : alloc.private_rates) {
        if (l < 1 || l > total) throw std::invalid_argument("private rate index out of range");
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("rates must be finite and >= 0");
        rates[l - 1] += r;
    }
    for (const auto& [k, r] : alloc.shared_rates) {
        if (k.cardinality() < 2)
            throw std::invalid_argument("shared rate bound to subset of size < 2");
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("rates must be finite and >= 0");
        for (int l : k.members()) rates[l - 1] += r;
    }
    return rates;
}

FeasibilityReport allocation_feasible(const AuxModel& model, const RateAllocation& alloc) {
    check_cms_family(model);
    check_lp_size(model);
    const int total = model.total();
    FeasibilityReport report;
    auto record = [&](std::string label, double bound, double lhs) {
        ConstraintSlack cs{std::move(label), bound, lhs, lhs - bound};
        if (cs.slack < -kBoundaryTol) {
            report.feasible = false;
            report.violated.push_back(cs);
        }
        report.all.push_back(std::move(cs));
    };
    for (int width = 2; width <= total; ++width) {
        for (const auto& fam : tier_subfamilies(lattice::tier(total, width))) {
            double lhs = 0.0;
            for (const auto& s : fam) {
                auto it = alloc.shared_rates.find(s);
                if (it != alloc.shared_rates.end()) lhs += it->second;
            }
            record("alpha W=" + std::to_string(width) + " Q=" + family_text(fam),
                   alpha_of(model, width, fam), lhs);
        }
    }
    for (const auto& s : lattice::nonempty_subsets(total)) {
        double lhs = 0.0;
        for (int l : s.members()) {
            auto it = alloc.private_rates.find(l);
            if (it != alloc.private_rates.end()) lhs += it->second;
        }
        record("beta S=" + subset_text(s), beta_of(model, s), lhs);
    }
    return report;
}

DecoderSynthesis synthesize_decoders(const AuxModel& model) {
    DecoderSynthesis out;
    const auto& joint = model.joint();
    const int x = model.source_index();
    const int nx = model.source_alphabet();

    for (const auto& [subset, measure] : model.distortions()) {
        Decoder dec;
        dec.subset = subset;
        dec.input_indices = model.decoder_inputs(subset);
        for (int idx : dec.input_indices)
            dec.input_names.push_back(joint.variables()[idx].name);

        // joint table over (inputs, x), obtained by marginalizing the model
        std::vector<std::string> keep = dec.input_names;
        keep.push_back(model.source_name());
        const JointDistribution marg = joint.marginal(keep);

        // cell strides inside the marginal, in decoder input order
        std::vector<int> in_pos, alph;
        for (int idx : dec.input_indices) {
            in_pos.push_back(marg.index_of(joint.variables()[idx].name));
            alph.push_back(joint.variables()[idx].alphabet);
        }
        const int x_pos = marg.index_of(model.source_name());

        std::size_t cells = 1;
        for (int a : alph) cells *= std::size_t(a);
        dec.table.assign(cells, 0);

        // gather P(x, cell) by iterating the marginal table once
        std::vector<double> weight(cells * std::size_t(nx), 0.0);
        std::vector<int> digits(marg.variables().size(), 0);
        for (std::size_t t = 0; t < marg.cells(); ++t) {
            std::size_t cell = 0;
            for (std::size_t i = 0; i < in_pos.size(); ++i)
                cell = cell * std::size_t(alph[i]) + std::size_t(digits[in_pos[i]]);
            weight[cell * nx + digits[x_pos]] += marg.probs()[t];
            for (int i = int(digits.size()) - 1; i >= 0; --i) {
                if (++digits[i] < marg.variables()[i].alphabet) break;
                digits[i] = 0;
            }
        }

        double achieved = 0.0;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            int best = 0;
            double best_cost = 0.0;
            for (int xhat = 0; xhat < measure.reconstruction_alphabet; ++xhat) {
                double cost = 0.0;
                for (int xs = 0; xs < nx; ++xs)
                    cost += weight[cell * nx + xs] * measure.matrix[xs][xhat];
                if (xhat == 0 || cost < best_cost - 1e-15) {
                    best = xhat;
                    best_cost = cost;
                }
            }
            dec.table[cell] = best;
            achieved += best_cost;
        }
        dec.achieved = achieved;
        out.distortions[subset] = achieved;
        out.decoders.push_back(std::move(dec));
    }
    return out;
}

MinRatesResult min_rates(const AuxModel& model, const std::vector<double>& weights) {
    if (int(weights.size()) != model.total())
        throw std::invalid_argument("weight vector length must equal L");
    bool any = false;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("weights must be finite and >= 0");
        if (w > 0.0) any = true;
    }
    if (!any) throw std::invalid_argument("weights must not all be zero");
    check_lp_size(model);

    MinRatesResult out = (model.scheme() == Scheme::VKG) ? min_rates_vkg(model, weights)
                                                         : min_rates_cms(model, weights);
    if (!model.distortions().empty())
        out.distortions = synthesize_decoders(model).distortions;
    return out;
}

AuxModel reduce_cms_to_vkg(const AuxModel& model) {
    check_cms_family(model);
    const DescriptionSet full = DescriptionSet::full_set(model.total());
    std::map<DescriptionSet, std::string> shared;
    for (const auto& [key, name] : model.shared_vars()) {
        if (key == full) {
            shared[key] = name;
        } else if (model.shared_index(key) >= 0) {
            throw std::invalid_argument("reduction requires strict-subset shared variables "
                                        "to be constant; " + subset_text(key) + " is not");
        }
    }
    return AuxModel(model.total(), Scheme::VKG, model.joint(), model.source_name(), shared,
                    model.aux_vars(), model.distortions(),
                    model.vkg_last_term_conditions_on_shared());
}

double check_reduction(const AuxModel& model) {
    const AuxModel reduced = reduce_cms_to_vkg(model);
    const int total = model.total();
    const DescriptionSet full = DescriptionSet::full_set(total);
    const double alpha_full = alpha_of(model, total, {full});
    double worst = 0.0;
    for (const auto& s : lattice::nonempty_subsets(total)) {
        std::vector<double> weights(total, 0.0);
        for (int l : s.members()) weights[l - 1] = 1.0;
        const double lp = min_rates(model, weights).objective;
        const double formula = beta_of(model, s) + double(s.cardinality()) * alpha_full;
        const double vkg = vkg_rhs(reduced, s);
        worst = std::max(worst, std::abs(lp - formula));
        worst = std::max(worst, std::abs(formula - vkg));
    }
    return worst;
}

MembershipResult membership(const AuxModel& model, const RateVector& rates,
                            const DistortionVector& targets) {
    if (int(rates.size()) != model.total())
        throw std::invalid_argument("rate vector length must equal L");
    MembershipResult out;

    const auto synth = synthesize_decoders(model);
    for (const auto& [subset, achieved] : synth.distortions) {
        auto it = targets.find(subset);
        if (it == targets.end()) continue;  // unconstrained
        if (achieved > it->second + kBoundaryTol) {
            out.member = false;
            out.violations.push_back("distortion " + subset_text(subset) + ": achieved " +
                                     std::to_string(achieved) + " > target " +
                                     std::to_string(it->second));
        }
    }
    for (const auto& [subset, target] : targets) {
        if (!model.distortions().count(subset)) {
            out.member = false;
            out.violations.push_back("no distortion measure declared for " +
                                     subset_text(subset));
        }
    }

    if (model.scheme() == Scheme::VKG) {
        for (const auto& s : lattice::nonempty_subsets(model.total())) {
            double sum = 0.0;
            for (int l : s.members()) sum += rates[l - 1];
            const double bound = vkg_rhs(model, s);
            if (sum < bound - kBoundaryTol) {
                out.member = false;
                out.violations.push_back("rate sum over " + subset_text(s) + " = " +
                                         std::to_string(sum) + " < bound " +
                                         std::to_string(bound));
            }
        }
        return out;
    }

    check_lp_size(model);
    CmsLpLayout layout(model.total());
    auto cons = cms_constraints(model, layout);
    for (int l = 1; l <= model.total(); ++l) {
        LinearConstraint c;
        c.coeffs.assign(layout.num_vars, 0.0);
        c.coeffs[layout.private_var(l)] = 1.0;
        for (std::size_t i = 0; i < layout.shared_keys.size(); ++i)
            if (layout.shared_keys[i].contains(l)) c.coeffs[layout.shared_var(i)] = 1.0;
        c.relation = Relation::LessEq;
        c.rhs = rates[l - 1] + kBoundaryTol;
        cons.push_back(std::move(c));
    }
    std::vector<double> zero(layout.num_vars, 0.0);
    const auto sol = solve_min(zero, cons);
    if (sol.status != LpStatus::Optimal) {
        out.member = false;
        out.violations.push_back("no rate allocation reproduces the target rate vector");
    }
    return out;
}

double min_single_rate(const AuxModel& model, int target_description,
                       const std::map<int, double>& budgets) {
    const int total = model.total();
    if (target_description < 1 || target_description > total)
        throw std::invalid_argument("target description out of range");
    if (budgets.count(target_description))
        throw std::invalid_argument("target description cannot carry a budget");

    if (model.scheme() == Scheme::VKG) {
        // R_t >= rhs(S) - sum of budgeted rates over S \ {t}; free rates absorb
        // every constraint not containing t.
        double best = 0.0;
        for (const auto& s : lattice::nonempty_subsets(total)) {
            if (!s.contains(target_description)) continue;
            bool all_budgeted = true;
            double fixed = 0.0;
            for (int l : s.members()) {
                if (l == target_description) continue;
                auto it = budgets.find(l);
                if (it == budgets.end()) {
                    all_budgeted = false;
                    break;
                }
                fixed += it->second;
            }
            if (all_budgeted) best = std::max(best, vkg_rhs(model, s) - fixed);
        }
        return best;
    }

    check_lp_size(model);
    CmsLpLayout layout(total);
    auto cons = cms_constraints(model, layout);
    for (const auto& [l, budget] : budgets) {
        if (l < 1 || l > total) throw std::invalid_argument("budget index out of range");
        LinearConstraint c;
        c.coeffs.assign(layout.num_vars, 0.0);
        c.coeffs[layout.private_var(l)] = 1.0;
        for (std::size_t i = 0; i < layout.shared_keys.size(); ++i)
            if (layout.shared_keys[i].contains(l)) c.coeffs[layout.shared_var(i)] = 1.0;
        c.relation = Relation::LessEq;
        c.rhs = budget;  // exact: the L=3 identity is checked at 1e-9
        cons.push_back(std::move(c));
    }
    std::vector<double> obj(layout.num_vars, 0.0);
    obj[layout.private_var(target_description)] = 1.0;
    for (std::size_t i = 0; i < layout.shared_keys.size(); ++i)
        if (layout.shared_keys[i].contains(target_description))
            obj[layout.shared_var(i)] = 1.0;
    const auto sol = solve_min(obj, cons);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("budgeted rate LP infeasible: budgets below the bounds");
    return sol.objective;
}

}  // namespace mdcms::regions
