#pragma once
// Scheme-tagged auxiliary-variable models: a joint PMF over the source and
// the shared (V_S) / private (U_l) / refinement (U_K) variables, plus the
// per-subset distortion measures the decoders are judged against.
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdcms/distribution.hpp"
#include "mdcms/subsets.hpp"

namespace mdcms {

enum class Scheme { EC, ZB, VKG, CMS };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct DistortionMeasure {
    int reconstruction_alphabet = 2;
    std::vector<std::vector<double>> matrix;  // d[x][xhat], nonnegative, bounded
};

DistortionMeasure hamming_distortion(int alphabet);

// Variables bound to subsets. A subset without a bound variable (or bound to
// an alphabet-1 variable) acts as a constant: it drops out of every entropy
// term, which keeps all the region formulas total.
class AuxModel {
public:
    AuxModel(int total, Scheme scheme, JointDistribution joint, std::string source_var,
             std::map<DescriptionSet, std::string> shared_vars,
             std::map<DescriptionSet, std::string> aux_vars,
             std::map<DescriptionSet, DistortionMeasure> distortions = {},
             bool vkg_last_term_conditions_on_shared = true);

    int total() const { return total_; }
    Scheme scheme() const { return scheme_; }
    const JointDistribution& joint() const { return joint_; }
    const std::string& source_name() const { return source_; }
    int source_index() const { return source_idx_; }
    int source_alphabet() const;

    const std::map<DescriptionSet, std::string>& shared_vars() const { return shared_; }
    const std::map<DescriptionSet, std::string>& aux_vars() const { return aux_; }
    const std::map<DescriptionSet, DistortionMeasure>& distortions() const {
        return distortions_;
    }
    bool vkg_last_term_conditions_on_shared() const { return vkg_cond_flag_; }

    // Joint-table variable index, or -1 when the subset's variable is absent
    // or has a singleton alphabet (a constant either way).
    int shared_index(const DescriptionSet& s) const;
    int aux_index(const DescriptionSet& k) const;

    // Non-constant shared variables over a family, in canonical order.
    std::vector<int> shared_indices(const SubsetFamily& family) const;
    // Non-constant U_K for all nonempty K subseteq S except S itself / including S.
    std::vector<int> aux_indices_proper_subsets(const DescriptionSet& s) const;
    std::vector<int> aux_indices_subsets(const DescriptionSet& s) const;

    // Decoder inputs for subset K: scheme CMS/ZB/EC sees {V}_J(K) + {U}_{2^K-phi};
    // scheme VKG sees V_L + {U}_{2^K-phi}. Canonical order, constants dropped.
    std::vector<int> decoder_inputs(const DescriptionSet& k) const;

    AuxModel with_scheme(Scheme scheme) const;
    AuxModel with_joint(JointDistribution joint) const;

private:
    int total_;
    Scheme scheme_;
    JointDistribution joint_;
    std::string source_;
    int source_idx_;
    std::map<DescriptionSet, std::string> shared_;
    std::map<DescriptionSet, std::string> aux_;
    std::map<DescriptionSet, DistortionMeasure> distortions_;
    bool vkg_cond_flag_;
};

}  // namespace mdcms
