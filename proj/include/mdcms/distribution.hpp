#pragma once
// Joint PMFs over named finite-alphabet variables with exact marginalization
// and entropy calculus in bits.
#include <cstddef>
#include <string>
#include <vector>

namespace mdcms {

struct VariableSpec {
    std::string name;
    int alphabet = 2;
};

// Immutable dense joint PMF. The flat probability array is indexed in
// mixed radix over the variable list, last-listed variable varying fastest.
class JointDistribution {
public:
    // Validates: alphabets >= 1, unique names, entries >= 0 and finite,
    // total mass within 1e-12 of 1. Rejects rather than renormalizes.
    JointDistribution(std::vector<VariableSpec> variables, std::vector<double> probs);

    const std::vector<VariableSpec>& variables() const { return vars_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t cells() const { return probs_.size(); }

    bool has_variable(const std::string& name) const;
    int index_of(const std::string& name) const;  // throws on unknown name

    double prob(const std::vector<int>& symbols) const;

    // Exact marginal over `keep` (nonempty), variables in original order.
    JointDistribution marginal(const std::vector<std::string>& keep) const;

    // H(A) in bits, 0*log 0 = 0. A must be nonempty.
    double entropy(const std::vector<std::string>& names) const;
    // H(A|B) = H(A,B) - H(B); B may be empty. A and B must be disjoint.
    double conditional_entropy(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) const;
    // I(A;B|given) = H(A|given) - H(A|B,given); tiny negatives clamp to 0.
    double mutual_information(const std::vector<std::string>& a,
                              const std::vector<std::string>& b,
                              const std::vector<std::string>& given = {}) const;

    // Index-based fast paths (no name lookups). Duplicate indices are
    // ignored; an empty set has entropy 0 by convention.
    double entropy_indices(const std::vector<int>& var_indices) const;
    double conditional_entropy_indices(const std::vector<int>& a,
                                       const std::vector<int>& b) const;

private:
    std::vector<int> resolve(const std::vector<std::string>& names) const;

    std::vector<VariableSpec> vars_;
    std::vector<double> probs_;
    std::vector<std::size_t> strides_;
};

// Binary entropy in bits; p in [0,1].
double binary_entropy(double p);

}  // namespace mdcms
