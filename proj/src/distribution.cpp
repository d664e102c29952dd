#include "mdcms/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace mdcms {

namespace {
constexpr double kMassTolerance = 1e-12;

double neg_sum_plogp(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}
}  // namespace

JointDistribution::JointDistribution(std::vector<VariableSpec> variables,
                                     std::vector<double> probs)
    : vars_(std::move(variables)), probs_(std::move(probs)) {
    if (vars_.empty()) throw std::invalid_argument("distribution needs at least one variable");
    std::unordered_set<std::string> seen;
    std::size_t expected = 1;
    for (const auto& v : vars_) {
        if (v.alphabet < 1)
            throw std::invalid_argument("alphabet size of '" + v.name + "' must be >= 1");
        if (!seen.insert(v.name).second)
            throw std::invalid_argument("duplicate variable name '" + v.name + "'");
        if (expected > (std::size_t(1) << 40) / std::size_t(v.alphabet))
            throw std::invalid_argument("joint table too large");
        expected *= std::size_t(v.alphabet);
    }
    if (probs_.size() != expected)
        throw std::invalid_argument("probability array length " + std::to_string(probs_.size()) +
                                    " does not match alphabet product " +
                                    std::to_string(expected));
    double mass = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("probabilities must be finite and nonnegative");
        mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTolerance)
        throw std::invalid_argument("probabilities sum to " + std::to_string(mass) +
                                    ", outside 1e-12 of 1 (rejected, not renormalized)");
    strides_.assign(vars_.size(), 1);
    for (int i = int(vars_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * std::size_t(vars_[i + 1].alphabet);
}

bool JointDistribution::has_variable(const std::string& name) const {
    for (const auto& v : vars_)
        if (v.name == name) return true;
    return false;
}

int JointDistribution::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return int(i);
    throw std::invalid_argument("unknown variable '" + name + "'");
}

double JointDistribution::prob(const std::vector<int>& symbols) const {
    if (symbols.size() != vars_.size())
        throw std::invalid_argument("symbol tuple arity mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (symbols[i] < 0 || symbols[i] >= vars_[i].alphabet)
            throw std::invalid_argument("symbol out of alphabet range");
        idx += strides_[i] * std::size_t(symbols[i]);
    }
    return probs_[idx];
}

std::vector<int> JointDistribution::resolve(const std::vector<std::string>& names) const {
    std::vector<int> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(index_of(n));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

JointDistribution JointDistribution::marginal(const std::vector<std::string>& keep) const {
    if (keep.empty()) throw std::invalid_argument("marginal over empty set");
    const std::vector<int> kept = resolve(keep);

    std::vector<VariableSpec> mvars;
    std::vector<std::size_t> mstride(vars_.size(), 0);
    std::size_t mcells = 1;
    for (int i : kept) {
        mvars.push_back(vars_[i]);
        mcells *= std::size_t(vars_[i].alphabet);
    }
    std::size_t s = 1;
    for (int k = int(kept.size()) - 1; k >= 0; --k) {
        mstride[kept[k]] = s;
        s *= std::size_t(vars_[kept[k]].alphabet);
    }

    std::vector<double> mp(mcells, 0.0);
    std::vector<int> digits(vars_.size(), 0);
    std::size_t midx = 0;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
        mp[midx] += probs_[cell];
        // advance mixed-radix counter, maintaining the marginal index
        for (int i = int(vars_.size()) - 1; i >= 0; --i) {
            if (++digits[i] < vars_[i].alphabet) {
                midx += mstride[i];
                break;
            }
            digits[i] = 0;
            midx -= mstride[i] * std::size_t(vars_[i].alphabet - 1);
        }
    }
    // guard against drift: the marginal construction reuses the validated mass
    return JointDistribution(std::move(mvars), std::move(mp));
}

double JointDistribution::entropy_indices(const std::vector<int>& var_indices) const {
    std::vector<int> kept = var_indices;
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    if (kept.empty()) return 0.0;

    std::vector<std::size_t> mstride(vars_.size(), 0);
    std::size_t mcells = 1, s = 1;
    for (int i : kept) mcells *= std::size_t(vars_[i].alphabet);
    for (int k = int(kept.size()) - 1; k >= 0; --k) {
        mstride[kept[k]] = s;
        s *= std::size_t(vars_[kept[k]].alphabet);
    }
    std::vector<double> mp(mcells, 0.0);
    std::vector<int> digits(vars_.size(), 0);
    std::size_t midx = 0;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
        mp[midx] += probs_[cell];
        for (int i = int(vars_.size()) - 1; i >= 0; --i) {
            if (++digits[i] < vars_[i].alphabet) {
                midx += mstride[i];
                break;
            }
            digits[i] = 0;
            midx -= mstride[i] * std::size_t(vars_[i].alphabet - 1);
        }
    }
    return neg_sum_plogp(mp);
}

double JointDistribution::conditional_entropy_indices(const std::vector<int>& a,
                                                      const std::vector<int>& b) const {
    if (a.empty()) return 0.0;
    std::vector<int> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    return entropy_indices(ab) - entropy_indices(b);
}

double JointDistribution::entropy(const std::vector<std::string>& names) const {
    if (names.empty()) throw std::invalid_argument("entropy over empty variable set");
    return entropy_indices(resolve(names));
}

double JointDistribution::conditional_entropy(const std::vector<std::string>& a,
                                              const std::vector<std::string>& b) const {
    if (a.empty()) throw std::invalid_argument("conditional entropy with empty left set");
    const auto ia = resolve(a);
    const auto ib = resolve(b);
    for (int i : ia)
        for (int j : ib)
            if (i == j)
                throw std::invalid_argument("conditional entropy sets overlap on '" +
                                            vars_[i].name + "'");
    return conditional_entropy_indices(ia, ib);
}

double JointDistribution::mutual_information(const std::vector<std::string>& a,
                                             const std::vector<std::string>& b,
                                             const std::vector<std::string>& given) const {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mutual information needs nonempty argument sets");
    const auto ia = resolve(a);
    const auto ib = resolve(b);
    const auto ig = resolve(given);
    auto overlap = [&](const std::vector<int>& u, const std::vector<int>& v) {
        for (int i : u)
            for (int j : v)
                if (i == j) return true;
        return false;
    };
    if (overlap(ia, ib) || overlap(ia, ig) || overlap(ib, ig))
        throw std::invalid_argument("mutual information argument sets overlap");
    std::vector<int> bg = ib;
    bg.insert(bg.end(), ig.begin(), ig.end());
    double value = conditional_entropy_indices(ia, ig) - conditional_entropy_indices(ia, bg);
    if (value < 0.0 && value > -1e-10) value = 0.0;
    return value;
}

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy needs p in [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

}  // namespace mdcms
