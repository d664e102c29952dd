#include "mdcms/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace mdcms {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::EC: return "EC";
        case Scheme::ZB: return "ZB";
        case Scheme::VKG: return "VKG";
        case Scheme::CMS: return "CMS";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "EC") return Scheme::EC;
    if (s == "ZB") return Scheme::ZB;
    if (s == "VKG") return Scheme::VKG;
    if (s == "CMS") return Scheme::CMS;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected EC, ZB, VKG or CMS)");
}

DistortionMeasure hamming_distortion(int alphabet) {
    DistortionMeasure d;
    d.reconstruction_alphabet = alphabet;
    d.matrix.assign(alphabet, std::vector<double>(alphabet, 1.0));
    for (int i = 0; i < alphabet; ++i) d.matrix[i][i] = 0.0;
    return d;
}

AuxModel::AuxModel(int total, Scheme scheme, JointDistribution joint, std::string source_var,
                   std::map<DescriptionSet, std::string> shared_vars,
                   std::map<DescriptionSet, std::string> aux_vars,
                   std::map<DescriptionSet, DistortionMeasure> distortions,
                   bool vkg_last_term_conditions_on_shared)
    : total_(total),
      scheme_(scheme),
      joint_(std::move(joint)),
      source_(std::move(source_var)),
      source_idx_(-1),
      shared_(std::move(shared_vars)),
      aux_(std::move(aux_vars)),
      distortions_(std::move(distortions)),
      vkg_cond_flag_(vkg_last_term_conditions_on_shared) {
    if (total_ < 1 || total_ > DescriptionSet::kMaxL)
        throw std::invalid_argument("model L must be in [1, 8]");
    source_idx_ = joint_.index_of(source_);

    const DescriptionSet full = DescriptionSet::full_set(total_);
    std::unordered_set<std::string> used{source_};
    for (const auto& [s, name] : shared_) {
        if (s.total() != total_) throw std::invalid_argument("shared-variable subset has wrong L");
        if (s.cardinality() < 2)
            throw std::invalid_argument("shared variable bound to subset of size < 2");
        joint_.index_of(name);
        if (!used.insert(name).second)
            throw std::invalid_argument("variable '" + name + "' bound to multiple roles");
    }
    for (const auto& [k, name] : aux_) {
        if (k.total() != total_) throw std::invalid_argument("aux-variable subset has wrong L");
        if (k.empty()) throw std::invalid_argument("aux variable bound to the empty subset");
        joint_.index_of(name);
        if (!used.insert(name).second)
            throw std::invalid_argument("variable '" + name + "' bound to multiple roles");
    }
    for (const auto& v : joint_.variables()) {
        if (!used.count(v.name))
            throw std::invalid_argument("variable '" + v.name +
                                        "' in the joint has no role and is not the source");
    }

    switch (scheme_) {
        case Scheme::EC:
            if (total_ != 2) throw std::invalid_argument("EC models must have L = 2");
            if (!shared_.empty())
                throw std::invalid_argument("EC models carry no shared variables");
            break;
        case Scheme::ZB:
            if (total_ != 2) throw std::invalid_argument("ZB models must have L = 2");
            for (const auto& [s, _] : shared_)
                if (s != full)
                    throw std::invalid_argument("ZB shared variable must be bound to {1,2}");
            break;
        case Scheme::VKG:
            for (const auto& [s, _] : shared_)
                if (s != full)
                    throw std::invalid_argument(
                        "VKG models allow only the full-set shared variable");
            break;
        case Scheme::CMS:
            break;  // any subset of J(L) keys, already checked |S| >= 2
    }

    for (const auto& [k, d] : distortions_) {
        if (k.total() != total_ || k.empty())
            throw std::invalid_argument("distortion bound to invalid subset");
        if (d.reconstruction_alphabet < 1 ||
            int(d.matrix.size()) != source_alphabet())
            throw std::invalid_argument("distortion matrix rows must match source alphabet");
        for (const auto& row : d.matrix) {
            if (int(row.size()) != d.reconstruction_alphabet)
                throw std::invalid_argument("distortion matrix columns must match alphabet");
            for (double v : row)
                if (!std::isfinite(v) || v < 0.0)
                    throw std::invalid_argument("distortion entries must be finite and >= 0");
        }
    }
}

int AuxModel::source_alphabet() const { return joint_.variables()[source_idx_].alphabet; }

int AuxModel::shared_index(const DescriptionSet& s) const {
    auto it = shared_.find(s);
    if (it == shared_.end()) return -1;
    const int idx = joint_.index_of(it->second);
    return joint_.variables()[idx].alphabet > 1 ? idx : -1;
}

int AuxModel::aux_index(const DescriptionSet& k) const {
    auto it = aux_.find(k);
    if (it == aux_.end()) return -1;
    const int idx = joint_.index_of(it->second);
    return joint_.variables()[idx].alphabet > 1 ? idx : -1;
}

std::vector<int> AuxModel::shared_indices(const SubsetFamily& family) const {
    std::vector<int> out;
    for (const auto& s : family) {
        const int idx = shared_index(s);
        if (idx >= 0) out.push_back(idx);
    }
    return out;
}

std::vector<int> AuxModel::aux_indices_proper_subsets(const DescriptionSet& s) const {
    std::vector<int> out;
    for (const auto& k : lattice::nonempty_subsets(total_)) {
        if (k == s || !k.subset_of(s)) continue;
        const int idx = aux_index(k);
        if (idx >= 0) out.push_back(idx);
    }
    return out;
}

std::vector<int> AuxModel::aux_indices_subsets(const DescriptionSet& s) const {
    std::vector<int> out;
    for (const auto& k : lattice::nonempty_subsets(total_)) {
        if (!k.subset_of(s)) continue;
        const int idx = aux_index(k);
        if (idx >= 0) out.push_back(idx);
    }
    return out;
}

std::vector<int> AuxModel::decoder_inputs(const DescriptionSet& k) const {
    std::vector<int> out;
    if (scheme_ == Scheme::VKG) {
        const int v = shared_index(DescriptionSet::full_set(total_));
        if (v >= 0) out.push_back(v);
    } else {
        out = shared_indices(lattice::sharing_sets(total_, k));
    }
    const auto us = aux_indices_subsets(k);
    out.insert(out.end(), us.begin(), us.end());
    return out;
}

AuxModel AuxModel::with_scheme(Scheme scheme) const {
    return AuxModel(total_, scheme, joint_, source_, shared_, aux_, distortions_,
                    vkg_cond_flag_);
}

AuxModel AuxModel::with_joint(JointDistribution joint) const {
    return AuxModel(total_, scheme_, std::move(joint), source_, shared_, aux_, distortions_,
                    vkg_cond_flag_);
}

}  // namespace mdcms
