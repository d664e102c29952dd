#include "mdcms/subsets.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace mdcms {

namespace {

void check_total(int total) {
    if (total < 1 || total > DescriptionSet::kMaxL)
        throw std::invalid_argument("description count L must be in [1, 8], got " +
                                    std::to_string(total));
}

}  // namespace

DescriptionSet::DescriptionSet(std::initializer_list<int> members, int total) {
    *this = from_members(std::vector<int>(members), total);
}

DescriptionSet DescriptionSet::empty_set(int total) {
    check_total(total);
    DescriptionSet s;
    s.total_ = total;
    return s;
}

DescriptionSet DescriptionSet::full_set(int total) {
    check_total(total);
    DescriptionSet s;
    s.total_ = total;
    s.mask_ = (1u << total) - 1u;
    return s;
}

DescriptionSet DescriptionSet::from_mask(std::uint32_t mask, int total) {
    check_total(total);
    if (mask >= (1u << total))
        throw std::invalid_argument("subset mask has members above L");
    DescriptionSet s;
    s.total_ = total;
    s.mask_ = mask;
    return s;
}

DescriptionSet DescriptionSet::from_members(const std::vector<int>& members, int total) {
    check_total(total);
    std::uint32_t mask = 0;
    for (int l : members) {
        if (l < 1 || l > total)
            throw std::invalid_argument("description index " + std::to_string(l) +
                                        " outside {1.." + std::to_string(total) + "}");
        mask |= 1u << (l - 1);
    }
    DescriptionSet s;
    s.total_ = total;
    s.mask_ = mask;
    return s;
}

int DescriptionSet::cardinality() const { return std::popcount(mask_); }

bool DescriptionSet::contains(int l) const {
    return l >= 1 && l <= total_ && (mask_ & (1u << (l - 1)));
}

bool DescriptionSet::subset_of(const DescriptionSet& other) const {
    return (mask_ & ~other.mask_) == 0;
}

bool DescriptionSet::intersects(const DescriptionSet& other) const {
    return (mask_ & other.mask_) != 0;
}

std::vector<int> DescriptionSet::members() const {
    std::vector<int> out;
    for (int l = 1; l <= total_; ++l)
        if (mask_ & (1u << (l - 1))) out.push_back(l);
    return out;
}

std::string DescriptionSet::label() const {
    std::string out;
    for (int l : members()) out += std::to_string(l);
    return out;
}

bool DescriptionSet::operator<(const DescriptionSet& o) const {
    const int ca = cardinality(), cb = o.cardinality();
    if (ca != cb) return ca < cb;
    // Same cardinality: lexicographic on the sorted member lists. Note this
    // is not plain mask order ({1,4} precedes {2,3}).
    const auto ma = members(), mb = o.members();
    return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

SubsetFamily::SubsetFamily(std::vector<DescriptionSet> sets) : sets_(std::move(sets)) {
    std::sort(sets_.begin(), sets_.end());
    for (std::size_t i = 0; i + 1 < sets_.size(); ++i) {
        if (sets_[i].total() != sets_[i + 1].total())
            throw std::invalid_argument("subset family mixes different L");
        if (sets_[i] == sets_[i + 1])
            throw std::invalid_argument("duplicate subset in family");
    }
}

bool SubsetFamily::contains(const DescriptionSet& s) const {
    return std::find(sets_.begin(), sets_.end(), s) != sets_.end();
}

namespace lattice {

namespace {

SubsetFamily collect(int total, auto&& pred) {
    std::vector<DescriptionSet> out;
    for (std::uint32_t m = 1; m < (1u << total); ++m) {
        DescriptionSet s = DescriptionSet::from_mask(m, total);
        if (pred(s)) out.push_back(s);
    }
    return SubsetFamily(std::move(out));
}

}  // namespace

SubsetFamily nonempty_subsets(int total) {
    check_total(total);
    return collect(total, [](const DescriptionSet&) { return true; });
}

SubsetFamily tier(int total, int width) {
    check_total(total);
    if (width < 1 || width > total)
        throw std::invalid_argument("tier width outside [1, L]");
    return collect(total, [&](const DescriptionSet& s) { return s.cardinality() == width; });
}

SubsetFamily tier_above(int total, int width) {
    check_total(total);
    if (width < 1 || width > total)
        throw std::invalid_argument("tier width outside [1, L]");
    return collect(total, [&](const DescriptionSet& s) { return s.cardinality() > width; });
}

SubsetFamily tier_containing(int total, int width, const DescriptionSet& base) {
    check_total(total);
    if (base.empty()) throw std::invalid_argument("base subset must be nonempty");
    if (base.cardinality() > width)
        throw std::invalid_argument("base subset larger than tier width");
    return collect(total, [&](const DescriptionSet& s) {
        return s.cardinality() == width && base.subset_of(s);
    });
}

SubsetFamily tier_above_containing(int total, int width, const DescriptionSet& base) {
    check_total(total);
    if (base.empty()) throw std::invalid_argument("base subset must be nonempty");
    if (base.cardinality() > width)
        throw std::invalid_argument("base subset larger than tier width");
    return collect(total, [&](const DescriptionSet& s) {
        return s.cardinality() > width && base.subset_of(s);
    });
}

SubsetFamily sharing_sets(int total, const DescriptionSet& key) {
    check_total(total);
    if (key.empty()) throw std::invalid_argument("sharing-set key must be nonempty");
    return collect(total, [&](const DescriptionSet& s) {
        return s.cardinality() > 1 && s.intersects(key);
    });
}

}  // namespace lattice
}  // namespace mdcms
