#pragma once
// Description-subset combinatorics: the index lattice used by every
// rate/distortion constraint family (tiers I_W, I_W+, sharing sets J).
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace mdcms {

// A subset of the description indices {1..L}, stored as a bitmask.
// Bit (l-1) set means description l is a member. L is capped at 8.
class DescriptionSet {
public:
    static constexpr int kMaxL = 8;

    DescriptionSet() = default;  // empty set over L = 1
    DescriptionSet(std::initializer_list<int> members, int total);

    static DescriptionSet empty_set(int total);
    static DescriptionSet full_set(int total);
    static DescriptionSet from_mask(std::uint32_t mask, int total);
    static DescriptionSet from_members(const std::vector<int>& members, int total);

    int total() const { return total_; }
    std::uint32_t mask() const { return mask_; }
    int cardinality() const;
    bool empty() const { return mask_ == 0; }
    bool contains(int l) const;
    bool subset_of(const DescriptionSet& other) const;
    bool intersects(const DescriptionSet& other) const;
    std::vector<int> members() const;

    // Digit-run label, e.g. {1,3} -> "13". Used for default variable names.
    std::string label() const;

    bool operator==(const DescriptionSet& o) const {
        return mask_ == o.mask_ && total_ == o.total_;
    }
    bool operator!=(const DescriptionSet& o) const { return !(*this == o); }

    // Canonical order: by cardinality, then lexicographic on sorted members.
    // This is the order every serialized family uses.
    bool operator<(const DescriptionSet& o) const;

private:
    std::uint32_t mask_ = 0;
    int total_ = 1;
};

// An ordered, duplicate-free list of subsets sharing the same L,
// kept in canonical (cardinality, lexicographic) order.
class SubsetFamily {
public:
    SubsetFamily() = default;
    explicit SubsetFamily(std::vector<DescriptionSet> sets);  // sorts + validates

    std::size_t size() const { return sets_.size(); }
    bool empty() const { return sets_.empty(); }
    const DescriptionSet& operator[](std::size_t i) const { return sets_[i]; }
    auto begin() const { return sets_.begin(); }
    auto end() const { return sets_.end(); }
    bool contains(const DescriptionSet& s) const;

private:
    std::vector<DescriptionSet> sets_;
};

namespace lattice {

// All 2^L - 1 nonempty subsets of {1..L} in canonical order.
SubsetFamily nonempty_subsets(int total);

// I_W = {S : |S| = W} and I_W+ = {S : |S| > W}.
SubsetFamily tier(int total, int width);
SubsetFamily tier_above(int total, int width);

// I_W(B) = {S in I_W : B subset of S}; requires B nonempty, |B| <= W.
SubsetFamily tier_containing(int total, int width, const DescriptionSet& base);
SubsetFamily tier_above_containing(int total, int width, const DescriptionSet& base);

// J(K) = {S : |S| > 1, S intersects K}; requires K nonempty.
SubsetFamily sharing_sets(int total, const DescriptionSet& key);

}  // namespace lattice
}  // namespace mdcms
