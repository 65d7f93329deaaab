#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace concordance {

using Mask = std::uint32_t;

/// Largest dimension for which subsets can be represented at all.
inline constexpr int kMaxSubsetDimension = 30;

/// A subset I of {1,...,d}. Member j is stored as bit (j-1) of the mask.
class SubsetIndex {
public:
    SubsetIndex() = default;
    SubsetIndex(int d, Mask mask);

    /// Members are 1-based; they may come in any order but must be distinct.
    static SubsetIndex from_members(int d, std::span<const int> members);
    static SubsetIndex from_members(int d, std::initializer_list<int> members);
    static SubsetIndex empty(int d) { return SubsetIndex(d, 0); }
    static SubsetIndex full(int d);

    /// Parses "1,2,4", "1-2-4", "{1,2,4}" or "" (empty set).
    static SubsetIndex parse(int d, std::string_view text);

    int dimension() const noexcept { return d_; }
    Mask mask() const noexcept { return mask_; }
    int size() const noexcept;
    bool empty_set() const noexcept { return mask_ == 0; }
    bool contains(int member) const noexcept;
    bool is_subset_of(const SubsetIndex& other) const noexcept {
        return (mask_ & ~other.mask_) == 0;
    }
    std::vector<int> members() const;
    std::string to_string() const;  // "{1,2}"

    bool operator==(const SubsetIndex& other) const noexcept = default;
    /// Graded lexicographic: by cardinality, then by sorted member lists.
    std::strong_ordering operator<=>(const SubsetIndex& other) const noexcept;

private:
    int d_ = 0;
    Mask mask_ = 0;
};

/// Graded-lexicographic comparison of two masks over the same ground set.
bool graded_lex_less(Mask a, Mask b) noexcept;

/// Masks of all even-cardinality subsets of {1..d} in graded lexicographic order.
std::vector<Mask> even_subset_masks(int d);
/// Masks of all subsets of {1..d} in graded lexicographic order.
std::vector<Mask> all_subset_masks(int d);
/// Masks of all subsets of the given cardinality, lexicographic.
std::vector<Mask> subsets_of_size(int d, int size);

/// A label set: sorted, duplicate-free collection of subsets containing the empty set.
class LabelSet {
public:
    LabelSet() = default;
    /// Sorts the given subsets; rejects duplicates, foreign dimensions and a missing empty set.
    LabelSet(int d, std::vector<SubsetIndex> subsets);

    static LabelSet even_power_set(int d);
    /// {empty set} plus every pair.
    static LabelSet pairs(int d);

    int dimension() const noexcept { return d_; }
    std::size_t size() const noexcept { return subsets_.size(); }
    const std::vector<SubsetIndex>& subsets() const noexcept { return subsets_; }
    const SubsetIndex& operator[](std::size_t i) const { return subsets_[i]; }
    bool contains(const SubsetIndex& s) const;
    /// Position of s, or -1.
    int index_of(const SubsetIndex& s) const;
    bool only_even() const;

    auto begin() const { return subsets_.begin(); }
    auto end() const { return subsets_.end(); }

private:
    int d_ = 0;
    std::vector<SubsetIndex> subsets_;
};

}  // namespace concordance
