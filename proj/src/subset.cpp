#include "concordance/subset.hpp"

#include "concordance/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>

namespace concordance {

namespace {

void check_dimension(int d) {
    if (d < 1 || d > kMaxSubsetDimension) {
        throw Error(ErrorCode::OutOfRange,
                    "dimension " + std::to_string(d) + " outside [1, " +
                        std::to_string(kMaxSubsetDimension) + "]");
    }
}

Mask full_mask(int d) {
    return d >= 32 ? ~Mask{0} : ((Mask{1} << d) - 1);
}

// Lexicographic compare of member lists, assuming equal cardinality. The
// lowest differing bit decides: the set holding it has the smaller member there.
bool same_size_lex_less(Mask a, Mask b) noexcept {
    const Mask diff = a ^ b;
    if (diff == 0) return false;
    const Mask lowest = diff & (~diff + 1);
    return (a & lowest) != 0;
}

void append_combinations(int d, int size, std::vector<Mask>& out) {
    if (size == 0) {
        out.push_back(0);
        return;
    }
    if (size > d) return;
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        Mask m = 0;
        for (int v : idx) m |= Mask{1} << v;
        out.push_back(m);
        int i = size - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - size + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace

SubsetIndex::SubsetIndex(int d, Mask mask) : d_(d), mask_(mask) {
    check_dimension(d);
    if ((mask & ~full_mask(d)) != 0) {
        throw Error(ErrorCode::InvalidLabel, "subset has members outside 1.." + std::to_string(d));
    }
}

SubsetIndex SubsetIndex::from_members(int d, std::span<const int> members) {
    check_dimension(d);
    Mask m = 0;
    for (int j : members) {
        if (j < 1 || j > d) {
            throw Error(ErrorCode::InvalidLabel,
                        "member " + std::to_string(j) + " outside 1.." + std::to_string(d));
        }
        const Mask bit = Mask{1} << (j - 1);
        if (m & bit) throw Error(ErrorCode::InvalidLabel, "duplicate member " + std::to_string(j));
        m |= bit;
    }
    return SubsetIndex(d, m);
}

SubsetIndex SubsetIndex::from_members(int d, std::initializer_list<int> members) {
    return from_members(d, std::span<const int>(members.begin(), members.size()));
}

SubsetIndex SubsetIndex::full(int d) {
    check_dimension(d);
    return SubsetIndex(d, full_mask(d));
}

SubsetIndex SubsetIndex::parse(int d, std::string_view text) {
    std::vector<int> members;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            int value = 0;
            auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
            if (ec != std::errc{}) throw Error(ErrorCode::InvalidLabel, "bad label '" + std::string(text) + "'");
            members.push_back(value);
            i = static_cast<std::size_t>(ptr - text.data());
        } else if (c == ',' || c == '-' || c == ' ' || c == '{' || c == '}' || c == '_') {
            ++i;
        } else {
            throw Error(ErrorCode::InvalidLabel, "bad label '" + std::string(text) + "'");
        }
    }
    return from_members(d, members);
}

int SubsetIndex::size() const noexcept { return std::popcount(mask_); }

bool SubsetIndex::contains(int member) const noexcept {
    return member >= 1 && member <= d_ && (mask_ >> (member - 1)) & 1U;
}

std::vector<int> SubsetIndex::members() const {
    std::vector<int> out;
    for (int j = 1; j <= d_; ++j)
        if (contains(j)) out.push_back(j);
    return out;
}

std::string SubsetIndex::to_string() const {
    std::string s = "{";
    bool first = true;
    for (int j : members()) {
        if (!first) s += ',';
        s += std::to_string(j);
        first = false;
    }
    return s + "}";
}

bool graded_lex_less(Mask a, Mask b) noexcept {
    const int sa = std::popcount(a), sb = std::popcount(b);
    if (sa != sb) return sa < sb;
    return same_size_lex_less(a, b);
}

std::strong_ordering SubsetIndex::operator<=>(const SubsetIndex& other) const noexcept {
    if (d_ != other.d_) return d_ <=> other.d_;
    if (mask_ == other.mask_) return std::strong_ordering::equal;
    return graded_lex_less(mask_, other.mask_) ? std::strong_ordering::less
                                              : std::strong_ordering::greater;
}

std::vector<Mask> subsets_of_size(int d, int size) {
    check_dimension(d);
    std::vector<Mask> out;
    append_combinations(d, size, out);
    return out;
}

std::vector<Mask> even_subset_masks(int d) {
    check_dimension(d);
    std::vector<Mask> out;
    for (int m = 0; m <= d; m += 2) append_combinations(d, m, out);
    return out;
}

std::vector<Mask> all_subset_masks(int d) {
    check_dimension(d);
    std::vector<Mask> out;
    for (int m = 0; m <= d; ++m) append_combinations(d, m, out);
    return out;
}

LabelSet::LabelSet(int d, std::vector<SubsetIndex> subsets) : d_(d), subsets_(std::move(subsets)) {
    check_dimension(d);
    for (const auto& s : subsets_) {
        if (s.dimension() != d) throw Error(ErrorCode::InvalidLabel, "label from a different dimension");
    }
    std::sort(subsets_.begin(), subsets_.end());
    if (std::adjacent_find(subsets_.begin(), subsets_.end()) != subsets_.end()) {
        throw Error(ErrorCode::InvalidLabel, "duplicate label in label set");
    }
    if (subsets_.empty() || !subsets_.front().empty_set()) {
        throw Error(ErrorCode::InvalidLabel, "label set must contain the empty set");
    }
}

LabelSet LabelSet::even_power_set(int d) {
    std::vector<SubsetIndex> s;
    for (Mask m : even_subset_masks(d)) s.emplace_back(d, m);
    return LabelSet(d, std::move(s));
}

LabelSet LabelSet::pairs(int d) {
    std::vector<SubsetIndex> s{SubsetIndex::empty(d)};
    for (Mask m : subsets_of_size(d, 2)) s.emplace_back(d, m);
    return LabelSet(d, std::move(s));
}

bool LabelSet::contains(const SubsetIndex& s) const { return index_of(s) >= 0; }

int LabelSet::index_of(const SubsetIndex& s) const {
    auto it = std::lower_bound(subsets_.begin(), subsets_.end(), s);
    if (it == subsets_.end() || *it != s) return -1;
    return static_cast<int>(it - subsets_.begin());
}

bool LabelSet::only_even() const {
    return std::all_of(subsets_.begin(), subsets_.end(), [](const SubsetIndex& s) { return s.size() % 2 == 0; });
}

}  // namespace concordance
