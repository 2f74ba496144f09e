// layout.hpp - dense slot indexing of HEOM occupation vectors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace heom {

inline constexpr std::size_t kDefaultMaxSlots = 4'000'000;

// binomial(n_cor + max_level, max_level), or nullopt on 64-bit overflow.
std::optional<std::uint64_t> hierarchy_size(int n_cor, int max_level);

// All occupation vectors n with |n| <= L_max, ordered by level and then
// lexicographically with mode 0 most significant, descending:
//   {0,0} | {1,0} {0,1} | {2,0} {1,1} {0,2} | ...
// Slot 0 is always the reduced density matrix.
class HierarchyLayout {
  public:
    static constexpr std::int32_t absent = -1;

    HierarchyLayout(int n_cor, int max_level, std::size_t max_slots = kDefaultMaxSlots);

    std::size_t size() const { return level_.size(); }
    int modes() const { return n_cor_; }
    int max_level() const { return max_level_; }

    std::span<const std::uint8_t> occupation(std::size_t slot) const {
        return {occupations_.data() + slot * static_cast<std::size_t>(n_cor_), static_cast<std::size_t>(n_cor_)};
    }
    int level(std::size_t slot) const { return level_[slot]; }

    // n_k^+ / n_k^- neighbours; `absent` past the truncation or below zero.
    std::int32_t raise(std::size_t slot, int k) const { return raise_[slot * n_cor_ + k]; }
    std::int32_t lower(std::size_t slot, int k) const { return lower_[slot * n_cor_ + k]; }

    // Slots [level_begin(l), level_begin(l + 1)) hold level l.
    std::size_t level_begin(int l) const { return level_offsets_[static_cast<std::size_t>(l)]; }

    std::optional<std::size_t> find(std::span<const std::uint8_t> n) const;

  private:
    int n_cor_;
    int max_level_;
    std::vector<std::uint8_t> occupations_;
    std::vector<int> level_;
    std::vector<std::size_t> level_offsets_;
    std::vector<std::int32_t> raise_;
    std::vector<std::int32_t> lower_;
};

HierarchyLayout build_layout(int n_cor, int max_level, std::size_t max_slots = kDefaultMaxSlots);

} // namespace heom
