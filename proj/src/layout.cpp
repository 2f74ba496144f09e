#include "heom/layout.hpp"

#include <string>

#include "heom/errors.hpp"

namespace heom {

namespace {

// Emits every composition of `remaining` into modes [k, n) in descending lex order.
void enumerate_level(std::vector<std::uint8_t>& current, int k, int remaining, std::vector<std::uint8_t>& out) {
    const int n = static_cast<int>(current.size());
    if (k == n - 1) {
        current[k] = static_cast<std::uint8_t>(remaining);
        out.insert(out.end(), current.begin(), current.end());
        current[k] = 0;
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        current[k] = static_cast<std::uint8_t>(v);
        enumerate_level(current, k + 1, remaining - v, out);
    }
    current[k] = 0;
}

} // namespace

std::optional<std::uint64_t> hierarchy_size(int n_cor, int max_level) {
    // binomial(n + L, L) built incrementally; each partial product is itself a binomial.
    std::uint64_t c = 1;
    for (int i = 1; i <= max_level; ++i) {
        const std::uint64_t num = static_cast<std::uint64_t>(n_cor) + static_cast<std::uint64_t>(i);
        if (c > UINT64_MAX / num) return std::nullopt;
        c = c * num / static_cast<std::uint64_t>(i);
    }
    return c;
}

HierarchyLayout::HierarchyLayout(int n_cor, int max_level, std::size_t max_slots)
    : n_cor_(n_cor), max_level_(max_level) {
    if (n_cor < 1) throw ConfigError("hierarchy: n_cor must be >= 1");
    if (max_level < 0) throw ConfigError("hierarchy: level must be >= 0");
    if (max_level > 255) throw CapacityError("hierarchy: level above 255 is not representable");
    const auto count = hierarchy_size(n_cor, max_level);
    if (!count || *count > max_slots)
        throw CapacityError("hierarchy: " + (count ? std::to_string(*count) : std::string("overflowing")) +
                            " auxiliary matrices for n_cor=" + std::to_string(n_cor) +
                            ", L=" + std::to_string(max_level) + " exceeds the cap of " + std::to_string(max_slots));

    occupations_.reserve(*count * static_cast<std::size_t>(n_cor));
    std::vector<std::uint8_t> current(static_cast<std::size_t>(n_cor), 0);
    for (int l = 0; l <= max_level; ++l) {
        level_offsets_.push_back(occupations_.size() / static_cast<std::size_t>(n_cor));
        enumerate_level(current, 0, l, occupations_);
    }
    const std::size_t n_slots = occupations_.size() / static_cast<std::size_t>(n_cor);
    level_offsets_.push_back(n_slots);
    level_.resize(n_slots);
    for (int l = 0; l <= max_level; ++l)
        for (std::size_t s = level_offsets_[l]; s < level_offsets_[l + 1]; ++s) level_[s] = l;

    raise_.assign(n_slots * n_cor, absent);
    lower_.assign(n_slots * n_cor, absent);
    std::vector<std::uint8_t> probe(static_cast<std::size_t>(n_cor));
    for (std::size_t s = 0; s < n_slots; ++s) {
        if (level_[s] == max_level) continue;
        const auto occ = occupation(s);
        for (int k = 0; k < n_cor; ++k) {
            probe.assign(occ.begin(), occ.end());
            ++probe[k];
            const auto up = find(probe);
            raise_[s * n_cor + k] = static_cast<std::int32_t>(*up);
            lower_[*up * n_cor + k] = static_cast<std::int32_t>(s);
        }
    }
}

std::optional<std::size_t> HierarchyLayout::find(std::span<const std::uint8_t> n) const {
    if (static_cast<int>(n.size()) != n_cor_) return std::nullopt;
    int l = 0;
    for (auto v : n) l += v;
    if (l > max_level_) return std::nullopt;
    // Rank within the level: count the vectors that precede n in descending lex order.
    std::size_t rank = 0;
    int remaining = l;
    for (int k = 0; k < n_cor_ - 1; ++k) {
        // Vectors with a larger entry at position k come first.
        for (int v = remaining; v > n[k]; --v) {
            const int rest = remaining - v;
            // Compositions of `rest` into the n_cor - k - 1 trailing modes.
            rank += static_cast<std::size_t>(*hierarchy_size(n_cor_ - k - 2, rest));
        }
        remaining -= n[k];
    }
    return level_offsets_[l] + rank;
}

HierarchyLayout build_layout(int n_cor, int max_level, std::size_t max_slots) {
    return HierarchyLayout(n_cor, max_level, max_slots);
}

} // namespace heom
