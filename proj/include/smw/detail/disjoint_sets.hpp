#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace smw::detail {

/// Minimal union-find for connectivity checks and component labeling.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n = 0) { reset(n); }

    void reset(std::size_t n) {
        parent_.resize(n);
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }

    std::size_t size() const noexcept { return parent_.size(); }

    std::uint32_t find(std::uint32_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    /// Links the two sets; the smaller root index survives.
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
        return true;
    }

    bool same(std::uint32_t a, std::uint32_t b) { return find(a) == find(b); }

    /// Component id per element, 0-based by first occurrence.
    std::vector<std::uint32_t> component_ids(std::uint32_t* count = nullptr) {
        const auto none = static_cast<std::uint32_t>(-1);
        std::vector<std::uint32_t> root_id(parent_.size(), none), out(parent_.size());
        std::uint32_t next = 0;
        for (std::uint32_t i = 0; i < parent_.size(); ++i) {
            const std::uint32_t r = find(i);
            if (root_id[r] == none) root_id[r] = next++;
            out[i] = root_id[r];
        }
        if (count) *count = next;
        return out;
    }

private:
    std::vector<std::uint32_t> parent_;
};

} // namespace smw::detail
