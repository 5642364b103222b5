#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace vacant {

// Weighted quick-union with path halving.
template <class Index = std::uint64_t>
class DisjointSet {
public:
    explicit DisjointSet(Index n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), Index{0}); }

    Index find(Index i) noexcept
    {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    bool unite(Index a, Index b) noexcept
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    Index set_size(Index i) noexcept { return size_[find(i)]; }

private:
    std::vector<Index> parent_;
    std::vector<Index> size_;
};

} // namespace vacant
