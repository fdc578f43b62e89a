#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace delval {

// A coalition of sources as a fixed-width bitset over indices [0, n).
// Bit i set means source i is a member. Supports up to 64 sources, far
// beyond every exact-enumeration guard in this library.
struct Coalition {
    std::uint64_t bits = 0;

    constexpr Coalition() = default;
    constexpr explicit Coalition(std::uint64_t mask) : bits(mask) {}

    static constexpr Coalition empty_set() { return Coalition{0}; }
    static constexpr Coalition full_set(int n) {
        return Coalition{n >= 64 ? ~0ULL : ((1ULL << n) - 1ULL)};
    }
    static Coalition of(std::initializer_list<int> members) {
        Coalition c;
        for (int i : members) c.bits |= (1ULL << i);
        return c;
    }

    constexpr bool contains(int i) const { return (bits >> i) & 1ULL; }
    constexpr int size() const { return std::popcount(bits); }
    constexpr bool is_empty() const { return bits == 0; }

    constexpr Coalition with(int i) const { return Coalition{bits | (1ULL << i)}; }
    constexpr Coalition without(int i) const { return Coalition{bits & ~(1ULL << i)}; }
    constexpr Coalition intersect(Coalition o) const { return Coalition{bits & o.bits}; }
    constexpr Coalition unite(Coalition o) const { return Coalition{bits | o.bits}; }
    constexpr bool subset_of(Coalition o) const { return (bits & ~o.bits) == 0; }

    constexpr bool operator==(const Coalition&) const = default;

    std::vector<int> members() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(size()));
        std::uint64_t m = bits;
        while (m) {
            out.push_back(std::countr_zero(m));
            m &= m - 1;
        }
        return out;
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (int i : members()) {
            if (!first) s += ",";
            s += std::to_string(i);
            first = false;
        }
        return s + "}";
    }
};

// Iterates every subset of `mask` (including empty and mask itself).
template <typename Fn>
void for_each_subset(std::uint64_t mask, Fn&& fn) {
    std::uint64_t s = mask;
    for (;;) {
        fn(Coalition{s});
        if (s == 0) break;
        s = (s - 1) & mask;
    }
}

}  // namespace delval
