#pragma once

#include <compare>
#include <span>
#include <vector>

namespace steinw {

// d-tuple of non-negative integers. Indexes tensor coordinates, Hermite
// polynomials and partial derivatives.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries);

    int dim() const noexcept { return static_cast<int>(entries_.size()); }
    int order() const noexcept { return order_; }  // sum of entries
    int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& entries() const noexcept { return entries_; }

    bool operator==(const MultiIndex& o) const { return entries_ == o.entries_; }
    std::strong_ordering operator<=>(const MultiIndex& o) const {
        return entries_ <=> o.entries_;  // lexicographic
    }

private:
    std::vector<int> entries_;
    int order_ = 0;
};

// All multi-indices of dimension d with order k, lexicographically decreasing:
// (k,0,..,0) first, (0,..,0,k) last. Size is C(d+k-1, k).
std::vector<MultiIndex> enumerate_multi_indices(int d, int k);

// alpha! = prod alpha_i!. Exact as long as the result fits 53 bits.
double mi_factorial(const MultiIndex& a);

// x^alpha with the 0^0 = 1 convention.
double monomial(std::span<const double> x, const MultiIndex& a);

// |alpha|! / alpha!, the Hilbert-Schmidt weight of coordinate alpha.
double multinomial_weight(const MultiIndex& a);

// C(d+k-1, k), the number of multi-indices of dimension d and order k.
long multi_index_count(int d, int k);

}  // namespace steinw
