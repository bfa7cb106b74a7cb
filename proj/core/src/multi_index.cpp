#include "steinw/multi_index.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace steinw {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("MultiIndex: dimension must be >= 1");
    for (int e : entries_) {
        if (e < 0) throw std::invalid_argument("MultiIndex: entries must be non-negative");
        order_ += e;
    }
}

std::vector<MultiIndex> enumerate_multi_indices(int d, int k) {
    if (d < 1) throw std::invalid_argument("enumerate_multi_indices: d must be >= 1");
    if (k < 0) throw std::invalid_argument("enumerate_multi_indices: k must be >= 0");
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(multi_index_count(d, k)));
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    // Depth-first with leading entries taken largest-first gives the
    // decreasing lexicographic order.
    auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == d - 1) {
            cur[static_cast<std::size_t>(pos)] = rem;
            out.emplace_back(cur);
            return;
        }
        for (int v = rem; v >= 0; --v) {
            cur[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, rem - v);
        }
    };
    rec(rec, 0, k);
    return out;
}

double mi_factorial(const MultiIndex& a) {
    double f = 1.0;
    for (int e : a.entries())
        for (int j = 2; j <= e; ++j) f *= j;
    return f;
}

double monomial(std::span<const double> x, const MultiIndex& a) {
    if (static_cast<int>(x.size()) != a.dim())
        throw std::invalid_argument("monomial: length mismatch between x and alpha");
    double p = 1.0;
    for (int i = 0; i < a.dim(); ++i) {
        const int e = a[i];
        double xe = 1.0;  // 0^0 = 1
        for (int j = 0; j < e; ++j) xe *= x[static_cast<std::size_t>(i)];
        p *= xe;
    }
    return p;
}

double multinomial_weight(const MultiIndex& a) {
    // k!/alpha! as a product of binomial coefficients of the partial sums;
    // keeps intermediates small for moderate orders.
    double w = 1.0;
    long run = 0;
    for (int e : a.entries()) {
        for (int j = 1; j <= e; ++j) {
            ++run;
            w *= static_cast<double>(run) / static_cast<double>(j);
        }
    }
    const double r = std::round(w);
    return (r > 0.0 && std::abs(w - r) < 1e-6 * r) ? r : w;
}

long multi_index_count(int d, int k) {
    if (d < 1) throw std::invalid_argument("multi_index_count: d must be >= 1");
    if (k < 0) throw std::invalid_argument("multi_index_count: k must be >= 0");
    // C(d+k-1, k) built multiplicatively.
    long double c = 1.0L;
    for (int j = 1; j <= k; ++j) c = c * (d - 1 + j) / j;
    return static_cast<long>(std::llroundl(c));
}

}  // namespace steinw
