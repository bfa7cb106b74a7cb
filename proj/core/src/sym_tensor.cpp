#include "steinw/sym_tensor.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace steinw {

namespace {
std::mutex g_basis_mutex;
std::map<std::pair<int, int>, std::shared_ptr<const TensorBasis>>& basis_cache() {
    static std::map<std::pair<int, int>, std::shared_ptr<const TensorBasis>> cache;
    return cache;
}
}  // namespace

TensorBasis::TensorBasis(int dim, int degree) : dim_(dim), degree_(degree) {
    indices_ = enumerate_multi_indices(dim, degree);
    weights_.reserve(indices_.size());
    for (const auto& a : indices_) weights_.push_back(multinomial_weight(a));
}

std::shared_ptr<const TensorBasis> TensorBasis::get(int dim, int degree) {
    std::lock_guard<std::mutex> lock(g_basis_mutex);
    auto& cache = basis_cache();
    auto it = cache.find({dim, degree});
    if (it != cache.end()) return it->second;
    auto basis = std::shared_ptr<const TensorBasis>(new TensorBasis(dim, degree));
    cache.emplace(std::pair{dim, degree}, basis);
    return basis;
}

int TensorBasis::rank_of(const MultiIndex& a) const {
    if (a.dim() != dim_ || a.order() != degree_) return -1;
    // Binary search works because indices_ is sorted decreasing.
    int lo = 0, hi = size() - 1;
    while (lo <= hi) {
        const int mid = (lo + hi) / 2;
        const auto cmp = indices_[static_cast<std::size_t>(mid)] <=> a;
        if (cmp == std::strong_ordering::equal) return mid;
        if (cmp == std::strong_ordering::greater)
            lo = mid + 1;
        else
            hi = mid - 1;
    }
    return -1;
}

SymTensor::SymTensor(int dim, int degree)
    : basis_(TensorBasis::get(dim, degree)),
      coeffs_(static_cast<std::size_t>(basis_->size()), 0.0) {}

double SymTensor::coeff(const MultiIndex& a) const {
    const int r = basis_->rank_of(a);
    if (r < 0) throw std::invalid_argument("SymTensor::coeff: index outside basis");
    return coeffs_[static_cast<std::size_t>(r)];
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
    if (dim() != o.dim() || degree() != o.degree())
        throw std::invalid_argument("SymTensor: shape mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
    if (dim() != o.dim() || degree() != o.degree())
        throw std::invalid_argument("SymTensor: shape mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SymTensor& SymTensor::operator*=(double c) {
    for (double& v : coeffs_) v *= c;
    return *this;
}

void SymTensor::set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), 0.0); }

SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
SymTensor operator*(SymTensor a, double c) { return a *= c; }

SymTensor tensor_power(std::span<const double> x, int k) {
    if (k < 0) throw std::invalid_argument("tensor_power: k must be >= 0");
    const int d = static_cast<int>(x.size());
    SymTensor t(d, k);
    std::vector<double> pow_table(static_cast<std::size_t>((k + 1) * d));
    add_tensor_power(t, x, 1.0, pow_table);
    return t;
}

void add_tensor_power(SymTensor& acc, std::span<const double> x, double scale,
                      std::span<double> pow_table) {
    const int d = acc.dim();
    const int k = acc.degree();
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument("add_tensor_power: dimension mismatch");
    if (static_cast<int>(pow_table.size()) < (k + 1) * d)
        throw std::invalid_argument("add_tensor_power: power table too small");
    // pow_table[j*d + i] = x_i^j
    for (int i = 0; i < d; ++i) pow_table[static_cast<std::size_t>(i)] = 1.0;
    for (int j = 1; j <= k; ++j)
        for (int i = 0; i < d; ++i)
            pow_table[static_cast<std::size_t>(j * d + i)] =
                pow_table[static_cast<std::size_t>((j - 1) * d + i)] * x[static_cast<std::size_t>(i)];

    const auto& idx = acc.basis().indices();
    auto coeffs = acc.coeffs();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        double m = scale;
        const auto& a = idx[r].entries();
        for (int i = 0; i < d; ++i) {
            const int e = a[static_cast<std::size_t>(i)];
            if (e) m *= pow_table[static_cast<std::size_t>(e * d + i)];
        }
        coeffs[r] += m;
    }
}

SymTensor sym_embed(const Eigen::MatrixXd& m) {
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d) throw std::invalid_argument("sym_embed: matrix must be square");
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, std::abs(m(i, j))))
                throw std::invalid_argument("sym_embed: matrix must be symmetric");

    SymTensor t(d, 2);
    const auto& idx = t.basis().indices();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& a = idx[r];
        int i = -1, j = -1;
        for (int c = 0; c < d; ++c) {
            if (a[c] == 2) { i = j = c; break; }
            if (a[c] == 1) { (i < 0 ? i : j) = c; }
        }
        t[static_cast<int>(r)] = m(i, j);
    }
    return t;
}

SymTensor identity_tensor(int d) {
    return sym_embed(Eigen::MatrixXd::Identity(d, d));
}

double hs_inner(const SymTensor& a, const SymTensor& b) {
    if (a.dim() != b.dim() || a.degree() != b.degree())
        throw std::invalid_argument("hs_inner: shape mismatch");
    const auto w = a.basis().weights();
    const auto ca = a.coeffs();
    const auto cb = b.coeffs();
    double s = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) s += w[i] * ca[i] * cb[i];
    return s;
}

double hs_norm_sq(const SymTensor& a) { return hs_inner(a, a); }

double hs_norm(const SymTensor& a) { return std::sqrt(hs_norm_sq(a)); }

}  // namespace steinw
