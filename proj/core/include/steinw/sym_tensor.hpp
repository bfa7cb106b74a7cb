#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "steinw/multi_index.hpp"

namespace steinw {

// Shared index set and Hilbert-Schmidt weights for a fixed (dim, degree).
// Coordinates follow enumerate_multi_indices order. Instances are cached and
// immutable, safe to share across threads.
class TensorBasis {
public:
    static std::shared_ptr<const TensorBasis> get(int dim, int degree);

    int dim() const noexcept { return dim_; }
    int degree() const noexcept { return degree_; }
    int size() const noexcept { return static_cast<int>(indices_.size()); }
    const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    std::span<const double> weights() const noexcept { return weights_; }  // k!/alpha!
    int rank_of(const MultiIndex& a) const;  // position of alpha; -1 if absent

private:
    TensorBasis(int dim, int degree);
    int dim_, degree_;
    std::vector<MultiIndex> indices_;
    std::vector<double> weights_;
};

// Coefficient family (M_alpha)_{|alpha|=k} over multi-indices of a fixed
// degree. Houses x^{(x)k} powers, conditional moments and (degree 2)
// symmetric matrices. Dense storage, lexicographically ordered.
class SymTensor {
public:
    SymTensor() = default;
    SymTensor(int dim, int degree);  // zero tensor

    int dim() const noexcept { return basis_ ? basis_->dim() : 0; }
    int degree() const noexcept { return basis_ ? basis_->degree() : 0; }
    int size() const noexcept { return basis_ ? basis_->size() : 0; }
    const TensorBasis& basis() const { return *basis_; }

    double coeff(const MultiIndex& a) const;
    double operator[](int i) const { return coeffs_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return coeffs_[static_cast<std::size_t>(i)]; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::span<double> coeffs() noexcept { return coeffs_; }

    SymTensor& operator+=(const SymTensor& o);
    SymTensor& operator-=(const SymTensor& o);
    SymTensor& operator*=(double c);
    void set_zero();

private:
    std::shared_ptr<const TensorBasis> basis_;
    std::vector<double> coeffs_;
};

SymTensor operator+(SymTensor a, const SymTensor& b);
SymTensor operator-(SymTensor a, const SymTensor& b);
SymTensor operator*(SymTensor a, double c);

// (x^{(x)k})_alpha = x^alpha.
SymTensor tensor_power(std::span<const double> x, int k);

// In-place acc += scale * x^{(x)k} using a caller-provided power table of
// size (k+1) * d. No allocation; the hot path of the surrogate estimators.
void add_tensor_power(SymTensor& acc, std::span<const double> x, double scale,
                      std::span<double> pow_table);

// Degree-2 embedding of a symmetric matrix: coefficient M_ii at alpha_i = 2,
// M_ij at alpha_i = alpha_j = 1. Rejects asymmetric input (1e-12 tolerance).
SymTensor sym_embed(const Eigen::MatrixXd& m);

// sym_embed of the identity.
SymTensor identity_tensor(int d);

// <a, b> = sum_{|alpha|=k} (k!/alpha!) a_alpha b_alpha.
double hs_inner(const SymTensor& a, const SymTensor& b);
double hs_norm_sq(const SymTensor& a);
double hs_norm(const SymTensor& a);

}  // namespace steinw
