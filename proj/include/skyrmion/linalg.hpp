#pragma once

#include <span>
#include <vector>

namespace skyrmion {

// Symmetric tridiagonal matrix: diag[i], off[i] couples (i, i+1).
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;

    explicit SymTridiag(std::size_t n = 0) : diag(n, 0.0), off(n ? n - 1 : 0, 0.0) {}
    std::size_t size() const { return diag.size(); }
    std::vector<double> apply(std::span<const double> x) const;
    double form(std::span<const double> x) const; // x^T M x
};

// Number of negative eigenvalues of (m - shift diag(mass)) from the LDL^T pivots
// (Sylvester inertia). An exactly zero pivot is perturbed so the count stays defined.
std::size_t count_below(const SymTridiag& m, std::span<const double> mass, double shift);

// Gaussian elimination with partial pivoting (LAPACK gtsv scheme); works for indefinite systems.
// Throws NumericalError on an exactly singular pivot.
std::vector<double> solve_tridiagonal(const SymTridiag& m, std::span<const double> rhs);

// General band matrix with kl sub- and ku super-diagonals, LU-factorized in place with
// partial pivoting (LAPACK gbtf2 layout: kl extra rows hold the fill-in).
class BandMatrix {
  public:
    BandMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    std::size_t size() const { return n_; }
    double& at(std::size_t i, std::size_t j) { return ab_[kv_ + i - j + j * ld_]; }
    double at(std::size_t i, std::size_t j) const { return ab_[kv_ + i - j + j * ld_]; }

    // Returns false on an exactly zero pivot; the factorization is then unusable.
    bool factorize();
    std::vector<double> solve(std::span<const double> rhs) const;

  private:
    std::size_t n_, kl_, ku_, kv_, ld_;
    std::vector<double> ab_;
    std::vector<std::size_t> piv_;
    bool factored_ = false;
};

} // namespace skyrmion
