#pragma once

#include <vector>

namespace lmd {

// Symmetric tridiagonal operator in banded storage (used for the per-mode
// wall-normal part of the stabilization operator).
struct Tridiag {
    std::vector<double> sub;  // n-1
    std::vector<double> diag; // n
    std::vector<double> sup;  // n-1
};

// General pentadiagonal system in banded storage.
struct Pentadiag {
    std::vector<double> sub2; // n-2
    std::vector<double> sub1; // n-1
    std::vector<double> diag; // n
    std::vector<double> sup1; // n-1
    std::vector<double> sup2; // n-2

    explicit Pentadiag(int n)
        : sub2(n >= 2 ? n - 2 : 0), sub1(n >= 1 ? n - 1 : 0), diag(n),
          sup1(n >= 1 ? n - 1 : 0), sup2(n >= 2 ? n - 2 : 0) {}
    int size() const { return static_cast<int>(diag.size()); }
};

// P = alpha*I + beta*T^2 for tridiagonal T.
Pentadiag penta_from_tridiag_square(const Tridiag& t, double alpha, double beta);

// Solves P x = rhs in place (rhs becomes x). Gaussian elimination without
// pivoting; callers guarantee diagonal dominance (here eigenvalues of
// I + dt*S*T^2 are >= 1). Throws NumericError on a vanishing pivot.
void solve_pentadiag(const Pentadiag& p, std::vector<double>& rhs);

// Reusable LU factors for repeated solves against the same matrix (the
// per-mode systems are constant over a run).
class PentaFactor {
public:
    explicit PentaFactor(const Pentadiag& p);
    void solve(std::vector<double>& rhs) const;
    int size() const { return static_cast<int>(dw_.size()); }

private:
    std::vector<double> dw_, aw_, bw_, m1_, m2_;
};

} // namespace lmd
