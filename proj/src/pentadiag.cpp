#include "lmd/pentadiag.hpp"

#include <cmath>

#include "lmd/errors.hpp"

namespace lmd {

Pentadiag penta_from_tridiag_square(const Tridiag& t, double alpha, double beta) {
    const int n = static_cast<int>(t.diag.size());
    Pentadiag p(n);
    auto sub = [&](int i) { return t.sub[i]; };  // T(i+1, i)
    auto sup = [&](int i) { return t.sup[i]; };  // T(i, i+1)
    for (int i = 0; i < n; ++i) {
        double d = t.diag[i] * t.diag[i];
        if (i > 0) d += sup(i - 1) * sub(i - 1);
        if (i + 1 < n) d += sup(i) * sub(i);
        p.diag[i] = alpha + beta * d;
        if (i + 1 < n) {
            p.sup1[i] = beta * sup(i) * (t.diag[i] + t.diag[i + 1]);
            p.sub1[i] = beta * sub(i) * (t.diag[i] + t.diag[i + 1]);
        }
        if (i + 2 < n) {
            p.sup2[i] = beta * sup(i) * sup(i + 1);
            p.sub2[i] = beta * sub(i) * sub(i + 1);
        }
    }
    return p;
}

PentaFactor::PentaFactor(const Pentadiag& p)
    : dw_(p.diag), aw_(p.sup1), bw_(p.sup2) {
    const int n = p.size();
    std::vector<double> cw = p.sub1, ew = p.sub2;
    m1_.assign(n > 1 ? n - 1 : 0, 0.0);
    m2_.assign(n > 2 ? n - 2 : 0, 0.0);
    for (int i = 0; i < n; ++i) {
        const double piv = dw_[i];
        if (piv == 0.0 || !std::isfinite(piv))
            throw NumericError("pentadiag: zero pivot at row " + std::to_string(i));
        if (i + 1 < n) {
            const double f = cw[i] / piv;
            m1_[i] = f;
            dw_[i + 1] -= f * aw_[i];
            if (i + 2 < n) aw_[i + 1] -= f * bw_[i];
        }
        if (i + 2 < n) {
            const double f = ew[i] / piv;
            m2_[i] = f;
            cw[i + 1] -= f * aw_[i];
            dw_[i + 2] -= f * bw_[i];
        }
    }
}

void PentaFactor::solve(std::vector<double>& rhs) const {
    const int n = size();
    for (int i = 0; i < n; ++i) {
        if (i + 1 < n) rhs[i + 1] -= m1_[i] * rhs[i];
        if (i + 2 < n) rhs[i + 2] -= m2_[i] * rhs[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double x = rhs[i];
        if (i + 1 < n) x -= aw_[i] * rhs[i + 1];
        if (i + 2 < n) x -= bw_[i] * rhs[i + 2];
        rhs[i] = x / dw_[i];
    }
}

void solve_pentadiag(const Pentadiag& p, std::vector<double>& rhs) {
    PentaFactor(p).solve(rhs);
}

} // namespace lmd
