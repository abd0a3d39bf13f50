#include "stentsim/material.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stentsim/error.hpp"

namespace stentsim {

void validate(const MaterialParams& p) {
    std::string bad;
    if (!(p.E_A > 0.0) || !(p.E_M > 0.0)) bad += " moduli must be > 0;";
    if (!(p.sig_LE > p.sig_LS && p.sig_LS > p.sig_US && p.sig_US > p.sig_UE && p.sig_UE > 0.0))
        bad += " require sig_LE > sig_LS > sig_US > sig_UE > 0;";
    if (!(p.eps_L > 0.0)) bad += " eps_L must be > 0;";
    if (!(p.sig_CLS >= p.sig_LS)) bad += " sig_CLS must be >= sig_LS;";
    if (!bad.empty()) throw ValidationError("invalid material parameters:" + bad);
}

TransformationStresses transformation_stresses(const MaterialParams& p, double T, Sense sense) {
    if (!(T >= 0.0 && T <= 100.0))
        throw ValidationError("temperature must lie in [0, 100] degC");
    const double dT = T - p.T0;
    TransformationStresses t{p.sig_LS + p.dsig_dT_L * dT, p.sig_LE + p.dsig_dT_L * dT,
                             p.sig_US + p.dsig_dT_U * dT, p.sig_UE + p.dsig_dT_U * dT};
    if (sense == Sense::compression) {
        const double shift = p.sig_CLS - p.sig_LS;
        t.start += shift;
        t.end += shift;
        t.reverse_start += shift;
        t.reverse_end += shift;
    }
    return t;
}

SuperelasticLaw::SuperelasticLaw(const MaterialParams& p, double T)
    : p_(p),
      tension_(transformation_stresses(p, T, Sense::tension)),
      compression_(transformation_stresses(p, T, Sense::compression)),
      c0_(1.0 / p.E_A),
      c1_(1.0 / p.E_M - 1.0 / p.E_A) {
    validate(p);
}

double SuperelasticLaw::max_modulus() const { return std::max(p_.E_A, p_.E_M); }

double SuperelasticLaw::solve_plateau(double sig0, double dsig, double e) const {
    const double a = dsig * c1_;
    const double b = sig0 * c1_ + dsig * c0_ + p_.eps_L;
    const double c = sig0 * c0_ - e;
    const double disc = std::max(b * b - 4.0 * a * c, 0.0);
    return -2.0 * c / (b + std::sqrt(disc));
}

FiberState SuperelasticLaw::update(const FiberState& st, double eps) const {
    if (!std::isfinite(eps) || !std::isfinite(st.xi) || !std::isfinite(st.eps_tr))
        throw ComputationError("non-finite fiber strain or state");
    if (std::abs(eps) >= 0.5) throw ComputationError("fiber strain outside |eps| < 0.5");

    double xi = st.xi;
    int sense = st.eps_tr > 0.0 ? 1 : (st.eps_tr < 0.0 ? -1 : 0);
    if (xi <= 0.0) {
        xi = 0.0;
        sense = 0;
    }

    // At most: reverse to austenite, then forward in the opposite sense.
    for (int pass = 0; pass < 3; ++pass) {
        if (sense == 0) {
            const double sig = p_.E_A * eps;
            if (sig > tension_.start) {
                sense = 1;
            } else if (-sig > compression_.start) {
                sense = -1;
            } else {
                return {eps, sig, 0.0, 0.0};
            }
        }
        const TransformationStresses& band = sense > 0 ? tension_ : compression_;
        const double e = sense * eps;
        const double trial = modulus(xi) * (e - xi * p_.eps_L);
        const double fwd_width = band.end - band.start;
        const double rev_width = band.reverse_start - band.reverse_end;

        if (xi < 1.0 && trial > band.start + fwd_width * xi) {
            const double x = solve_plateau(band.start, fwd_width, e);
            if (x >= 1.0) {
                return {eps, sense * p_.E_M * (e - p_.eps_L), 1.0, sense * p_.eps_L};
            }
            xi = std::max(x, xi);
            return {eps, sense * (band.start + fwd_width * xi), xi, sense * xi * p_.eps_L};
        }
        if (xi > 0.0 && trial < band.reverse_end + rev_width * xi) {
            const double x = solve_plateau(band.reverse_end, rev_width, e);
            if (x <= 0.0) {
                xi = 0.0;
                sense = 0;
                continue;
            }
            xi = std::min(x, xi);
            return {eps, sense * (band.reverse_end + rev_width * xi), xi, sense * xi * p_.eps_L};
        }
        return {eps, sense * trial, xi, sense * xi * p_.eps_L};
    }
    return {eps, p_.E_A * eps, 0.0, 0.0};
}

double SuperelasticLaw::tangent(const FiberState& st) const {
    if (st.xi > 0.0 && st.xi < 1.0) {
        const auto& band = st.eps_tr >= 0.0 ? tension_ : compression_;
        const double mag = std::abs(st.stress);
        const double fwd = band.start + (band.end - band.start) * st.xi;
        const double rev = band.reverse_end + (band.reverse_start - band.reverse_end) * st.xi;
        const double tol = 1e-9 * std::max(1.0, mag);
        if (std::abs(mag - fwd) <= tol) return (band.end - band.start) / p_.eps_L;
        if (std::abs(mag - rev) <= tol) return (band.reverse_start - band.reverse_end) / p_.eps_L;
    }
    return modulus(std::clamp(st.xi, 0.0, 1.0));
}

FiberState fiber_update(const FiberState& state, double strain_new, const MaterialParams& p,
                        double T) {
    return SuperelasticLaw(p, T).update(state, strain_new);
}

double fiber_tangent(const FiberState& state, const MaterialParams& p, double T) {
    return SuperelasticLaw(p, T).tangent(state);
}

} // namespace stentsim
