#include "doctest.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "stentsim/error.hpp"
#include "stentsim/material.hpp"

using namespace stentsim;

namespace {

std::vector<FiberState> drive(const std::vector<double>& strains, const MaterialParams& p, double T = 37.0) {
    std::vector<FiberState> out;
    FiberState s;
    for (double e : strains) {
        s = fiber_update(s, e, p, T);
        out.push_back(s);
    }
    return out;
}

std::vector<double> ramp(double from, double to, double step) {
    std::vector<double> v;
    const int n = static_cast<int>(std::round(std::abs(to - from) / step));
    for (int i = 1; i <= n; ++i) v.push_back(from + (to - from) * i / n);
    return v;
}

// Closed-form flag loop of the default parameters, evaluated by bisection on
// the branch strain eps(xi) = sig(xi) / E(xi) + xi * eps_L.
double branch_stress(double eps, bool loading) {
    const double EA = 24000, EM = 35000, eL = 0.04;
    const double s0 = loading ? 250.0 : 20.0, s1 = loading ? 270.0 : 40.0;
    auto strain_at = [&](double xi) {
        const double sig = s0 + (s1 - s0) * xi;
        return sig * ((1 - xi) / EA + xi / EM) + xi * eL;
    };
    if (eps <= strain_at(0.0)) return EA * eps;
    if (eps >= strain_at(1.0)) return EM * (eps - eL);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (strain_at(mid) < eps ? lo : hi) = mid;
    }
    return s0 + (s1 - s0) * 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("transformation stresses") {
    const MaterialParams p;
    const auto t = transformation_stresses(p, 37.0, Sense::tension);
    CHECK(t.start == 250.0);
    CHECK(t.end == 270.0);
    CHECK(t.reverse_start == 40.0);
    CHECK(t.reverse_end == 20.0);
    CHECK(transformation_stresses(p, 37.0, Sense::compression).start == 900.0);
    CHECK(transformation_stresses(p, 47.0, Sense::tension).start == doctest::Approx(315.27).epsilon(1e-12));
    const auto c = transformation_stresses(p, 37.0, Sense::compression);
    CHECK(c.end - c.start == doctest::Approx(20.0));
    CHECK(c.reverse_start - c.reverse_end == doctest::Approx(20.0));
    CHECK_THROWS_AS(transformation_stresses(p, 120.0, Sense::tension), ValidationError);
}

TEST_CASE("virgin fiber at zero strain") {
    const auto s = fiber_update({}, 0.0, MaterialParams{}, 37.0);
    CHECK(s.stress == 0.0);
    CHECK(s.xi == 0.0);
}

TEST_CASE("loading ramp: elastic, plateau, martensite") {
    const MaterialParams p;
    const auto states = drive(ramp(0.0, 0.06, 1e-5), p);
    // elastic austenite
    CHECK(states[99].stress == doctest::Approx(24000 * 0.001));
    double onset = -1, completion = -1;
    for (std::size_t i = 1; i < states.size(); ++i) {
        if (onset < 0 && states[i].xi > 0) onset = states[i - 1].stress;
        if (completion < 0 && states[i].xi >= 1.0) completion = states[i].stress;
    }
    CHECK(std::abs(onset - 250.0) < 0.5);
    CHECK(std::abs(completion - 270.0) < 0.5);
    const auto& last = states.back();
    CHECK(last.xi == 1.0);
    CHECK(last.stress == doctest::Approx(35000 * (0.06 - 0.04)));
    const auto& prev = states[states.size() - 2];
    CHECK((last.stress - prev.stress) / (last.strain - prev.strain) == doctest::Approx(35000));
}

TEST_CASE("full loop matches the closed-form flag and recovers") {
    const MaterialParams p;
    auto path = ramp(0.0, 0.06, 2e-5);
    const auto down = ramp(0.06, 0.0, 2e-5);
    const std::size_t turn = path.size();
    path.insert(path.end(), down.begin(), down.end());
    const auto states = drive(path, p);
    double max_err = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i)
        max_err = std::max(max_err, std::abs(states[i].stress - branch_stress(states[i].strain, i < turn)));
    CHECK(max_err < 1e-8);

    CHECK(std::abs(states.back().stress) < 1e-8);
    CHECK(states.back().xi == 0.0);
    // strain at which stress returns to zero on unloading
    CHECK(std::abs(states.back().stress / p.E_A) < 1e-8);

    double enter = -1, exit = -1;
    for (std::size_t i = turn; i < states.size(); ++i) {
        if (enter < 0 && states[i].xi < 1.0) enter = states[i - 1].stress;
        if (exit < 0 && states[i].xi == 0.0) exit = states[i].stress;
    }
    CHECK(std::abs(enter - 40.0) < 1.0); // one step is 0.7 MPa on martensite
    CHECK(std::abs(exit - 20.0) < 0.5);
}

TEST_CASE("tangent") {
    const MaterialParams p;
    CHECK(fiber_tangent({}, p, 37.0) == 24000.0);
    const auto mart = fiber_update({}, 0.07, p, 37.0);
    CHECK(mart.xi == 1.0);
    CHECK(fiber_tangent(mart, p, 37.0) == doctest::Approx(35000.0));
    const auto plateau = drive(ramp(0.0, 0.02, 1e-4), p).back();
    REQUIRE(plateau.xi > 0.0);
    REQUIRE(plateau.xi < 1.0);
    CHECK(fiber_tangent(plateau, p, 37.0) == doctest::Approx(500.0));
    // partially transformed but unloading elastically: mixture modulus
    const auto inner = fiber_update(plateau, 0.015, p, 37.0);
    CHECK(inner.xi == plateau.xi);
    const double Emix = 1.0 / ((1 - inner.xi) / p.E_A + inner.xi / p.E_M);
    CHECK(fiber_tangent(inner, p, 37.0) == doctest::Approx(Emix));
}

TEST_CASE("internal loop holds xi until the band is re-entered") {
    const MaterialParams p;
    FiberState s = drive(ramp(0.0, 0.025, 1e-4), p).back();
    const double xi0 = s.xi;
    REQUIRE(xi0 > 0.2);
    REQUIRE(xi0 < 0.8);
    // unload part way: elastic, xi frozen
    for (double e : ramp(0.025, 0.018, 1e-4)) {
        s = fiber_update(s, e, p, 37.0);
        CHECK(s.xi == xi0);
    }
    // reload back: still elastic until the forward line at xi0
    for (double e : ramp(0.018, 0.0249, 1e-4)) {
        s = fiber_update(s, e, p, 37.0);
        CHECK(s.xi == xi0);
    }
    s = fiber_update(s, 0.027, p, 37.0);
    CHECK(s.xi > xi0);
    CHECK(s.stress == doctest::Approx(250 + 20 * s.xi));
}

TEST_CASE("compression uses the compressive start stress") {
    const MaterialParams p;
    const auto states = drive(ramp(0.0, -0.09, 1e-5), p);
    double onset = 0;
    for (std::size_t i = 1; i < states.size(); ++i)
        if (states[i].xi > 0) {
            onset = states[i - 1].stress;
            break;
        }
    CHECK(std::abs(onset + 900.0) < 0.5);
    CHECK(states.back().eps_tr == doctest::Approx(-0.04));
}

TEST_CASE("errors on non-finite input") {
    const MaterialParams p;
    CHECK_THROWS_AS(fiber_update({}, std::numeric_limits<double>::quiet_NaN(), p, 37.0), ComputationError);
    CHECK_THROWS_AS(fiber_update({}, 0.6, p, 37.0), ComputationError);
}

// ---- properties -------------------------------------------------------------

TEST_CASE("property: hysteresis dissipates energy on closed cycles") {
    const MaterialParams p;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> peak(0.05, 0.09);
    for (int trial = 0; trial < 20; ++trial) {
        const double top = peak(rng);
        auto path = ramp(0.0, top, 1e-5);
        const auto down = ramp(top, 0.0, 1e-5);
        path.insert(path.end(), down.begin(), down.end());
        const auto states = drive(path, p);
        double work = 0.0, prev_e = 0.0, prev_s = 0.0;
        for (const auto& s : states) {
            work += 0.5 * (s.stress + prev_s) * (s.strain - prev_e);
            prev_e = s.strain;
            prev_s = s.stress;
        }
        CHECK(work > 0.0);
    }
}

TEST_CASE("property: determinism, bounds, monotone xi, continuity") {
    const MaterialParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> target(-0.08, 0.08);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> path;
        double e = 0.0;
        for (int leg = 0; leg < 6; ++leg) {
            const double t = target(rng);
            const auto r = ramp(e, t, 1e-5);
            path.insert(path.end(), r.begin(), r.end());
            e = t;
        }
        const auto a = drive(path, p);
        const auto b = drive(path, p);
        double prev_strain = 0.0, prev_stress = 0.0, prev_xi = 0.0, prev_dir = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::memcmp(&a[i], &b[i], sizeof(FiberState)) == 0);
            CHECK(a[i].xi >= 0.0);
            CHECK(a[i].xi <= 1.0);
            CHECK(std::abs(a[i].eps_tr) <= a[i].xi * p.eps_L + 1e-12);
            const double de = a[i].strain - prev_strain;
            CHECK(std::abs(a[i].stress - prev_stress) <= std::max(p.E_A, p.E_M) * std::abs(de) * (1 + 1e-6));
            // loading in the transformation sense never reduces xi
            const double dir = (de > 0) - (de < 0);
            const double sense = (a[i].eps_tr > 0) - (a[i].eps_tr < 0);
            if (dir == prev_dir && sense != 0 && dir == sense) CHECK(a[i].xi >= prev_xi);
            prev_strain = a[i].strain;
            prev_stress = a[i].stress;
            prev_xi = a[i].xi;
            prev_dir = dir;
        }
    }
}

TEST_CASE("property: symmetric parameters give an odd response") {
    MaterialParams p;
    p.sig_CLS = p.sig_LS;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> target(-0.07, 0.07);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> path;
        double e = 0.0;
        for (int leg = 0; leg < 5; ++leg) {
            const double t = target(rng);
            const auto r = ramp(e, t, 2e-5);
            path.insert(path.end(), r.begin(), r.end());
            e = t;
        }
        std::vector<double> neg(path.size());
        for (std::size_t i = 0; i < path.size(); ++i) neg[i] = -path[i];
        const auto a = drive(path, p);
        const auto b = drive(neg, p);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].stress == doctest::Approx(-b[i].stress).epsilon(1e-12));
    }
}
