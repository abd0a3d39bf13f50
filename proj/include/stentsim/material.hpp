#pragma once

namespace stentsim {

/// Superelastic nitinol parameters. Stresses and moduli in MPa, slopes in
/// MPa/degC, temperatures in degC. Defaults are the validated stent set.
struct MaterialParams {
    double E_A = 24000.0;
    double nu_A = 0.33;
    double E_M = 35000.0;
    double nu_M = 0.33;
    double eps_L = 0.04;
    double dsig_dT_L = 6.527;
    double sig_LS = 250.0;
    double sig_LE = 270.0;
    double T0 = 37.0;
    double dsig_dT_U = 6.527;
    double sig_US = 40.0;
    double sig_UE = 20.0;
    double sig_CLS = 900.0;
    double eps_VL = 0.04; // volumetric; no uniaxial meaning, kept for completeness
};

void validate(const MaterialParams& p);

enum class Sense { tension, compression };

/// Transformation stress magnitudes at one temperature.
struct TransformationStresses {
    double start = 0.0;
    double end = 0.0;
    double reverse_start = 0.0;
    double reverse_end = 0.0;
};

/// Linear Clausius-Clapeyron shift of the four transformation stresses.
/// Compression reuses the tensile loop shifted so that forward start is sig_CLS.
TransformationStresses transformation_stresses(const MaterialParams& p, double T, Sense sense);

/// Uniaxial fiber state. eps_tr carries the sign of the martensite variant.
struct FiberState {
    double strain = 0.0; // logarithmic
    double stress = 0.0; // MPa
    double xi = 0.0;     // martensite fraction
    double eps_tr = 0.0;
};

FiberState fiber_update(const FiberState& state, double strain_new, const MaterialParams& p,
                        double T);

/// Incremental stiffness for time-step estimates: mixture modulus off the
/// plateau, (end - start) / eps_L on it.
double fiber_tangent(const FiberState& state, const MaterialParams& p, double T);

/// Return-mapping law with all temperature-dependent constants resolved once.
/// This is what the solver calls in its inner loop.
class SuperelasticLaw {
public:
    SuperelasticLaw(const MaterialParams& p, double T);

    FiberState update(const FiberState& state, double strain_new) const;
    double tangent(const FiberState& state) const;
    double modulus(double xi) const { return 1.0 / (c0_ + c1_ * xi); }
    double max_modulus() const;

    const MaterialParams& params() const { return p_; }
    const TransformationStresses& band(Sense s) const {
        return s == Sense::tension ? tension_ : compression_;
    }

private:
    // Root in xi of (sig0 + dsig*xi) * C(xi) + eps_L*xi - e = 0, C = 1/E(xi).
    double solve_plateau(double sig0, double dsig, double e) const;

    MaterialParams p_;
    TransformationStresses tension_;
    TransformationStresses compression_;
    double c0_;
    double c1_;
};

} // namespace stentsim
