#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hedgehog {

/// Physical material constants and droplet size, SI units.
/// a2 is the thermotropic coefficient after evaluating the temperature
/// offset (N/m^2), b2 the cubic coefficient (N/m^2), c2 the quartic
/// coefficient (N/m^2), L the elastic constant (N), R_real the droplet
/// radius (m). All must be positive.
struct PhysicalParams {
    double a2;
    double b2;
    double c2;
    double L;
    double R_real;
};

/// Dimensionless model constants derived from the reduced temperature t.
///
/// All closed forms follow from the quartic bulk potential:
///   h_plus        = (3 + sqrt(9 + 8t))/4, the bulk minimum amplitude
///   lambda_t_sq   = 24/(9 + 8t + 3 sqrt(9 + 8t)), core length-scale constant
///   C_t           = 1/2 + h_plus/t - h_plus^2/(2t), offset making f(1) = 0
///   farfield_coeff= 6/(2 + 3 h_plus/t), leading coefficient of r^2 (1 - h)
/// Identities: 2 h_plus^2 - 3 h_plus = t and farfield_coeff = t lambda_t_sq.
struct ModelParams {
    double t;
    double h_plus;
    double lambda_t_sq;
    double C_t;
    double farfield_coeff;
};

/// Correlation length and rescaled radii produced by nondimensionalization.
struct ReducedGeometry {
    double xi;       ///< correlation length sqrt(27 c2 L / b2^2), meters
    double R_bar;    ///< R_real / xi
    double R_tilde;  ///< sqrt(t) * R_bar, the radius used by the reduced model
};

inline void validate_physical(const PhysicalParams& p) {
    if (!(p.a2 > 0 && p.b2 > 0 && p.c2 > 0 && p.L > 0 && p.R_real > 0))
        throw std::domain_error("physical parameters must all be positive");
}

/// Derive the dimensionless constants for reduced temperature t.
///
/// The model is valid for t > 1 (past the supercooling point); t = 1 is a
/// boundary probe permitted only with relaxed = true.
inline ModelParams derive_model_params(double t, bool relaxed = false) {
    const double floor_t = relaxed ? 1.0 : std::nextafter(1.0, 2.0);
    if (!(t >= floor_t) || !std::isfinite(t)) {
        throw std::domain_error(
            "reduced temperature t = " + std::to_string(t) +
            " is outside the model's standing assumption t > 1"
            " (pass relaxed validation to probe t = 1)");
    }
    ModelParams m;
    m.t = t;
    const double s = std::sqrt(9.0 + 8.0 * t);
    m.h_plus = (3.0 + s) / 4.0;
    m.lambda_t_sq = 24.0 / (9.0 + 8.0 * t + 3.0 * s);
    m.C_t = 0.5 + m.h_plus / t - m.h_plus * m.h_plus / (2.0 * t);
    m.farfield_coeff = 6.0 / (2.0 + 3.0 * m.h_plus / t);
    return m;
}

/// Map physical constants to the reduced temperature and rescaled geometry.
/// t = 27 a2 c2 / b2^2; the droplet radius is measured in units of the
/// correlation length xi and then stretched by sqrt(t).
inline std::pair<double, ReducedGeometry> nondimensionalize(const PhysicalParams& p) {
    validate_physical(p);
    const double t = 27.0 * p.a2 * p.c2 / (p.b2 * p.b2);
    if (!(t > 1.0)) {
        throw std::domain_error(
            "computed reduced temperature t = " + std::to_string(t) +
            " does not satisfy the standing assumption t > 1");
    }
    ReducedGeometry g;
    g.xi = std::sqrt(27.0 * p.c2 * p.L / (p.b2 * p.b2));
    g.R_bar = p.R_real / g.xi;
    g.R_tilde = std::sqrt(t) * g.R_bar;
    return {t, g};
}

/// Bulk potential f(h) = -h^2/2 - (h_plus/t) h^3 + (h_plus^2/(2t)) h^4 + C_t.
/// Nonnegative on [0, 1], vanishing exactly at h = 1.
inline double bulk_potential(double h, const ModelParams& m) {
    const double h2 = h * h;
    return -0.5 * h2 - (m.h_plus / m.t) * h2 * h +
           (m.h_plus * m.h_plus / (2.0 * m.t)) * h2 * h2 + m.C_t;
}

/// df/dh. Vanishes at h = 0 and h = 1.
inline double bulk_potential_deriv(double h, const ModelParams& m) {
    return -h - (3.0 * m.h_plus / m.t) * h * h +
           (2.0 * m.h_plus * m.h_plus / m.t) * h * h * h;
}

/// d2f/dh2. At h = 1 equals 2 + 3 h_plus/t, the square of the far-field
/// relaxation rate.
inline double bulk_potential_deriv2(double h, const ModelParams& m) {
    return -1.0 - (6.0 * m.h_plus / m.t) * h +
           (6.0 * m.h_plus * m.h_plus / m.t) * h * h;
}

/// Right-hand side of the radial profile equation,
///   h'' = -(2/r) h' + 6 h / r^2 - h + h^3 + (3 h_plus/t)(h^3 - h^2).
/// Returns (dh, d2h). The origin is a singular point; callers must start
/// from the series launcher, so r = 0 is rejected.
inline std::pair<double, double> ode_rhs(double r, double h, double dh,
                                         const ModelParams& m) {
    if (!(r > 0.0))
        throw std::domain_error("ode_rhs: r must be positive; launch from the origin series");
    const double h2 = h * h;
    const double h3 = h2 * h;
    const double d2h = -2.0 / r * dh + 6.0 * h / (r * r) - h + h3 +
                       (3.0 * m.h_plus / m.t) * (h3 - h2);
    return {dh, d2h};
}

}  // namespace hedgehog
