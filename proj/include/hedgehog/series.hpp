#pragma once

#include <stdexcept>
#include <vector>

#include "hedgehog/model.hpp"

namespace hedgehog {

/// Power-series expansion of the profile about the origin,
/// h(r) = sum_k coeffs[k] r^k, determined by the core amplitude a2.
/// Odd coefficients vanish identically; a4 = -a2/14 independent of t.
struct SeriesExpansion {
    double a2 = 0.0;
    double t = 0.0;
    std::vector<double> coeffs;  ///< coeffs[k] multiplies r^k, k = 0..order

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// State produced by evaluating the truncated series at the launch radius.
struct LaunchState {
    double r0 = 0.0;
    double h = 0.0;
    double dh = 0.0;
    double truncation_estimate = 0.0;  ///< magnitude of the first omitted term
    bool truncation_warn = false;      ///< estimate exceeded 1e-12 * h(r0)
};

/// Compute series coefficients through the requested order.
///
/// The interior equation forces, for every even m >= 2,
///   a_{m+2} * m * (m+5) = [r^m] ( -h + (1 + 3 h_plus/t) h^3 - (3 h_plus/t) h^2 ),
/// where the right side is expanded by power-series convolution. Odd slots
/// stay zero because they start zero and the recurrence preserves parity.
/// a2 = 0 yields the trivial (identically zero) expansion.
inline SeriesExpansion series_coefficients(double a2, double t, int order) {
    if (order < 4 || order % 2 != 0)
        throw std::invalid_argument("series order must be an even integer >= 4");
    if (!(a2 >= 0.0))
        throw std::invalid_argument("core amplitude a2 must be nonnegative");
    // entry points validate t; the relaxed floor keeps the t = 1 boundary probe usable
    const ModelParams m = derive_model_params(t, true);
    const double cub = 1.0 + 3.0 * m.h_plus / t;
    const double quad = -3.0 * m.h_plus / t;

    const int n = order + 1;
    std::vector<double> a(n, 0.0), a_sq(n, 0.0), a_cu(n, 0.0);
    a[2] = a2;
    // a_sq = a*a and a_cu = a*a*a as truncated series, maintained incrementally.
    auto refresh_products = [&](int upto) {
        for (int k = 0; k <= upto; ++k) {
            double s2 = 0.0;
            for (int i = 0; i <= k; ++i) s2 += a[i] * a[k - i];
            a_sq[k] = s2;
            double s3 = 0.0;
            for (int i = 0; i <= k; ++i) s3 += a[i] * a_sq[k - i];
            a_cu[k] = s3;
        }
    };
    for (int mdeg = 2; mdeg + 2 <= order; mdeg += 2) {
        refresh_products(mdeg);
        const double rhs = -a[mdeg] + cub * a_cu[mdeg] + quad * a_sq[mdeg];
        a[mdeg + 2] = rhs / (static_cast<double>(mdeg) * (mdeg + 5));
    }

    SeriesExpansion s;
    s.a2 = a2;
    s.t = t;
    s.coeffs = std::move(a);
    return s;
}

/// Evaluate the truncated series and its derivative at the launch radius r0.
/// The first omitted term is estimated by extending the recurrence two
/// orders past the stored truncation.
inline LaunchState launch_state(const SeriesExpansion& s, double r0) {
    if (!(r0 > 0.0))
        throw std::invalid_argument("launch radius must be positive");
    LaunchState out;
    out.r0 = r0;
    double h = 0.0, dh = 0.0;
    // Horner from the top power.
    for (int k = s.order(); k >= 0; --k) {
        dh = dh * r0 + h;
        h = h * r0 + s.coeffs[k];
    }
    out.h = h;
    out.dh = dh;

    if (s.a2 > 0.0) {
        const SeriesExpansion ext = series_coefficients(s.a2, s.t, s.order() + 2);
        const double next = ext.coeffs.back();
        out.truncation_estimate = std::abs(next * std::pow(r0, s.order() + 2));
        out.truncation_warn = out.truncation_estimate > 1e-12 * std::abs(out.h);
    }
    return out;
}

/// Taylor coefficients of the local ODE solution about an interior point
/// r_i > 0 passing through (h, dh). Writing h(r_i + s) = sum_k c_k s^k,
/// the interior equation
///   (r_i + s)^2 h'' + 2 (r_i + s) h' - 6 h = (r_i + s)^2 f'(h)
/// is matched order by order; the s^k balance determines c_{k+2} from the
/// lower coefficients since its factor (k+2)(k+1) r_i^2 never vanishes.
/// Order 8 over a span of a few grid cells is accurate to round-off, which
/// makes the result suitable as a smooth local surrogate for the solution
/// (e.g. for finite-difference probes that need noise-free samples).
inline std::vector<double> local_taylor(double r_i, double h, double dh,
                                        const ModelParams& m, int order = 8) {
    if (!(r_i > 0.0))
        throw std::invalid_argument("local expansion point must be positive");
    const double cub = 1.0 + 3.0 * m.h_plus / m.t;
    const double quad = -3.0 * m.h_plus / m.t;
    const double r2 = r_i * r_i;

    const int n = order + 1;
    std::vector<double> c(n, 0.0), c_sq(n, 0.0), c_cu(n, 0.0), g(n, 0.0);
    c[0] = h;
    c[1] = dh;
    for (int k = 0; k + 2 <= order; ++k) {
        // degree-k products and g_k = [s^k] f'(h(s)) need c_0..c_k only
        double s2 = 0.0;
        for (int i = 0; i <= k; ++i) s2 += c[i] * c[k - i];
        c_sq[k] = s2;
        double s3 = 0.0;
        for (int i = 0; i <= k; ++i) s3 += c[i] * c_sq[k - i];
        c_cu[k] = s3;
        g[k] = -c[k] + quad * s2 + cub * s3;
        const double rhs_k = r2 * g[k] + (k >= 1 ? 2.0 * r_i * g[k - 1] : 0.0) +
                             (k >= 2 ? g[k - 2] : 0.0);
        const double known = 2.0 * r_i * (k + 1) * k * c[k + 1] +
                             static_cast<double>(k) * (k - 1) * c[k] +
                             2.0 * r_i * (k + 1) * c[k + 1] + 2.0 * k * c[k] -
                             6.0 * c[k];
        c[k + 2] = (rhs_k - known) / (r2 * (k + 2) * (k + 1));
    }
    return c;
}

/// Evaluate a polynomial sum c_k s^k and its derivative at offset s.
inline std::pair<double, double> eval_taylor(const std::vector<double>& c, double s) {
    double h = 0.0, dh = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
        dh = dh * s + h;
        h = h * s + c[k];
    }
    return {h, dh};
}

}  // namespace hedgehog
