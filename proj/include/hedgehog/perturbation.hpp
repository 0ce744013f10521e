#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hedgehog/analysis.hpp"
#include "hedgehog/model.hpp"
#include "hedgehog/profile.hpp"
#include "hedgehog/quadrature.hpp"

namespace hedgehog {

/// Radial amplitude of a biaxial perturbation supported on [0, sigma].
/// When dp is provided it is used as the analytic derivative; otherwise
/// p' falls back to central differences.
struct BiaxialPerturbation {
    std::function<double(double)> p;
    std::function<double(double)> dp;  ///< optional analytic derivative
    double sigma = 0.0;
    std::string description;
};

enum class AmplitudeFamily { rational, bump, cosine };

inline AmplitudeFamily parse_family(const std::string& s) {
    if (s == "rational" || s == "paper") return AmplitudeFamily::rational;
    if (s == "bump") return AmplitudeFamily::bump;
    if (s == "cosine") return AmplitudeFamily::cosine;
    throw std::invalid_argument("unknown amplitude family '" + s +
                                "' (built-ins: rational, bump, cosine)");
}

inline const char* to_string(AmplitudeFamily f) {
    switch (f) {
        case AmplitudeFamily::rational: return "rational";
        case AmplitudeFamily::bump: return "bump";
        default: return "cosine";
    }
}

/// Built-in amplitude shapes, all vanishing at r = sigma:
///   rational: (1 - r/sigma) / (r^2 + 12)^2
///   bump:     (1 - r/sigma) r^2
///   cosine:   (1 + cos(pi r / sigma)) / 2
inline BiaxialPerturbation make_biaxial(AmplitudeFamily f, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("make_biaxial: sigma must be positive");
    BiaxialPerturbation b;
    b.sigma = sigma;
    b.description = to_string(f);
    switch (f) {
        case AmplitudeFamily::rational:
            b.p = [sigma](double r) {
                const double d = r * r + 12.0;
                return (1.0 - r / sigma) / (d * d);
            };
            b.dp = [sigma](double r) {
                const double d = r * r + 12.0;
                return -1.0 / (sigma * d * d) - 4.0 * r * (1.0 - r / sigma) / (d * d * d);
            };
            break;
        case AmplitudeFamily::bump:
            b.p = [sigma](double r) { return (1.0 - r / sigma) * r * r; };
            b.dp = [sigma](double r) { return 2.0 * r - 3.0 * r * r / sigma; };
            break;
        case AmplitudeFamily::cosine: {
            const double pi = std::acos(-1.0);
            b.p = [sigma, pi](double r) { return 0.5 * (1.0 + std::cos(pi * r / sigma)); };
            b.dp = [sigma, pi](double r) { return -0.5 * pi / sigma * std::sin(pi * r / sigma); };
            break;
        }
    }
    return b;
}

/// Energy change along a biaxial perturbation family: exact form with the
/// solved profile, bound form with the upper envelope substituted in the
/// quadratic profile-coupling term, and the quadratic (second-variation)
/// part alone.
struct PerturbationReport {
    double delta_I_exact = 0.0;
    double delta_I_bound = 0.0;
    double quadratic_part = 0.0;
    double quadrature_error = 0.0;  ///< two-resolution estimate for delta_I_exact
    std::string verdict;             ///< "unstable" | "stable-along-family"
};

namespace detail {

inline std::function<double(double)> derivative_of(const BiaxialPerturbation& b) {
    if (b.dp) return b.dp;
    const auto p = b.p;
    return [p](double r) {
        const double step = 1e-6;
        return (p(r + step) - p(r - step)) / (2.0 * step);
    };
}

}  // namespace detail

/// Integrand pieces of the biaxial energy difference on [0, sigma]:
///   (r^2/3) p'^2 - (r^2/3) p^2 - (2 sqrt6 h_plus/(9t)) r^2 p^3
///   + (r^2 h_plus^2/(2t)) ((4/9) p^4 + (28/15) hstar^2 p^2)
/// with hstar either the solved profile (exact) or the upper envelope
/// r^2/(r^2 + t lambda_t^2) (bound form).
inline PerturbationReport biaxial_delta(const BiaxialPerturbation& pert, const Profile& prof,
                                        const ModelParams& m, int n_panels = 4096) {
    if (pert.sigma > prof.grid.back() * (1.0 + 1e-12))
        throw std::invalid_argument("biaxial_delta: support radius exceeds the profile domain");
    const auto dp = detail::derivative_of(pert);
    const double c3 = 2.0 * std::sqrt(6.0) * m.h_plus / (9.0 * m.t);
    const double c4 = m.h_plus * m.h_plus / (2.0 * m.t);

    auto integrand = [&](double r, bool use_envelope) {
        const double pv = pert.p(r);
        const double pd = dp(r);
        const double hs = use_envelope ? upper_envelope(r, m) : profile_sample(prof, m, r).first;
        const double r2 = r * r;
        return r2 / 3.0 * pd * pd - r2 / 3.0 * pv * pv - c3 * r2 * pv * pv * pv +
               c4 * r2 * (4.0 / 9.0 * pv * pv * pv * pv +
                          28.0 / 15.0 * hs * hs * pv * pv);
    };
    auto quad_integrand = [&](double r) {
        const double pv = pert.p(r);
        const double pd = dp(r);
        const double hs = profile_sample(prof, m, r).first;
        const double r2 = r * r;
        return r2 / 3.0 * pd * pd - r2 / 3.0 * pv * pv +
               14.0 / 15.0 * (m.h_plus * m.h_plus / m.t) * r2 * hs * hs * pv * pv;
    };

    PerturbationReport rep;
    const QuadResult exact = simpson_with_error(
        [&](double r) { return integrand(r, false); }, 0.0, pert.sigma, n_panels);
    rep.delta_I_exact = exact.value;
    rep.quadrature_error = exact.error;
    rep.delta_I_bound =
        simpson([&](double r) { return integrand(r, true); }, 0.0, pert.sigma, 2 * n_panels);
    rep.quadratic_part =
        simpson(quad_integrand, 0.0, pert.sigma, 2 * n_panels);
    rep.verdict = rep.delta_I_exact < 0.0 ? "unstable" : "stable-along-family";
    return rep;
}

/// Quadratic part alone: negative value certifies linear instability along
/// the family direction.
inline double second_variation_biaxial(const BiaxialPerturbation& pert, const Profile& prof,
                                       const ModelParams& m, int n_panels = 4096) {
    if (pert.sigma > prof.grid.back() * (1.0 + 1e-12))
        throw std::invalid_argument(
            "second_variation_biaxial: support radius exceeds the profile domain");
    const auto dp = detail::derivative_of(pert);
    auto quad_integrand = [&](double r) {
        const double pv = pert.p(r);
        const double pd = dp(r);
        const double hs = profile_sample(prof, m, r).first;
        const double r2 = r * r;
        return r2 / 3.0 * pd * pd - r2 / 3.0 * pv * pv +
               14.0 / 15.0 * (m.h_plus * m.h_plus / m.t) * r2 * hs * hs * pv * pv;
    };
    return simpson(quad_integrand, 0.0, pert.sigma, n_panels);
}

/// Tensor directions with closed-form angular reduction of the second
/// variation. Addressed by name so that unrecognized directions fail loudly.
enum class TensorDirection { z_axis, radial };

inline TensorDirection parse_direction(const std::string& s) {
    if (s == "z" || s == "z-axis" || s == "uniaxial-z") return TensorDirection::z_axis;
    if (s == "r" || s == "radial") return TensorDirection::radial;
    throw std::invalid_argument("unsupported tensor direction '" + s +
                                "' (built-ins: z, radial)");
}

/// Axisymmetric perturbation on the rescaled unit ball: radial amplitude
/// q(rh) for rh in [0, 1] times a fixed trace-free tensor direction.
struct AxisymmetricPerturbation {
    TensorDirection direction = TensorDirection::z_axis;
    std::function<double(double)> q;
    std::function<double(double)> dq;  ///< optional analytic derivative
    std::string description;
};

/// Second variation of the energy on the ball of radius R, reduced to a 1D
/// quadrature over the rescaled coordinate rh = r/R. Per unit solid angle:
///   z-direction:  (2/3) rh^2 q'^2 - (2/3) R^2 rh^2 q^2
///                 + (28/15)(h_plus^2 R^2/t) rh^2 hstar^2 q^2
///   radial:       (2/3) rh^2 q'^2 + 4 q^2 - (2/3) R^2 rh^2 q^2
///                 - (4 h_plus R^2/t) rh^2 hstar q^2
///                 + (4 h_plus^2 R^2/t) rh^2 hstar^2 q^2
/// with hstar = h(R rh) sampled from the supplied profile. The amplitude
/// must vanish at the outer boundary.
inline double second_variation_general(const AxisymmetricPerturbation& pert,
                                       const Profile& prof, const ModelParams& m, double R,
                                       int n_panels = 4096) {
    if (!(R > 0.0) || R > prof.grid.back() * (1.0 + 1e-12))
        throw std::invalid_argument("second_variation_general: R outside the profile domain");
    if (std::abs(pert.q(1.0)) > 1e-9)
        throw std::invalid_argument(
            "second_variation_general: amplitude must vanish at the outer boundary");
    std::function<double(double)> dq = pert.dq;
    if (!dq) {
        const auto q = pert.q;
        dq = [q](double x) {
            const double step = 1e-7;
            const double lo = std::max(0.0, x - step), hi = std::min(1.0, x + step);
            return (q(hi) - q(lo)) / (hi - lo);
        };
    }
    const double R2 = R * R;
    const double hp_t = m.h_plus / m.t;
    auto integrand = [&](double rh) {
        const double qv = pert.q(rh);
        const double qd = dq(rh);
        const double rh2 = rh * rh;
        const double hs = profile_sample(prof, m, std::min(R * rh, prof.grid.back())).first;
        if (pert.direction == TensorDirection::z_axis) {
            return 2.0 / 3.0 * rh2 * qd * qd - 2.0 / 3.0 * R2 * rh2 * qv * qv +
                   28.0 / 15.0 * m.h_plus * hp_t * R2 * rh2 * hs * hs * qv * qv;
        }
        return 2.0 / 3.0 * rh2 * qd * qd + 4.0 * qv * qv - 2.0 / 3.0 * R2 * rh2 * qv * qv -
               4.0 * hp_t * R2 * rh2 * hs * qv * qv +
               4.0 * m.h_plus * hp_t * R2 * rh2 * hs * hs * qv * qv;
    };
    return simpson(integrand, 0.0, 1.0, n_panels);
}

/// Built-in ball amplitudes: the biaxial families rescaled to [0, 1].
inline AxisymmetricPerturbation make_ball_perturbation(TensorDirection dir, AmplitudeFamily f) {
    const BiaxialPerturbation b = make_biaxial(f, 1.0);
    AxisymmetricPerturbation a;
    a.direction = dir;
    a.q = b.p;
    a.dq = b.dp;
    a.description = b.description;
    return a;
}

/// Far-field window amplitude: zero on [0, a], then sin^2(pi (rh-a)/(1-a))
/// up to the boundary, C^1 across the cutoff and vanishing at rh = 1.
inline AxisymmetricPerturbation make_farfield_perturbation(TensorDirection dir, double inner_cut,
                                                           double R) {
    if (!(inner_cut > 0.0) || !(inner_cut < R))
        throw std::invalid_argument("make_farfield_perturbation: need 0 < inner_cut < R");
    const double a = inner_cut / R;
    const double pi = std::acos(-1.0);
    AxisymmetricPerturbation pert;
    pert.direction = dir;
    pert.description = "farfield-window";
    pert.q = [a, pi](double rh) {
        if (rh <= a) return 0.0;
        const double s = std::sin(pi * (rh - a) / (1.0 - a));
        return s * s;
    };
    pert.dq = [a, pi](double rh) {
        if (rh <= a) return 0.0;
        const double w = pi / (1.0 - a);
        return 2.0 * std::sin(w * (rh - a)) * std::cos(w * (rh - a)) * w;
    };
    return pert;
}

/// Closed-form small-ball stability threshold.
struct StabilityVerdict {
    double R_threshold = 0.0;       ///< dimensionless critical radius
    double R_threshold_real = 0.0;  ///< physical radius, 0 when no geometry supplied
    bool stable = false;            ///< R_query < R_threshold (false when no query given)
};

inline StabilityVerdict stability_threshold(const ModelParams& m,
                                            std::optional<double> R_query = std::nullopt,
                                            std::optional<ReducedGeometry> geom = std::nullopt) {
    StabilityVerdict v;
    const double denom = 1.0 + 4.0 * std::sqrt(6.0) * m.h_plus / m.t;
    v.R_threshold = std::sqrt(0.25 / denom);
    if (geom) v.R_threshold_real = geom->xi / (2.0 * std::sqrt(m.t)) / std::sqrt(denom);
    if (R_query)
        v.stable = *R_query < v.R_threshold;
    else if (geom)
        v.stable = geom->R_tilde < v.R_threshold;
    return v;
}

/// One cell of the (t, R) stability sweep.
struct MapCell {
    double t = 0.0;
    double R = 0.0;
    bool below_threshold = false;
    double delta_exact = 0.0;
    double delta_bound = 0.0;
    int delta_sign = 0;
    std::string status;  ///< provably-stable-by-threshold | unstable-witnessed | indeterminate | solver-failure: ...
};

/// Sweep the closed-form threshold and the rational-family energy test over
/// a (t, R) grid. One semi-infinite solve per t value serves every R in its
/// row (the energy test only samples the profile on [0, sigma]); per-cell
/// failures are recorded in the cell and the sweep continues. Rows are
/// independent, so workers > 1 distributes them over threads; the output
/// order is (t, R) row-major regardless of scheduling.
inline std::vector<MapCell> stability_map(const std::vector<double>& t_grid,
                                          const std::vector<double>& R_grid,
                                          int n_panels = 2048, int workers = 1) {
    if (t_grid.empty() || R_grid.empty())
        throw std::invalid_argument("stability_map: grids must be non-empty");

    auto compute_row = [&](double t) {
        std::vector<MapCell> row;
        row.reserve(R_grid.size());
        ModelParams m;
        Profile prof;
        bool row_ok = true;
        std::string row_err;
        try {
            m = derive_model_params(t);
            prof = solve_semi_infinite(m);
        } catch (const std::exception& e) {
            row_ok = false;
            row_err = e.what();
        }
        const StabilityVerdict sv = row_ok ? stability_threshold(m) : StabilityVerdict{};
        for (double R : R_grid) {
            MapCell cell;
            cell.t = t;
            cell.R = R;
            if (!row_ok) {
                cell.status = "solver-failure: " + row_err;
                row.push_back(cell);
                continue;
            }
            try {
                cell.below_threshold = R < sv.R_threshold;
                const double sigma = std::min(10.0, 0.5 * R);
                const BiaxialPerturbation b = make_biaxial(AmplitudeFamily::rational, sigma);
                const PerturbationReport rep = biaxial_delta(b, prof, m, n_panels);
                cell.delta_exact = rep.delta_I_exact;
                cell.delta_bound = rep.delta_I_bound;
                cell.delta_sign = rep.delta_I_exact < 0.0 ? -1 : 1;
                if (cell.below_threshold)
                    cell.status = "provably-stable-by-threshold";
                else if (cell.delta_sign < 0)
                    cell.status = "unstable-witnessed";
                else
                    cell.status = "indeterminate";
            } catch (const std::exception& e) {
                cell.status = std::string("solver-failure: ") + e.what();
            }
            row.push_back(cell);
        }
        return row;
    };

    std::vector<std::vector<MapCell>> rows(t_grid.size());
    if (workers <= 1 || t_grid.size() == 1) {
        for (std::size_t i = 0; i < t_grid.size(); ++i) rows[i] = compute_row(t_grid[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= t_grid.size()) return;
                rows[i] = compute_row(t_grid[i]);
            }
        };
        const int n_threads =
            std::min<int>(workers, static_cast<int>(t_grid.size()));
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    std::vector<MapCell> cells;
    cells.reserve(t_grid.size() * R_grid.size());
    for (std::vector<MapCell>& row : rows)
        for (MapCell& c : row) cells.push_back(std::move(c));
    return cells;
}

}  // namespace hedgehog
