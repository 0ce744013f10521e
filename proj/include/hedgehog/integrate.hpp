#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "hedgehog/model.hpp"
#include "hedgehog/series.hpp"

namespace hedgehog {

/// Two-component state (h, dh) of the first-order system.
using State = std::array<double, 2>;

/// Built-in early-termination events for profile trajectories.
struct EventSet {
    bool on_negative = false;     ///< h crosses 0 downward
    bool on_exceed_one = false;   ///< h crosses 1 + exceed_margin upward
    bool on_stationary = false;   ///< dh crosses 0 downward
    bool on_cross_one = false;    ///< h crosses 1 upward (finite-ball target)
    double exceed_margin = 1e-9;  ///< the exact profile touches 1 only asymptotically
};

enum class EventKind { none, negative, exceed_one, stationary, cross_one };

struct IntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double init_step = 1e-4;
    double max_step = 0.25;
    std::size_t max_steps = 4'000'000;
};

/// Result of one adaptive integration sweep.
struct Trajectory {
    std::vector<double> r;   ///< sample radii (the requested grid, or accepted steps)
    std::vector<double> h;
    std::vector<double> dh;
    EventKind event = EventKind::none;
    double event_r = 0.0;    ///< radius where the event fired
    State event_state{0.0, 0.0};
    bool reached_end = false;
    bool step_underflow = false;
    double underflow_r = 0.0;
    std::size_t n_steps = 0;      ///< accepted steps
    std::size_t n_rejected = 0;
    double end_r = 0.0;
    State end_state{0.0, 0.0};
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // embedded 4th-order weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output quartic weights
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
};

/// Continuous extension over one accepted step; 5th-order accurate.
struct DenseSegment {
    double r0 = 0.0, hstep = 0.0;
    std::array<State, 5> rc{};  // rcont1..rcont5 per component

    State eval(double r) const {
        const double th = (r - r0) / hstep;
        const double th1 = 1.0 - th;
        State y;
        for (int i = 0; i < 2; ++i) {
            y[i] = rc[0][i] +
                   th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
        }
        return y;
    }
};

}  // namespace detail

/// Adaptive Dormand-Prince integration of the profile system from (r0, y0).
///
/// Dense output is emitted at the radii in out_grid (which must be sorted
/// and lie in (r0, r_end]); when out_grid is empty every accepted step is
/// recorded instead. Events are located on the dense interpolant by
/// bisection and terminate the sweep; they are reported as structured
/// outcomes, never as errors. Step-size underflow is flagged with the
/// offending radius.
inline Trajectory integrate_raw(const ModelParams& m, double r0, State y0, double r_end,
                                const IntegrateOptions& opt = {}, EventSet events = {},
                                const std::vector<double>& out_grid = {}) {
    using D = detail::Dopri5;
    Trajectory out;
    const bool record_steps = out_grid.empty();
    std::size_t grid_pos = 0;

    auto rhs = [&m](double r, const State& y) -> State {
        auto [dh, d2h] = ode_rhs(r, y[0], y[1], m);
        return {dh, d2h};
    };

    double r = r0;
    State y = y0;
    State k1 = rhs(r, y);
    double hstep = std::min(opt.init_step, r_end - r0);
    const double hmin_floor = 16.0 * std::numeric_limits<double>::epsilon();

    auto emit = [&out](double rr, const State& yy) {
        out.r.push_back(rr);
        out.h.push_back(yy[0]);
        out.dh.push_back(yy[1]);
    };
    if (record_steps) emit(r, y);

    // event functions on the dense interpolant: value, required crossing sign
    struct Ev {
        EventKind kind;
        int direction;  // +1 upward crossing, -1 downward
        std::function<double(const State&)> fn;
    };
    std::vector<Ev> evs;
    if (events.on_negative)
        evs.push_back({EventKind::negative, -1, [](const State& s) { return s[0]; }});
    if (events.on_exceed_one)
        evs.push_back({EventKind::exceed_one, +1, [margin = events.exceed_margin](const State& s) {
                           return s[0] - (1.0 + margin);
                       }});
    if (events.on_cross_one)
        evs.push_back({EventKind::cross_one, +1, [](const State& s) { return s[0] - 1.0; }});
    if (events.on_stationary)
        evs.push_back({EventKind::stationary, -1, [](const State& s) { return s[1]; }});

    while (r_end - r > hmin_floor * std::max(1.0, std::abs(r_end))) {
        if (out.n_steps + out.n_rejected >= opt.max_steps) {
            out.step_underflow = true;  // budget exhausted; report the stall point
            out.underflow_r = r;
            break;
        }
        hstep = std::min({hstep, opt.max_step, r_end - r});
        if (hstep < hmin_floor * std::max(1.0, std::abs(r))) {
            out.step_underflow = true;
            out.underflow_r = r;
            break;
        }

        const State k2 = rhs(r + D::c2 * hstep, {y[0] + hstep * D::a21 * k1[0],
                                                 y[1] + hstep * D::a21 * k1[1]});
        const State k3 = rhs(r + D::c3 * hstep,
                             {y[0] + hstep * (D::a31 * k1[0] + D::a32 * k2[0]),
                              y[1] + hstep * (D::a31 * k1[1] + D::a32 * k2[1])});
        const State k4 = rhs(r + D::c4 * hstep,
                             {y[0] + hstep * (D::a41 * k1[0] + D::a42 * k2[0] + D::a43 * k3[0]),
                              y[1] + hstep * (D::a41 * k1[1] + D::a42 * k2[1] + D::a43 * k3[1])});
        const State k5 = rhs(r + D::c5 * hstep,
                             {y[0] + hstep * (D::a51 * k1[0] + D::a52 * k2[0] + D::a53 * k3[0] +
                                              D::a54 * k4[0]),
                              y[1] + hstep * (D::a51 * k1[1] + D::a52 * k2[1] + D::a53 * k3[1] +
                                              D::a54 * k4[1])});
        const State k6 = rhs(r + hstep,
                             {y[0] + hstep * (D::a61 * k1[0] + D::a62 * k2[0] + D::a63 * k3[0] +
                                              D::a64 * k4[0] + D::a65 * k5[0]),
                              y[1] + hstep * (D::a61 * k1[1] + D::a62 * k2[1] + D::a63 * k3[1] +
                                              D::a64 * k4[1] + D::a65 * k5[1])});
        State ynew;
        for (int i = 0; i < 2; ++i)
            ynew[i] = y[i] + hstep * (D::a71 * k1[i] + D::a73 * k3[i] + D::a74 * k4[i] +
                                      D::a75 * k5[i] + D::a76 * k6[i]);
        const State k7 = rhs(r + hstep, ynew);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double ei = hstep * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] +
                                       D::e5 * k5[i] + D::e6 * k6[i] + D::e7 * k7[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(0.5 * err);

        if (!std::isfinite(err) || err > 1.0) {
            ++out.n_rejected;
            hstep *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
            continue;
        }

        // accepted: build the dense segment for event location / grid output
        detail::DenseSegment seg;
        seg.r0 = r;
        seg.hstep = hstep;
        for (int i = 0; i < 2; ++i) {
            const double dy = ynew[i] - y[i];
            const double bspl = hstep * k1[i] - dy;
            seg.rc[0][i] = y[i];
            seg.rc[1][i] = dy;
            seg.rc[2][i] = bspl;
            seg.rc[3][i] = dy - hstep * k7[i] - bspl;
            seg.rc[4][i] = hstep * (D::d1 * k1[i] + D::d3 * k3[i] + D::d4 * k4[i] +
                                    D::d5 * k5[i] + D::d6 * k6[i] + D::d7 * k7[i]);
        }

        // events: detect a sign change over the step, bisect on the interpolant
        double stop_r = std::numeric_limits<double>::infinity();
        EventKind stop_kind = EventKind::none;
        for (const auto& ev : evs) {
            const double f0 = ev.fn(y);
            const double f1 = ev.fn(ynew);
            const bool crossed = (ev.direction > 0) ? (f0 < 0.0 && f1 >= 0.0)
                                                    : (f0 > 0.0 && f1 <= 0.0);
            if (!crossed) continue;
            double lo = r, hi = r + hstep;
            for (int it = 0; it < 80 && (hi - lo) > hmin_floor * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = ev.fn(seg.eval(mid));
                const bool before = (ev.direction > 0) ? (fm < 0.0) : (fm > 0.0);
                (before ? lo : hi) = mid;
            }
            if (hi < stop_r) {
                stop_r = hi;
                stop_kind = ev.kind;
            }
        }

        const double r_next = r + hstep;
        const double r_limit = (stop_kind != EventKind::none) ? stop_r : r_next;
        if (!record_steps) {
            while (grid_pos < out_grid.size() && out_grid[grid_pos] <= r_limit + 1e-14) {
                const double rg = out_grid[grid_pos];
                if (rg > r - 1e-14) emit(rg, seg.eval(std::min(rg, r_next)));
                ++grid_pos;
            }
        }

        ++out.n_steps;
        if (stop_kind != EventKind::none) {
            out.event = stop_kind;
            out.event_r = stop_r;
            out.event_state = seg.eval(stop_r);
            out.end_r = stop_r;
            out.end_state = out.event_state;
            if (record_steps) emit(stop_r, out.event_state);
            return out;
        }

        r = r_next;
        y = ynew;
        k1 = k7;  // FSAL
        if (record_steps) emit(r, y);
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        hstep *= fac;
    }

    out.reached_end =
        !out.step_underflow &&
        (r_end - r <= hmin_floor * std::max(1.0, std::abs(r_end)));
    out.end_r = r;
    out.end_state = y;
    return out;
}

/// Integrate from the origin series launch at r0 = 1e-3 (order 6) to r_end.
/// tol sets the relative tolerance; the absolute tolerance rides two decades
/// below it. Dense output at out_grid radii; events per EventSet.
inline Trajectory integrate(double a2, const ModelParams& m, double r_end, double tol = 1e-10,
                            const std::vector<double>& out_grid = {}, EventSet events = {},
                            double r0 = 1e-3, int series_order = 6) {
    if (!(a2 >= 0.0)) throw std::invalid_argument("a2 must be nonnegative");
    if (!(r_end > r0)) throw std::invalid_argument("r_end must exceed the launch radius");
    IntegrateOptions opt;
    opt.rel_tol = tol;
    opt.abs_tol = tol * 1e-2;
    const SeriesExpansion s = series_coefficients(a2, m.t, series_order);
    const LaunchState ls = launch_state(s, r0);
    return integrate_raw(m, r0, {ls.h, ls.dh}, r_end, opt, events, out_grid);
}

}  // namespace hedgehog
