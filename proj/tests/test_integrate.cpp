#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hedgehog/integrate.hpp"
#include "hedgehog/model.hpp"

using namespace hedgehog;

TEST_CASE("tolerance controls the endpoint error", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    const double a2 = 0.1;
    const Trajectory ref = integrate(a2, m, 5.0, 1e-13);
    REQUIRE(ref.reached_end);
    auto err = [&](double tol) {
        const Trajectory tr = integrate(a2, m, 5.0, tol);
        REQUIRE(tr.reached_end);
        return std::abs(tr.end_state[0] - ref.end_state[0]);
    };
    const double e5 = err(1e-5);
    const double e8 = err(1e-8);
    const double e11 = err(1e-11);
    REQUIRE(e8 < e5);
    REQUIRE(e11 < e8 + 1e-13);
    REQUIRE(e8 < 1e-6);
    REQUIRE(e11 < 1e-9);
}

TEST_CASE("step counts respond to the tolerance", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    const Trajectory loose = integrate(0.1, m, 5.0, 1e-5);
    const Trajectory tight = integrate(0.1, m, 5.0, 1e-12);
    REQUIRE(tight.n_steps > loose.n_steps);
    REQUIRE(loose.n_steps > 0);
}

TEST_CASE("dense output hits the requested grid", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    const std::vector<double> grid{0.5, 1.0, 1.7, 2.3, 4.0, 5.0};
    const Trajectory tr = integrate(0.1, m, 5.0, 1e-10, grid);
    REQUIRE(tr.r == grid);
    // dense samples agree with dedicated runs terminated at each radius
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Trajectory direct = integrate(0.1, m, grid[i], 1e-13);
        REQUIRE(tr.h[i] == Catch::Approx(direct.end_state[0]).margin(1e-9));
        REQUIRE(tr.dh[i] == Catch::Approx(direct.end_state[1]).margin(1e-8));
    }
}

TEST_CASE("free-running mode records accepted steps", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    const Trajectory tr = integrate(0.1, m, 3.0, 1e-10);
    REQUIRE(tr.r.size() == tr.h.size());
    REQUIRE(tr.r.size() == tr.dh.size());
    REQUIRE(tr.r.size() >= 2);
    REQUIRE(tr.r.front() == 1e-3);
    REQUIRE(tr.r.back() == Catch::Approx(3.0).margin(1e-12));
    for (std::size_t i = 1; i < tr.r.size(); ++i) REQUIRE(tr.r[i] > tr.r[i - 1]);
}

TEST_CASE("overshoot event terminates a hot trajectory", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    EventSet ev;
    ev.on_exceed_one = true;
    const Trajectory tr = integrate(0.5, m, 50.0, 1e-10, {}, ev);
    REQUIRE(tr.event == EventKind::exceed_one);
    REQUIRE(tr.event_r < 50.0);
    REQUIRE(tr.event_state[0] == Catch::Approx(1.0 + ev.exceed_margin).margin(1e-9));
    // the crossing radius is stable under a tighter tolerance
    const Trajectory tr2 = integrate(0.5, m, 50.0, 1e-13, {}, ev);
    REQUIRE(tr.event_r == Catch::Approx(tr2.event_r).margin(1e-7));
}

TEST_CASE("stationary event catches a cold trajectory turning back", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    EventSet ev;
    ev.on_stationary = true;
    const Trajectory tr = integrate(0.01, m, 50.0, 1e-10, {}, ev);
    REQUIRE(tr.event == EventKind::stationary);
    REQUIRE(std::abs(tr.event_state[1]) < 1e-10);
    REQUIRE(tr.event_state[0] < 1.0);
    REQUIRE(tr.event_r > 0.0);
}

TEST_CASE("negative crossing event", "[integrate]") {
    // a cold shot turns around and dives; h crosses zero on the way down
    const ModelParams m = derive_model_params(200.0);
    EventSet ev;
    ev.on_negative = true;
    const Trajectory tr = integrate(0.01, m, 80.0, 1e-10, {}, ev);
    REQUIRE(tr.event == EventKind::negative);
    REQUIRE(std::abs(tr.event_state[0]) < 1e-9);
}

TEST_CASE("step budget exhaustion is reported, not thrown", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    IntegrateOptions opt;
    opt.max_steps = 10;
    const SeriesExpansion s = series_coefficients(0.1, 200.0, 6);
    const LaunchState ls = launch_state(s, 1e-3);
    const Trajectory tr = integrate_raw(m, 1e-3, {ls.h, ls.dh}, 50.0, opt);
    REQUIRE(tr.step_underflow);
    REQUIRE_FALSE(tr.reached_end);
    REQUIRE(tr.underflow_r < 50.0);
}

TEST_CASE("integration input validation", "[integrate]") {
    const ModelParams m = derive_model_params(200.0);
    REQUIRE_THROWS_AS(integrate(-0.1, m, 5.0), std::invalid_argument);
    REQUIRE_THROWS_AS(integrate(0.1, m, 1e-4), std::invalid_argument);
}
