#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "hedgehog/integrate.hpp"
#include "hedgehog/model.hpp"
#include "hedgehog/profile.hpp"

using namespace hedgehog;

namespace {

const Profile& solved(double t, double r_max = 50.0) {
    static std::map<std::pair<double, double>, Profile> cache;
    const auto key = std::make_pair(t, r_max);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, solve_semi_infinite(derive_model_params(t), r_max)).first;
    return it->second;
}

// first maximum of the regular solution of the zero-amplitude limit,
// located by dense-sampling the closed special-function form
double bessel_peak() {
    double best_x = 2.0, best_v = -1.0;
    for (double x = 2.0; x <= 5.0; x += 1e-4) {
        const double v = 15.0 * std::sph_bessel(2, x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return best_x;
}

}  // namespace

TEST_CASE("trichotomy of shots at t = 200", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const ShotOutcome cold = classify_shot(0.02, m, 50.0);
    REQUIRE(cold.cls == ShotClass::P);
    REQUIRE(cold.h_end < 1.0);
    REQUIRE(cold.witness_r.has_value());

    const ShotOutcome hot = classify_shot(0.5, m, 50.0);
    REQUIRE(hot.cls == ShotClass::R);
    REQUIRE(hot.witness_r.has_value());
    REQUIRE(hot.h_end >= 1.0);

    // the connecting amplitude splits P from R at negligible width
    const double a2 = solved(200.0).a2;
    REQUIRE(classify_shot(a2 * (1.0 - 1e-5), m, 50.0).cls == ShotClass::P);
    REQUIRE(classify_shot(a2 * (1.0 + 1e-5), m, 50.0).cls == ShotClass::R);
}

TEST_CASE("bounded and inconclusive shots near the connecting orbit", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const double a2 = solved(200.0).a2;
    // at r_max = 20 the orbit has climbed to ~0.993: class Q (monotone, below 1)
    const ShotOutcome q = classify_shot(a2, m, 20.0);
    REQUIRE(q.cls == ShotClass::Q);
    // truncating at r_max = 5 leaves h around 0.64, short of the Q margin
    const ShotOutcome inc = classify_shot(a2, m, 5.0);
    REQUIRE(inc.cls == ShotClass::inconclusive);
    REQUIRE_THROWS_AS(classify_shot(0.0, m, 50.0), std::invalid_argument);
    REQUIRE_THROWS_AS(classify_shot(-0.1, m, 50.0), std::invalid_argument);
}

TEST_CASE("connecting amplitudes across temperatures", "[shooting]") {
    // frozen reference values from an independent prototype of the same
    // construction, agreed to ~1e-9; the assertion leaves bisection headroom
    const std::vector<std::pair<double, double>> ref{{5.0, 0.18094443247},
                                                     {50.0, 0.13911975530},
                                                     {200.0, 0.13237588739},
                                                     {1000.0, 0.12904712991}};
    for (auto [t, a2_ref] : ref)
        REQUIRE(solved(t).a2 == Catch::Approx(a2_ref).epsilon(1e-8));
}

TEST_CASE("core amplitude sits inside the admissible interval", "[shooting]") {
    for (double t : {1.5, 2.0, 5.0, 20.0, 200.0, 1000.0}) {
        const ModelParams m = derive_model_params(t);
        const Profile p = solve_semi_infinite(m, 40.0);
        const double hi = 1.0 / (t * m.lambda_t_sq);
        REQUIRE(p.a2 >= 1.0 / 14.0 - 1e-12);
        REQUIRE(p.a2 <= hi + 1e-12);
    }
}

TEST_CASE("profile is monotone and pinned to [0, 1]", "[shooting]") {
    for (double t : {50.0, 200.0, 1000.0}) {
        const Profile& p = solved(t);
        for (std::size_t i = 1; i + 1 < p.grid.size(); ++i) {
            REQUIRE(p.dh[i] > 0.0);
            REQUIRE(p.h[i] > 0.0);
            REQUIRE(p.h[i] < 1.0 + 1e-9);
            REQUIRE(p.h[i] > p.h[i - 1]);
        }
        REQUIRE(p.h.front() == 0.0);
        REQUIRE(p.h.back() > 0.995);
    }
}

TEST_CASE("far-field matching metadata", "[shooting]") {
    for (double t : {50.0, 200.0}) {
        const SolverMeta& sm = solved(t).solver_meta;
        REQUIRE(sm.tail_mismatch < 2e-6);
        REQUIRE(sm.tail_start >= 8.0);
        REQUIRE(sm.tail_start <= 22.6);
        REQUIRE(sm.bracket_width <= 1e-12);
        REQUIRE(sm.bisection_iterations > 20);
    }
}

TEST_CASE("assembled profile is one smooth trajectory across the matching radius",
          "[shooting]") {
    // re-integrate the interior equation from a mid-domain grid state and
    // compare against the assembled profile beyond the handover point; a
    // grafting artifact would show up as a jump here
    const ModelParams m = derive_model_params(200.0);
    const Profile& p = solved(200.0);
    const double junction = p.solver_meta.tail_start;
    std::size_t i0 = 0;
    while (i0 + 1 < p.grid.size() && p.grid[i0 + 1] <= junction - 3.0) ++i0;

    IntegrateOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    std::vector<double> probes;
    for (double dr = -2.0; dr <= 1.5 + 1e-9; dr += 0.5) probes.push_back(junction + dr);
    const Trajectory tr =
        integrate_raw(m, p.grid[i0], {p.h[i0], p.dh[i0]}, probes.back(), opt, {}, probes);
    REQUIRE(tr.reached_end);
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const auto [hs, dhs] = profile_sample(p, m, probes[k]);
        REQUIRE(tr.h[k] == Catch::Approx(hs).margin(1e-5));
        REQUIRE(tr.dh[k] == Catch::Approx(dhs).margin(1e-5));
    }
}

TEST_CASE("derivative decay in the far field", "[shooting]") {
    const Profile& p = solved(200.0);
    const ModelParams m = derive_model_params(200.0);
    const double two_c = 2.0 * m.farfield_coeff;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        if (p.grid[i] < 10.0) continue;
        const double r3dh = std::pow(p.grid[i], 3) * p.dh[i];
        REQUIRE(r3dh <= two_c * 1.2);
        REQUIRE(r3dh >= two_c * 0.5);
    }
    const double r2dh_end = p.grid.back() * p.grid.back() * p.dh.back();
    REQUIRE(r2dh_end <= two_c / p.grid.back() * 1.2);
}

TEST_CASE("zero-amplitude limit reproduces the special-function peak", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const ShotOutcome s = classify_shot(1e-4, m, 50.0);
    REQUIRE(s.cls == ShotClass::P);
    REQUIRE(s.witness_r.has_value());
    const double peak = bessel_peak();
    REQUIRE(std::abs(*s.witness_r - peak) <= 0.02 * peak);
    REQUIRE(s.h_end < 0.01);
}

TEST_CASE("single transition in a logarithmic amplitude scan", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const int n = 60;
    int transitions = 0;
    ShotClass prev = ShotClass::inconclusive;
    for (int i = 0; i < n; ++i) {
        const double a2 = 0.02 * std::pow(1.0 / 0.02, static_cast<double>(i) / (n - 1));
        const ShotClass c = classify_shot(a2, m, 50.0).cls;
        REQUIRE((c == ShotClass::P || c == ShotClass::R));
        if (i > 0 && c != prev) {
            ++transitions;
            REQUIRE(prev == ShotClass::P);
            REQUIRE(c == ShotClass::R);
        }
        prev = c;
    }
    REQUIRE(transitions == 1);
}

TEST_CASE("finite ball at small radius", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const Profile p = solve_finite_ball(m, 0.3);
    REQUIRE(p.domain.kind == Domain::Kind::finite_ball);
    REQUIRE(p.grid.back() == 0.3);
    // the boundary value is met to round-off, and the solver reports the gap
    REQUIRE(p.h.back() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(p.h.back() - 1.0) <= p.solver_meta.boundary_residual + 1e-15);
    REQUIRE(p.a2 == Catch::Approx(11.169573).epsilon(1e-6));
    // interior stays strictly inside (0, 1) and rises monotonically
    for (std::size_t i = 1; i + 1 < p.grid.size(); ++i) {
        REQUIRE(p.h[i] > 0.0);
        REQUIRE(p.h[i] < 1.0);
        REQUIRE(p.dh[i] > 0.0);
    }
    const auto [h_mid, dh_mid] = profile_sample(p, m, 0.15);
    REQUIRE(h_mid > 0.0);
    REQUIRE(h_mid < 1.0);
    REQUIRE(dh_mid > 0.0);
}

TEST_CASE("large ball agrees with the semi-infinite solution", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const Profile ball = solve_finite_ball(m, 50.0);
    const Profile& half = solved(200.0);
    REQUIRE(ball.a2 == Catch::Approx(half.a2).epsilon(1e-9));
    REQUIRE(ball.h.back() == 1.0);
    // the boundary completion has the amplitude of the residual far-field gap
    const double expect_layer = 1.0 - farfield_tail(m).h(50.0);
    REQUIRE(ball.solver_meta.boundary_layer ==
            Catch::Approx(expect_layer).epsilon(1e-9));
    // interior agreement away from the R = 50 boundary layer
    for (double r : {1.0, 5.0, 15.0, 30.0}) {
        const auto [hb, db] = profile_sample(ball, m, r);
        const auto [hs, ds] = profile_sample(half, m, r);
        REQUIRE(hb == Catch::Approx(hs).margin(5e-6));
    }
}

TEST_CASE("far-field tail coefficients", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const FarFieldTail ff = farfield_tail(m);
    REQUIRE(ff.c == Catch::Approx(2.775630155275).epsilon(1e-11));
    REQUIRE(ff.d == Catch::Approx(6.7082).epsilon(1e-4));
    REQUIRE(ff.e == Catch::Approx(64.38).epsilon(1e-3));
    // the tail satisfies the equation asymptotically: plug into the interior
    // equation and check the defect falls off faster than the retained terms
    auto defect = [&](double r) {
        const double h = ff.h(r);
        const double d2h_fd =
            (ff.h(r + 1e-3) - 2.0 * h + ff.h(r - 1e-3)) / 1e-6;
        return std::abs(d2h_fd + 2.0 / r * ff.dh(r) - 6.0 * h / (r * r) -
                        bulk_potential_deriv(h, m));
    };
    REQUIRE(defect(30.0) < 1e-8);
    REQUIRE(defect(45.0) < 1e-9);
}

TEST_CASE("profile sampling is consistent with the stored grid", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    const Profile& p = solved(200.0);
    for (std::size_t i : {std::size_t(40), std::size_t(400), std::size_t(1400)}) {
        const auto [h, dh] = profile_sample(p, m, p.grid[i]);
        REQUIRE(h == Catch::Approx(p.h[i]).margin(1e-12));
        REQUIRE(dh == Catch::Approx(p.dh[i]).margin(1e-12));
    }
    // off-grid samples stay between the bracketing nodes (monotone profile),
    // up to round-off in the local reconstruction
    for (double r : {0.5137, 3.777, 24.9}) {
        const auto it = std::lower_bound(p.grid.begin(), p.grid.end(), r);
        const std::size_t k = static_cast<std::size_t>(it - p.grid.begin());
        const auto [h, dh] = profile_sample(p, m, r);
        REQUIRE(h >= p.h[k - 1] - 1e-9);
        REQUIRE(h <= p.h[k] + 1e-9);
    }
    // near-origin samples follow the quadratic core
    const auto [h0, dh0] = profile_sample(p, m, 5e-4);
    REQUIRE(h0 == Catch::Approx(p.a2 * 25e-8).epsilon(1e-5));
    REQUIRE_THROWS_AS(profile_sample(p, m, 50.0 + 1e-6), std::out_of_range);
}

TEST_CASE("solver input validation", "[shooting]") {
    const ModelParams m = derive_model_params(200.0);
    REQUIRE_THROWS_AS(solve_semi_infinite(m, 9.0), std::invalid_argument);
    REQUIRE_THROWS_AS(solve_finite_ball(m, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(solve_finite_ball(m, -2.0), std::invalid_argument);
}
