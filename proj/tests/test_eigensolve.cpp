#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "icecsim/eigensolve.hpp"
#include "icecsim/model.hpp"

#include <cmath>

using namespace icec;

TEST_CASE("harmonic oscillator energies") {
    const Grid1D grid = Grid1D::dirichlet(-20.0, 20.0, 4001);
    auto v = [](double z) { return 0.5 * z * z; };
    EigenSolution sol = solve_tise_1d(grid, v, 1.0, 5);
    for (int n = 0; n < 5; ++n)
        CHECK(sol.energies[n] == doctest::Approx(n + 0.5).epsilon(1e-6));
}

TEST_CASE("particle in a box") {
    const double L = 7.0;
    const Grid1D grid = Grid1D::dirichlet(0.0, L, 3501);
    auto v = [](double) { return 0.0; };
    EigenSolution sol = solve_tise_1d(grid, v, 1.0, 4);
    for (int n = 1; n <= 4; ++n) {
        const double exact = n * n * M_PI * M_PI / (2.0 * L * L);
        CHECK(sol.energies[n - 1] == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("He model ground state at the published charge") {
    // independent finite-difference reference (converged): -0.70341
    ModelParams p;
    p.q_He = 1.453;
    p.q_Ne = 1.307;
    const Grid1D grid = Grid1D::dirichlet(-60.0, 60.0, 4801);
    auto v = [&](double z) { return effective_potential(z, PairSpec::electron_He(p), p.l_c); };
    EigenSolution sol = solve_tise_1d(grid, v, 1.0, 1);
    CHECK(sol.energies[0] == doctest::Approx(-0.70341).epsilon(5e-4));
}

TEST_CASE("He model ground state at the calibrated charge hits the ionization energy") {
    ModelParams p; // defaults carry the calibrated charges
    const Grid1D grid = Grid1D::dirichlet(-60.0, 60.0, 4801);
    auto v = [&](double z) { return effective_potential(z, PairSpec::electron_He(p), p.l_c); };
    EigenSolution sol = solve_tise_1d(grid, v, 1.0, 1);
    CHECK(sol.energies[0] == doctest::Approx(-0.904).epsilon(2e-3));
}

TEST_CASE("orthonormality under the consistent-mass quadrature") {
    const Grid1D grid = Grid1D::dirichlet(-15.0, 15.0, 901);
    auto v = [](double z) { return 0.5 * z * z; };
    EigenSolution sol = solve_tise_1d(grid, v, 1.0, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j <= i; ++j) {
            const double ip = sol.mass_inner(sol.states.col(i), sol.states.col(j));
            CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
        }
}

TEST_CASE("residual norms meet the tolerance") {
    const Grid1D grid = Grid1D::dirichlet(-15.0, 15.0, 901);
    auto v = [](double z) { return 0.5 * z * z; };
    TiseOptions opt;
    opt.tol = 1e-9;
    EigenSolution sol = solve_tise_1d(grid, v, 1.0, 6, opt);
    CHECK(sol.n_converged == 6);
    for (double r : sol.residual_norms) CHECK(r <= 1e-9);
}

TEST_CASE("node counts of single-well eigenstates") {
    const Grid1D grid = Grid1D::dirichlet(-18.0, 18.0, 1201);
    auto osc = [](double z) { return 0.5 * z * z; };
    EigenSolution sol = solve_tise_1d(grid, osc, 1.0, 6);
    for (int n = 0; n < 6; ++n) CHECK(count_nodes(sol.states.col(n)) == n);

    ModelParams p;
    const Grid1D grid2 = Grid1D::dirichlet(-60.0, 60.0, 2401);
    auto hel = [&](double z) { return effective_potential(z, PairSpec::electron_He(p), p.l_c); };
    EigenSolution sol2 = solve_tise_1d(grid2, hel, 1.0, 2);
    CHECK(count_nodes(sol2.states.col(0)) == 0);
    CHECK(count_nodes(sol2.states.col(1)) == 1);
}

TEST_CASE("variational monotonicity under uniform refinement") {
    auto osc = [](double z) { return 0.5 * z * z; };
    ModelParams p;
    auto hel = [&](double z) { return effective_potential(z, PairSpec::electron_He(p), p.l_c); };
    auto box = [](double) { return 0.0; };

    struct Case {
        std::function<double(double)> v;
        double lo, hi;
    };
    const Case cases[] = {{osc, -16.0, 16.0}, {hel, -50.0, 50.0}, {box, 0.0, 5.0}};
    for (const auto& c : cases) {
        std::vector<double> prev;
        for (int n : {201, 401, 801, 1601}) {
            EigenSolution sol = solve_tise_1d(Grid1D::dirichlet(c.lo, c.hi, n), c.v, 1.0, 4);
            if (!prev.empty())
                for (int k = 0; k < 4; ++k) CHECK(sol.energies[k] <= prev[k] + 1e-10);
            prev = sol.energies;
        }
    }
}

TEST_CASE("refine_until: history decreases monotonically toward the oscillator energy") {
    auto osc = [](double z) { return 0.5 * z * z; };
    RefineResult rr = refine_until(-16.0, 16.0, osc, 1.0, 1, 1e-8, 129);
    CHECK(rr.history.size() >= 2);
    for (size_t i = 1; i < rr.history.size(); ++i)
        CHECK(rr.history[i].ground_energy <= rr.history[i - 1].ground_energy + 1e-12);
    CHECK(rr.solution.energies[0] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("refine_until: observed convergence order is at least 2 (box)") {
    auto box = [](double) { return 0.0; };
    RefineResult rr = refine_until(0.0, 5.0, box, 1.0, 1, 1e-10, 65);
    const double exact = M_PI * M_PI / (2.0 * 25.0);
    // Richardson fit of the error against the spacing
    REQUIRE(rr.history.size() >= 3);
    std::vector<double> orders;
    for (size_t i = 1; i + 1 < rr.history.size(); ++i) {
        const double e0 = rr.history[i - 1].ground_energy - exact;
        const double e1 = rr.history[i].ground_energy - exact;
        if (e1 > 1e-13) orders.push_back(std::log2(e0 / e1));
    }
    REQUIRE(!orders.empty());
    for (double o : orders) CHECK(o >= 1.9);
}

TEST_CASE("refine_until: already-converged problem returns after one refinement") {
    auto osc = [](double z) { return 0.5 * z * z; };
    RefineResult rr = refine_until(-16.0, 16.0, osc, 1.0, 1, 1e-2, 513);
    CHECK(rr.history.size() == 2);
}

TEST_CASE("refine_until: cap reached raises with history") {
    auto osc = [](double z) { return 0.5 * z * z; };
    CHECK_THROWS_AS(refine_until(-16.0, 16.0, osc, 1.0, 1, 1e-15, 129, 1025), EigensolveError);
}

TEST_CASE("shift-invert Lanczos path agrees with the dense path") {
    const Grid1D grid = Grid1D::dirichlet(-20.0, 20.0, 2401); // above dense threshold
    auto v = [](double z) { return 0.5 * z * z; };
    EigenSolution lan = solve_tise_1d(grid, v, 1.0, 6);
    TiseOptions dense;
    dense.force_dense = true;
    EigenSolution den = solve_tise_1d(grid, v, 1.0, 6, dense);
    for (int k = 0; k < 6; ++k)
        CHECK(lan.energies[k] == doctest::Approx(den.energies[k]).epsilon(1e-11));
}

TEST_CASE("preconditions rejected") {
    const Grid1D grid = Grid1D::dirichlet(-5.0, 5.0, 64);
    auto v = [](double) { return 0.0; };
    CHECK_THROWS_AS(solve_tise_1d(grid, v, 1.0, 40), std::invalid_argument); // n_eigen >= n/2
    CHECK_THROWS_AS(solve_tise_1d(grid, v, -1.0, 2), std::invalid_argument);
    const Grid1D per = Grid1D::periodic(-5.0, 5.0, 64);
    CHECK_THROWS_AS(solve_tise_1d(per, v, 1.0, 2), std::invalid_argument);
}
