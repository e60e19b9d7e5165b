#include <cmath>

#include "doctest.h"

#include "qcdkit/errors.hpp"
#include "qcdkit/kl.hpp"
#include "test_support.hpp"

using namespace qcd;

TEST_CASE("closed-form gaussian divergences") {
    CHECK(kl_gaussian(Gaussian(1.0, 1.0), Gaussian(0.0, 1.0)) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(kl_gaussian(Gaussian(0.0, 4.0), Gaussian(0.0, 1.0)) ==
          doctest::Approx(0.8068528194400547).epsilon(1e-14));
    CHECK(kl_gaussian(Gaussian(2.0, 3.0), Gaussian(2.0, 3.0)) == doctest::Approx(0.0));
    // Asymmetry.
    CHECK(kl_gaussian(Gaussian(0.0, 1.0), Gaussian(0.0, 4.0)) !=
          doctest::Approx(kl_gaussian(Gaussian(0.0, 4.0), Gaussian(0.0, 1.0))));
}

TEST_CASE("divergence of a mixture against itself is zero within noise") {
    GaussianMixture p({{0.4, Gaussian(-1.0, 0.5)}, {0.6, Gaussian(2.0, 1.5)}});
    const auto est = kl_mc(p, p, 100000, 7);
    CHECK(std::abs(est.value) <= 3.0 * std::max(est.std_error, 1e-12));
}

TEST_CASE("monte-carlo estimate matches the closed form for single gaussians") {
    struct Case {
        Gaussian p, q;
    };
    const Case cases[] = {{Gaussian(1.0, 1.0), Gaussian(0.0, 1.0)},
                          {Gaussian(0.0, 4.0), Gaussian(0.0, 1.0)}};
    std::uint64_t seed = 90210;
    for (const auto& c : cases) {
        const auto est = kl_mc(GaussianMixture({{1.0, c.p}}), GaussianMixture({{1.0, c.q}}),
                               1000000, seed++);
        const double exact = kl_gaussian(c.p, c.q);
        CHECK(std::abs(est.value - exact) <= 3.0 * est.std_error);
        CHECK(est.std_error > 0.0);
        CHECK(est.samples == 1000000);
    }
}

TEST_CASE("kl dispatch uses the closed form only for single gaussians") {
    auto p = GaussianMixture::single(1.0, 1.0);
    auto q = GaussianMixture::single(0.0, 1.0);
    const auto exact = kl(p, q, 5000, 3);
    CHECK(exact.value == kl_gaussian(Gaussian(1.0, 1.0), Gaussian(0.0, 1.0)));
    CHECK(exact.std_error == 0.0);

    GaussianMixture mix({{0.5, Gaussian(0.0, 1.0)}, {0.5, Gaussian(3.0, 1.0)}});
    const auto mc = kl(mix, q, 5000, 3);
    const auto direct = kl_mc(mix, q, 5000, 3);
    CHECK(mc.value == direct.value);
    CHECK(mc.std_error == direct.std_error);
}

TEST_CASE("too few monte-carlo samples are rejected") {
    auto p = GaussianMixture::single(0.0, 1.0);
    CHECK_THROWS_AS(kl_mc(p, p, 999, 1), TooFewPoints);
}

TEST_CASE("estimates are deterministic under the seed") {
    Rng rng(401);
    const auto p = test::random_mixture(rng);
    const auto q = test::random_mixture(rng);
    const auto a = kl_mc(p, q, 20000, 555);
    const auto b = kl_mc(p, q, 20000, 555);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    CHECK(a.value != kl_mc(p, q, 20000, 556).value);
}
