#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "mdcms/regions.hpp"
#include "mdcms/shannon.hpp"
#include "test_helpers.hpp"

using namespace mdcms;
using mdcms::testing::ds;

TEST_CASE("binary RD closed form") {
    CHECK(shannon::rd_binary(0.0) == doctest::Approx(1.0));
    CHECK(shannon::rd_binary(0.5) == doctest::Approx(0.0));
    CHECK(shannon::rd_binary(0.75) == doctest::Approx(0.0));  // clamp
    CHECK(shannon::rd_binary(0.25) == doctest::Approx(0.188722).epsilon(1e-5));
    CHECK_THROWS_AS(shannon::rd_binary(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(shannon::rd_binary(1.1), std::invalid_argument);
}

TEST_CASE("binary RD is convex and nonincreasing on a 1e-3 grid") {
    double prev = shannon::rd_binary(0.0);
    double prev_slope = -1e18;
    bool first = true;
    for (int i = 1; i <= 500; ++i) {
        const double d = i * 1e-3;
        const double cur = shannon::rd_binary(d);
        CHECK(cur <= prev + 1e-12);
        const double slope = (cur - prev) / 1e-3;
        if (!first) CHECK(slope >= prev_slope - 1e-9);  // slopes nondecreasing
        prev_slope = slope;
        prev = cur;
        first = false;
    }
}

TEST_CASE("Blahut-Arimoto matches the closed form for the fair bit") {
    const std::vector<double> px{0.5, 0.5};
    const std::vector<std::vector<double>> ham{{0.0, 1.0}, {1.0, 0.0}};
    for (double d = 0.05; d < 0.46; d += 0.05) {
        const auto pt = shannon::rd_blahut_arimoto(px, ham, d);
        CHECK(pt.distortion <= d + 1e-6);
        CHECK(std::abs(pt.rate - shannon::rd_binary(d)) <= 1e-4);
    }
}

TEST_CASE("Blahut-Arimoto edge cases") {
    const std::vector<double> px{0.5, 0.5};
    const std::vector<std::vector<double>> ham{{0.0, 1.0}, {1.0, 0.0}};
    // at or above the blind-guess distortion the rate is zero
    const auto zero = shannon::rd_blahut_arimoto(px, ham, 0.6);
    CHECK(zero.rate == doctest::Approx(0.0));
    CHECK(zero.distortion <= 0.5 + 1e-12);

    // lossless 4-ary uniform needs log2(4) bits
    const std::vector<double> p4{0.25, 0.25, 0.25, 0.25};
    std::vector<std::vector<double>> ham4(4, std::vector<double>(4, 1.0));
    for (int i = 0; i < 4; ++i) ham4[i][i] = 0.0;
    const auto lossless = shannon::rd_blahut_arimoto(p4, ham4, 0.0);
    CHECK(lossless.rate == doctest::Approx(2.0).epsilon(1e-6));

    // distortion below the floor reports infeasible
    std::vector<std::vector<double>> shifted{{0.5, 1.0}, {1.0, 0.5}};
    CHECK_THROWS_AS(shannon::rd_blahut_arimoto(px, shifted, 0.1), std::invalid_argument);
}

TEST_CASE("degraded successive-refinement model certifies the rate split") {
    // q values from the construction
    {
        const auto m = shannon::sr_degraded_model(0.25, 0.1);
        // q = (0.25-0.1)/(1-0.2) = 0.1875: check via achieved distortions
        const auto synth = regions::synthesize_decoders(m);
        CHECK(synth.distortions.at(ds({1}, 2)) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(synth.distortions.at(ds({1, 2}, 2)) == doctest::Approx(0.1).epsilon(1e-12));
    }
    CHECK_THROWS_AS(shannon::sr_degraded_model(0.1, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(shannon::sr_degraded_model(0.6, 0.1), std::invalid_argument);

    // degenerate D1 = D2: refinement layer carries no extra rate
    {
        const auto m = shannon::sr_degraded_model(0.2, 0.2);
        const double r1 = regions::vkg_rhs(m, ds({1}, 2));
        const double rsum = regions::vkg_rhs(m, ds({1, 2}, 2));
        CHECK(r1 == doctest::Approx(shannon::rd_binary(0.2)).epsilon(1e-9));
        CHECK(rsum == doctest::Approx(r1).epsilon(1e-9));
    }
    // D2 = 0: top layer lossless
    {
        const auto m = shannon::sr_degraded_model(0.3, 0.0);
        CHECK(regions::vkg_rhs(m, ds({1, 2}, 2)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(regions::vkg_rhs(m, ds({1}, 2)) ==
              doctest::Approx(shannon::rd_binary(0.3)).epsilon(1e-9));
    }

    // no redundancy between the layers: the pair bound equals R(D2) exactly,
    // and the certified rate split is a member of the region
    for (auto [d1, d2] : {std::pair{0.25, 0.1}, {0.4, 0.2}, {0.1, 0.05}}) {
        const auto m = shannon::sr_degraded_model(d1, d2);
        const double r_base = shannon::rd_binary(d1);
        const double r_sum = shannon::rd_binary(d2);
        CHECK(regions::vkg_rhs(m, ds({1}, 2)) == doctest::Approx(r_base).epsilon(1e-6));
        CHECK(regions::vkg_rhs(m, ds({1, 2}, 2)) == doctest::Approx(r_sum).epsilon(1e-6));
        DistortionVector targets{{ds({1}, 2), d1}, {ds({1, 2}, 2), d2}};
        CHECK(regions::membership(m, {r_base, r_sum - r_base}, targets).member);
    }
}
