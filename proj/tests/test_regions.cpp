#include <cmath>
#include <random>

#include "doctest.h"
#include "mdcms/json_io.hpp"
#include "mdcms/regions.hpp"
#include "test_helpers.hpp"

using namespace mdcms;
using mdcms::testing::ds;
using mdcms::testing::pair_model;

namespace {

// V_12 = X (fair bit), V_123 constant, no U's.
AuxModel l3_shared_copy_model() {
    std::vector<VariableSpec> vars{{"X", 2}, {"V_12", 2}};
    std::vector<double> probs{0.5, 0.0, 0.0, 0.5};
    std::map<DescriptionSet, std::string> shared;
    shared[ds({1, 2}, 3)] = "V_12";
    return AuxModel(3, Scheme::CMS, JointDistribution(vars, probs), "X", shared, {});
}

AuxModel noisy_private_model(double flip) {
    // L=2 EC: U_1 = X xor bern(flip), U_2 constant
    std::vector<VariableSpec> vars{{"X", 2}, {"U_1", 2}};
    std::vector<double> probs{0.5 * (1 - flip), 0.5 * flip, 0.5 * flip, 0.5 * (1 - flip)};
    std::map<DescriptionSet, std::string> aux;
    aux[ds({1}, 2)] = "U_1";
    std::map<DescriptionSet, DistortionMeasure> dist;
    dist[ds({1}, 2)] = hamming_distortion(2);
    return AuxModel(2, Scheme::EC, JointDistribution(vars, probs), "X", {}, aux, dist);
}

}  // namespace

TEST_CASE("alpha spec examples") {
    const auto m = l3_shared_copy_model();
    CHECK(regions::alpha(m, 2, SubsetFamily{}) == 0.0);
    CHECK(regions::alpha(m, 2, SubsetFamily({ds({1, 2}, 3)})) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // all shared constant -> 0 for every Q
    std::vector<VariableSpec> vars{{"X", 2}};
    AuxModel constant(3, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
    for (int w = 2; w <= 3; ++w)
        for (const auto& s : lattice::tier(3, w))
            CHECK(regions::alpha(constant, w, SubsetFamily({s})) == doctest::Approx(0.0));
    // wrong width rejected
    CHECK_THROWS_AS(regions::alpha(m, 2, SubsetFamily({ds({1, 2, 3}, 3)})),
                    std::invalid_argument);
    CHECK_THROWS_AS(regions::alpha(m, 1, SubsetFamily{}), std::invalid_argument);
}

TEST_CASE("beta spec examples") {
    // U_1 = U_2 = X, U_12 constant
    std::vector<double> table(8, 0.0);
    table[0] = 0.5;               // x=0,u1=0,u2=0
    table[(1 * 2 + 1) * 2 + 1] = 0.5;  // x=1,u1=1,u2=1
    const auto m = pair_model(Scheme::EC, 0, table, /*with_u12=*/false);
    CHECK(regions::beta(m, DescriptionSet::empty_set(2)) == 0.0);
    CHECK(regions::beta(m, ds({1, 2}, 2)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(regions::beta(m, ds({1}, 2)) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<VariableSpec> vars{{"X", 2}};
    AuxModel constant(2, Scheme::EC, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
    for (const auto& s : lattice::nonempty_subsets(2))
        CHECK(regions::beta(constant, s) == doctest::Approx(0.0));
}

TEST_CASE("vkg_rhs spec examples") {
    {
        std::vector<VariableSpec> vars{{"X", 2}};
        AuxModel constant(2, Scheme::VKG, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
        for (const auto& s : lattice::nonempty_subsets(2))
            CHECK(regions::vkg_rhs(constant, s) == doctest::Approx(0.0));
        CHECK_THROWS_AS(regions::vkg_rhs(constant, DescriptionSet::empty_set(2)),
                        std::invalid_argument);
    }
    {
        const auto m = noisy_private_model(0.11).with_scheme(Scheme::VKG);
        CHECK(regions::vkg_rhs(m, ds({1}, 2)) ==
              doctest::Approx(1.0 - binary_entropy(0.11)).epsilon(1e-12));
    }
    {
        // V_L = X, all U constant
        std::vector<VariableSpec> vars{{"X", 2}, {"V", 2}};
        std::vector<double> probs{0.5, 0.0, 0.0, 0.5};
        std::map<DescriptionSet, std::string> shared;
        shared[ds({1, 2}, 2)] = "V";
        AuxModel m(2, Scheme::VKG, JointDistribution(vars, probs), "X", shared, {});
        CHECK(regions::vkg_rhs(m, ds({1, 2}, 2)) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("description_rates composes private and shared parts") {
    RateAllocation zero;
    CHECK(regions::description_rates(zero, 3) == RateVector{0.0, 0.0, 0.0});

    RateAllocation a;
    a.private_rates = {{1, 0.1}, {2, 0.1}, {3, 0.1}};
    a.shared_rates[ds({1, 2}, 3)] = 0.3;
    const auto r = regions::description_rates(a, 3);
    CHECK(r[0] == doctest::Approx(0.4));
    CHECK(r[1] == doctest::Approx(0.4));
    CHECK(r[2] == doctest::Approx(0.1));

    RateAllocation b;
    b.shared_rates[ds({1, 2}, 2)] = 0.7;
    const auto r2 = regions::description_rates(b, 2);
    CHECK(r2[0] == doctest::Approx(0.7));
    CHECK(r2[1] == doctest::Approx(0.7));

    RateAllocation bad;
    bad.private_rates = {{1, -0.5}};
    CHECK_THROWS_AS(regions::description_rates(bad, 2), std::invalid_argument);
}

TEST_CASE("allocation feasibility reports the violated constraint") {
    const auto zb = mdcms::testing::random_zb_model(7);
    const double alpha12 = regions::alpha(zb, 2, SubsetFamily({ds({1, 2}, 2)}));

    RateAllocation low;
    low.private_rates = {{1, 10.0}, {2, 10.0}};  // only the shared rate is short
    low.shared_rates[ds({1, 2}, 2)] = alpha12 * 0.5;
    const auto rep = regions::allocation_feasible(zb, low);
    if (alpha12 > 1e-9) {
        CHECK(!rep.feasible);
        REQUIRE(!rep.violated.empty());
        CHECK(rep.violated[0].label.find("alpha") != std::string::npos);
    }

    // feasible allocation stays feasible after a uniform +0.1
    auto lp = regions::min_rates(zb, {1.0, 1.0});
    REQUIRE(lp.allocation.has_value());
    auto bumped = *lp.allocation;
    for (auto& [l, r] : bumped.private_rates) r += 0.1;
    for (auto& [s, r] : bumped.shared_rates) r += 0.1;
    CHECK(regions::allocation_feasible(zb, bumped).feasible);

    // all-constant model, zero allocation
    std::vector<VariableSpec> vars{{"X", 2}};
    AuxModel constant(2, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
    CHECK(regions::allocation_feasible(constant, RateAllocation{}).feasible);
}

TEST_CASE("decoder synthesis spec examples") {
    {
        // auxiliary independent of X: blind decoder, D = 1/2
        std::vector<VariableSpec> vars{{"X", 2}, {"U_1", 2}};
        std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
        std::map<DescriptionSet, std::string> aux{{ds({1}, 2), "U_1"}};
        std::map<DescriptionSet, DistortionMeasure> dist{{ds({1}, 2), hamming_distortion(2)}};
        AuxModel m(2, Scheme::EC, JointDistribution(vars, probs), "X", {}, aux, dist);
        const auto synth = regions::synthesize_decoders(m);
        CHECK(synth.distortions.at(ds({1}, 2)) == doctest::Approx(0.5));
        CHECK(synth.decoders[0].table == std::vector<int>{0, 0});  // tie -> index 0
    }
    CHECK(regions::synthesize_decoders(noisy_private_model(0.0))
              .distortions.at(ds({1}, 2)) == doctest::Approx(0.0));
    {
        const auto synth = regions::synthesize_decoders(noisy_private_model(0.2));
        CHECK(synth.distortions.at(ds({1}, 2)) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(synth.decoders[0].table == std::vector<int>{0, 1});  // identity map
    }
}

TEST_CASE("decoder optimality against random alternative tables") {
    std::mt19937_64 rng(4242);
    const auto m = mdcms::testing::random_zb_model(31);
    const auto synth = regions::synthesize_decoders(m);
    for (const auto& dec : synth.decoders) {
        // joint (inputs, x) weights recomputed independently
        std::vector<std::string> keep = dec.input_names;
        keep.push_back("X");
        const auto marg = m.joint().marginal(keep);
        std::vector<int> in_pos;
        std::vector<int> alph;
        for (const auto& name : dec.input_names) {
            in_pos.push_back(marg.index_of(name));
            alph.push_back(m.joint().variables()[std::size_t(m.joint().index_of(name))].alphabet);
        }
        const int x_pos = marg.index_of("X");
        auto expected_distortion = [&](const std::vector<int>& table) {
            double total = 0.0;
            std::vector<int> digits(marg.variables().size(), 0);
            for (std::size_t c = 0; c < marg.cells(); ++c) {
                std::size_t cell = 0;
                for (std::size_t i = 0; i < in_pos.size(); ++i)
                    cell = cell * std::size_t(alph[i]) + std::size_t(digits[in_pos[i]]);
                const int xhat = table[cell];
                if (digits[x_pos] != xhat) total += marg.probs()[c];
                for (int i = int(digits.size()) - 1; i >= 0; --i) {
                    if (++digits[i] < marg.variables()[std::size_t(i)].alphabet) break;
                    digits[i] = 0;
                }
            }
            return total;
        };
        CHECK(expected_distortion(dec.table) == doctest::Approx(dec.achieved).epsilon(1e-12));
        for (int alt = 0; alt < 50; ++alt) {
            std::vector<int> table(dec.table.size());
            for (auto& e : table) e = int(rng() % 2);
            CHECK(dec.achieved <= expected_distortion(table) + 1e-12);
        }
    }
}

TEST_CASE("min_rates spec examples") {
    {
        std::vector<VariableSpec> vars{{"X", 2}};
        AuxModel constant(2, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
        const auto res = regions::min_rates(constant, {1.0, 1.0});
        CHECK(res.objective == doctest::Approx(0.0));
        CHECK(res.rates[0] == doctest::Approx(0.0));
    }
    {
        // VKG, V constant, U_1 = U_2 = X, U_12 constant
        std::vector<double> table(8, 0.0);
        table[0] = 0.5;
        table[7] = 0.5;
        const auto m = pair_model(Scheme::EC, 0, table, false).with_scheme(Scheme::VKG);
        const auto res = regions::min_rates(m, {1.0, 1.0});
        CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(res.rates[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(res.rates[1] == doctest::Approx(1.0).epsilon(1e-9));

        const auto lop = regions::min_rates(m, {1.0, 0.0});
        CHECK(lop.rates[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(lop.rates[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
    {
        std::vector<VariableSpec> vars{{"X", 2}};
        AuxModel constant(2, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
        CHECK_THROWS_AS(regions::min_rates(constant, {0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(regions::min_rates(constant, {1.0}), std::invalid_argument);
    }
}

TEST_CASE("reduction identity for seeded L=3 models") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto m = mdcms::testing::random_l3_reduction_model(seed);
        CHECK(regions::check_reduction(m) <= 1e-9);
    }
    // degenerate: everything constant
    std::vector<VariableSpec> vars{{"X", 2}};
    AuxModel constant(3, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {});
    CHECK(regions::check_reduction(constant) <= 1e-12);

    // non-constant strict-subset shared variable is rejected
    const auto bad = l3_shared_copy_model();
    CHECK_THROWS_AS(regions::reduce_cms_to_vkg(bad), std::invalid_argument);
}

TEST_CASE("L=2 coincidence: CMS LP equals the VKG evaluation of the same model") {
    // at L=2 the single shared variable is the full-set variable, so the two
    // constraint systems must price every weight vector identically
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto zb = mdcms::testing::random_zb_model(seed, false);
        const auto vkg = zb.with_scheme(Scheme::VKG);
        for (auto weights : {std::vector<double>{1, 1}, {1, 0}, {0.3, 0.7}}) {
            const double a = regions::min_rates(zb, weights).objective;
            const double b = regions::min_rates(vkg, weights).objective;
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
    }
}

TEST_CASE("alpha and beta stay nonnegative on random models") {
    for (std::uint64_t seed = 500; seed < 520; ++seed) {
        const auto m = mdcms::testing::random_zb_model(seed, false);
        CHECK(regions::alpha(m, 2, SubsetFamily({ds({1, 2}, 2)})) >= -1e-9);
        for (const auto& s : lattice::nonempty_subsets(2))
            CHECK(regions::beta(m, s) >= -1e-9);
        const auto l3 = mdcms::testing::random_l3_reduction_model(seed);
        for (int w = 2; w <= 3; ++w)
            CHECK(regions::alpha(l3, w, lattice::tier(3, w)) >= -1e-9);
        for (const auto& s : lattice::nonempty_subsets(3))
            CHECK(regions::beta(l3, s) >= -1e-9);
    }
}

TEST_CASE("membership spec examples") {
    // zero-rate target at blind-guess distortion is a member
    {
        std::vector<VariableSpec> vars{{"X", 2}};
        std::map<DescriptionSet, DistortionMeasure> dist{{ds({1}, 2), hamming_distortion(2)},
                                                         {ds({2}, 2), hamming_distortion(2)}};
        AuxModel constant(2, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {},
                          dist);
        DistortionVector targets{{ds({1}, 2), 0.5}, {ds({2}, 2), 0.5}};
        CHECK(regions::membership(constant, {0.0, 0.0}, targets).member);
    }
    {
        // lossless pair model under VKG
        std::vector<double> table(8, 0.0);
        table[0] = 0.5;
        table[7] = 0.5;
        const auto m = pair_model(Scheme::EC, 0, table, true).with_scheme(Scheme::VKG);
        DistortionVector targets{{ds({1, 2}, 2), 0.0}};
        CHECK(regions::membership(m, {1.0, 1.0}, targets).member);
        const auto out = regions::membership(m, {0.4, 0.4}, targets);
        CHECK(!out.member);
        REQUIRE(!out.violations.empty());
    }
    // monotonicity: adding rate keeps membership
    {
        const auto zb = mdcms::testing::random_zb_model(77);
        const auto lp = regions::min_rates(zb, {1.0, 1.0});
        DistortionVector targets;
        for (const auto& [s, d] : lp.distortions) targets[s] = d + 1e-9;
        auto rates = lp.rates;
        CHECK(regions::membership(zb, rates, targets).member);
        rates[0] += 0.25;
        rates[1] += 0.05;
        CHECK(regions::membership(zb, rates, targets).member);
    }
}

TEST_CASE("LP against exhaustive rate-grid search on L=2 models") {
    // closed-form feasibility at L=2: R''_12 = alpha is optimal, so (R1,R2)
    // is feasible iff R1 >= b1+a, R2 >= b2+a, R1+R2 >= b12+2a
    for (std::uint64_t seed = 900; seed < 905; ++seed) {
        const auto zb = mdcms::testing::random_zb_model(seed, false);
        const double a = regions::alpha(zb, 2, SubsetFamily({ds({1, 2}, 2)}));
        const double b1 = regions::beta(zb, ds({1}, 2));
        const double b2 = regions::beta(zb, ds({2}, 2));
        const double b12 = regions::beta(zb, ds({1, 2}, 2));

        const std::vector<double> weights{1.0, 0.6};
        const double lp = regions::min_rates(zb, weights).objective;

        const double step = std::pow(2.0, -10);
        const double rmax = 3.0;
        double best = 1e100;
        for (double r1 = 0.0; r1 <= rmax; r1 += step)
            for (double r2 = 0.0; r2 <= rmax; r2 += step) {
                if (r1 >= b1 + a && r2 >= b2 + a && r1 + r2 >= b12 + 2 * a)
                    best = std::min(best, weights[0] * r1 + weights[1] * r2);
            }
        CHECK(lp <= best + 1e-9);
        CHECK(lp >= best - (weights[0] + weights[1]) * step - 1e-9);
    }
}

TEST_CASE("model JSON round trip and diagnostics") {
    const auto zb = mdcms::testing::random_zb_model(13);
    const auto j = model_to_json(zb);
    const auto back = model_from_json(j);
    CHECK(back.total() == 2);
    CHECK(back.scheme() == Scheme::ZB);
    CHECK(back.shared_vars().size() == 1);
    CHECK(back.aux_vars().size() == 2);
    CHECK(regions::min_rates(back, {1, 1}).objective ==
          doctest::Approx(regions::min_rates(zb, {1, 1}).objective).epsilon(1e-12));

    auto bad = j;
    bad["probs"][0] = bad["probs"][0].get<double>() + 0.25;
    CHECK_THROWS_WITH_AS(model_from_json(bad) /* normalization named */,
                         doctest::Contains("sum"), std::invalid_argument);

    auto orphan = j;
    orphan["roles"].erase(0);
    CHECK_THROWS_WITH_AS(model_from_json(orphan), doctest::Contains("no role"),
                         std::invalid_argument);
}
