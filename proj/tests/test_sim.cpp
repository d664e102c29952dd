#include <stdexcept>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mdcms/regions.hpp"
#include "mdcms/search.hpp"
#include "mdcms/sim.hpp"
#include "test_helpers.hpp"

using namespace mdcms;
using mdcms::testing::ds;

namespace {

AuxModel constant_model() {
    std::vector<VariableSpec> vars{{"X", 2}};
    std::map<DescriptionSet, DistortionMeasure> dist{{ds({1}, 2), hamming_distortion(2)}};
    return AuxModel(2, Scheme::CMS, JointDistribution(vars, {0.5, 0.5}), "X", {}, {}, dist);
}

AuxModel zb_sim_model() {
    // V = X xor bern(0.25), U_l = X xor bern(0.1) independently, U_12 = X
    const int nv = 2;
    std::vector<double> table(16, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int v = 0; v < nv; ++v)
            for (int u1 = 0; u1 < 2; ++u1)
                for (int u2 = 0; u2 < 2; ++u2) {
                    const double pv = (v == x) ? 0.75 : 0.25;
                    const double p1 = (u1 == x) ? 0.9 : 0.1;
                    const double p2 = (u2 == x) ? 0.9 : 0.1;
                    table[std::size_t(((x * nv + v) * 2 + u1) * 2 + u2)] = 0.5 * pv * p1 * p2;
                }
    return mdcms::testing::pair_model(Scheme::ZB, nv, table, /*with_u12=*/true);
}

RateAllocation margin_allocation(const AuxModel& model, double margin) {
    std::vector<double> ones(std::size_t(model.total()), 1.0);
    const auto lp = regions::min_rates(model, ones);
    RateAllocation alloc = lp.allocation.value_or(RateAllocation{});
    for (int l = 1; l <= model.total(); ++l) alloc.private_rates[l] += margin;
    for (auto& [s, r] : alloc.shared_rates) r += margin;
    return alloc;
}

}  // namespace

TEST_CASE("codebook generation sizes and determinism") {
    const auto m = zb_sim_model();
    RateAllocation alloc;
    alloc.shared_rates[ds({1, 2}, 2)] = 0.25;
    alloc.private_rates = {{1, 0.0}, {2, 0.0}};

    const auto suite = sim::generate_codebooks(m, alloc, 8, 99);
    // order: shared first, then bases, then the refinement
    REQUIRE(suite.books.size() == 4);
    CHECK(suite.books[0].var_name == "V_12");
    CHECK(suite.books[0].num_words == 4);  // 2^ceil(8*0.25)
    CHECK(suite.books[1].var_name == "U_1");
    CHECK(suite.books[1].num_words == 1);  // zero rate
    CHECK(suite.books[3].var_name == "U_12");
    CHECK(suite.books[3].num_words == 1);  // refinement: single word per tuple
    CHECK(suite.generation_order ==
          std::vector<std::string>{"V_12", "U_1", "U_2", "U_12"});

    // conditioning precedes dependents
    for (std::size_t i = 0; i < suite.books.size(); ++i)
        for (int c : suite.books[i].conditioning) CHECK(std::size_t(c) < i);

    const auto again = sim::generate_codebooks(m, alloc, 8, 99);
    for (std::size_t i = 0; i < suite.books.size(); ++i)
        CHECK(suite.books[i].symbols == again.books[i].symbols);
    const auto other = sim::generate_codebooks(m, alloc, 8, 100);
    bool any_diff = false;
    for (std::size_t i = 0; i < suite.books.size(); ++i)
        if (suite.books[i].symbols != other.books[i].symbols) any_diff = true;
    CHECK(any_diff);

    CHECK_THROWS_AS(sim::generate_codebooks(m, alloc, 13, 1), std::invalid_argument);
    RateAllocation huge;
    huge.shared_rates[ds({1, 2}, 2)] = 2.0;  // 2^16 words at n=8
    CHECK_THROWS_AS(sim::generate_codebooks(m, huge, 8, 1), std::invalid_argument);
}

TEST_CASE("encode on degenerate models") {
    const auto constant = constant_model();
    const auto suite = sim::generate_codebooks(constant, RateAllocation{}, 6, 5);
    CHECK(suite.books.empty());
    const std::vector<int> x_seq{0, 1, 0, 1, 1, 0};
    const auto idx = sim::encode(x_seq, constant, suite, 1.0);
    REQUIRE(idx.has_value());
    CHECK(idx->empty());

    // epsilon = 1 always succeeds even on a structured model
    const auto m = zb_sim_model();
    const auto alloc = margin_allocation(m, 0.1);
    const auto s2 = sim::generate_codebooks(m, alloc, 6, 5);
    CHECK(sim::encode(x_seq, m, s2, 1.0).has_value());
    CHECK_THROWS_AS(sim::encode({0, 1}, m, s2, 0.5), std::invalid_argument);
}

TEST_CASE("encoding success implies the joint type is within epsilon") {
    const auto m = zb_sim_model();
    const auto alloc = margin_allocation(m, 0.1);
    const double eps = 0.22;
    const int n = 10;
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto suite = sim::generate_codebooks(m, alloc, n, seed);
        std::vector<int> x_seq;
        std::mt19937_64 rng(seed * 7 + 1);
        for (int t = 0; t < n; ++t) x_seq.push_back(int(rng() % 2));
        const auto idx = sim::encode(x_seq, m, suite, eps);
        if (!idx) continue;
        ++successes;
        for (std::size_t b = 0; b < suite.books.size(); ++b)
            CHECK((*idx)[b] < suite.books[b].num_words);

        // independent recheck of the empirical joint type
        const auto words = sim::realized_codewords(m, suite, *idx);
        const auto& joint = m.joint();
        std::vector<double> counts(joint.cells(), 0.0);
        for (int t = 0; t < n; ++t) {
            std::vector<int> sym(joint.variables().size(), 0);
            sym[std::size_t(joint.index_of("X"))] = x_seq[std::size_t(t)];
            for (std::size_t b = 0; b < suite.books.size(); ++b)
                sym[std::size_t(suite.books[b].var_index)] = words[b][std::size_t(t)];
            std::size_t cell = 0;
            for (std::size_t i = 0; i < sym.size(); ++i)
                cell = cell * std::size_t(joint.variables()[i].alphabet) +
                       std::size_t(sym[i]);
            counts[cell] += 1.0 / n;
        }
        for (std::size_t c = 0; c < counts.size(); ++c)
            CHECK(std::abs(counts[c] - joint.probs()[c]) <= eps + 1e-12);
    }
    CHECK(successes > 0);
}

TEST_CASE("decode_subset on known couplings") {
    const auto constant = constant_model();
    const auto suite = sim::generate_codebooks(constant, RateAllocation{}, 6, 5);
    const auto synth = regions::synthesize_decoders(constant);
    const auto out = sim::decode_subset(constant, suite, {}, ds({1}, 2), synth.decoders[0]);
    for (int v : out) CHECK(v == 0);  // constant decoder output
}

TEST_CASE("run_trials aggregates failures and distortions deterministically") {
    const auto constant = constant_model();
    const auto rep = sim::run_trials(constant, RateAllocation{}, 6, 1, 0.5, 3);
    CHECK(rep.encode_failures == 0);
    CHECK(rep.empirical_distortions.at(ds({1}, 2)) == doctest::Approx(0.5).epsilon(0.51));

    const auto m = zb_sim_model();
    const auto alloc = margin_allocation(m, 0.1);
    const auto a = sim::run_trials(m, alloc, 8, 40, 0.22, 17, 2);
    const auto b = sim::run_trials(m, alloc, 8, 40, 0.22, 17, 1);
    CHECK(a.encode_failures == b.encode_failures);
    for (const auto& [s, d] : a.empirical_distortions)
        CHECK(d == doctest::Approx(b.empirical_distortions.at(s)).epsilon(1e-15));
    CHECK(a.encode_failures <= a.trials);
}
