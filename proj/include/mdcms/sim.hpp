#pragma once
// Finite-blocklength validation: layered random codebooks generated in the
// scheme's conditioning order, joint-typicality encoding by depth-first
// search, per-letter subset decoding, and empirical distortion accounting.
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdcms/model.hpp"
#include "mdcms/regions.hpp"

namespace mdcms {

struct Codebook {
    std::string var_name;
    int var_index = -1;             // index in the model joint
    std::optional<DescriptionSet> shared_subset;   // set for V_S entries
    std::optional<DescriptionSet> aux_subset;      // set for U_K entries
    std::vector<int> conditioning;  // positions of earlier codebooks this one reads
    std::size_t num_cond_tuples = 1;
    std::size_t num_words = 1;      // 2^ceil(n R); refinement layers have 1
    double rate_used = 0.0;         // effective rate ceil(nR)/n
    // symbols[(tuple * num_words + word) * n + t]
    std::vector<int> symbols;
};

struct CodebookSuite {
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<Codebook> books;    // generation order: V tiers down, U_l, U_K up
    std::vector<std::string> generation_order;
};

struct SimReport {
    int n = 0;
    int trials = 0;
    int encode_failures = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::map<DescriptionSet, double> empirical_distortions;  // successful trials only
    std::map<DescriptionSet, double> analytic_distortions;
    RateAllocation allocation_used;
};

namespace sim {

// Draw every codebook letter-by-letter from the model conditionals given the
// already-generated conditioning codewords. Deterministic in the seed.
// Limits: L <= 3, n <= 12, 2^ceil(nR) <= 4096 per codebook.
CodebookSuite generate_codebooks(const AuxModel& model, const RateAllocation& alloc, int n,
                                 std::uint64_t seed);

// Joint-typicality encoding: depth-first over free codeword indices (shared
// layers outer, base layers inner; refinement words follow from their
// conditioning tuple). Success = every cell of the empirical joint type is
// within epsilon of the model PMF. Returns the first passing index tuple.
std::optional<std::vector<std::size_t>> encode(const std::vector<int>& source_seq,
                                               const AuxModel& model,
                                               const CodebookSuite& suite, double epsilon);

// Apply the subset's synthesized decoder per letter to the codewords the
// subset can see.
std::vector<int> decode_subset(const AuxModel& model, const CodebookSuite& suite,
                               const std::vector<std::size_t>& indices,
                               const DescriptionSet& subset, const Decoder& decoder);

// The codeword sequence each codebook contributes under an index tuple, in
// suite order (refinement entries resolve through their conditioning).
std::vector<std::vector<int>> realized_codewords(const AuxModel& model,
                                                 const CodebookSuite& suite,
                                                 const std::vector<std::size_t>& indices);

SimReport run_trials(const AuxModel& model, const RateAllocation& alloc, int n, int trials,
                     double epsilon, std::uint64_t seed, int jobs = 0);

}  // namespace sim
}  // namespace mdcms
