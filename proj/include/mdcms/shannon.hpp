#pragma once
// Single-description rate-distortion baselines: the closed-form binary RD
// function, a general Blahut-Arimoto solver, and the two-layer degraded
// construction that certifies successive refinability of the fair bit.
#include <vector>

#include "mdcms/model.hpp"

namespace mdcms {

struct RDPoint {
    double rate = 0.0;        // bits
    double distortion = 0.0;  // per-symbol expected distortion
};

namespace shannon {

// R(D) = 1 - h2(D) for the binary symmetric source under Hamming;
// D in [0, 1], values above 1/2 clamp to rate 0.
double rd_binary(double distortion);

// Alternating minimization with bisection over the slope. Returns a point
// with distortion <= target + 1e-6. Throws when the target lies below the
// minimum achievable distortion for the given matrix.
RDPoint rd_blahut_arimoto(const std::vector<double>& source_pmf,
                          const std::vector<std::vector<double>>& distortion_matrix,
                          double target_distortion);

// Cascade model X2h = X + bern(d2), X1h = X2h + bern(q), q = (d1-d2)/(1-2 d2):
// an L=2 EC-structured model whose constraints certify the rate split
// (R(d1), R(d2) - R(d1)) for the (D1, infty, D12) = (d1, infty, d2) section.
// Requires 0 <= d2 <= d1 < 1/2.
AuxModel sr_degraded_model(double d1, double d2);

}  // namespace shannon
}  // namespace mdcms
