#include "mdcms/shannon.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdcms::shannon {

namespace {

// Rate (bits) and distortion of the BA fixed point at slope `s` bits per
// unit distortion.
RDPoint ba_at_slope(const std::vector<double>& px,
                    const std::vector<std::vector<double>>& d, double s) {
    const int nx = int(px.size());
    const int ny = int(d[0].size());
    const double lam = s * std::log(2.0);  // nats per unit distortion

    std::vector<double> q(ny, 1.0 / ny);
    std::vector<std::vector<double>> cond(nx, std::vector<double>(ny, 0.0));
    double prev_rate = std::numeric_limits<double>::infinity();
    RDPoint out;

    for (int iter = 0; iter < 5000; ++iter) {
        for (int x = 0; x < nx; ++x) {
            double z = 0.0;
            for (int y = 0; y < ny; ++y) {
                cond[x][y] = q[y] * std::exp(-lam * d[x][y]);
                z += cond[x][y];
            }
            for (int y = 0; y < ny; ++y) cond[x][y] = (z > 0.0) ? cond[x][y] / z : 0.0;
        }
        for (int y = 0; y < ny; ++y) {
            double m = 0.0;
            for (int x = 0; x < nx; ++x) m += px[x] * cond[x][y];
            q[y] = m;
        }
        double rate = 0.0, dist = 0.0;
        for (int x = 0; x < nx; ++x) {
            for (int y = 0; y < ny; ++y) {
                const double j = px[x] * cond[x][y];
                if (j > 0.0 && q[y] > 0.0) rate += j * std::log2(cond[x][y] / q[y]);
                dist += j * d[x][y];
            }
        }
        out = {rate < 0.0 ? 0.0 : rate, dist};
        if (std::abs(rate - prev_rate) < 1e-9) break;
        prev_rate = rate;
    }
    return out;
}

}  // namespace

double rd_binary(double distortion) {
    if (distortion < 0.0 || distortion > 1.0)
        throw std::invalid_argument("binary RD function needs D in [0, 1]");
    if (distortion >= 0.5) return 0.0;
    return 1.0 - binary_entropy(distortion);
}

RDPoint rd_blahut_arimoto(const std::vector<double>& source_pmf,
                          const std::vector<std::vector<double>>& distortion_matrix,
                          double target_distortion) {
    const int nx = int(source_pmf.size());
    if (nx == 0 || distortion_matrix.size() != std::size_t(nx))
        throw std::invalid_argument("distortion matrix rows must match source alphabet");
    const int ny = int(distortion_matrix[0].size());
    if (ny == 0) throw std::invalid_argument("empty reconstruction alphabet");
    double mass = 0.0;
    for (double p : source_pmf) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("source PMF entries must be >= 0");
        mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("source PMF must sum to 1");
    if (target_distortion < 0.0) throw std::invalid_argument("target distortion must be >= 0");
    for (const auto& row : distortion_matrix)
        if (row.size() != std::size_t(ny))
            throw std::invalid_argument("ragged distortion matrix");

    // Zero-rate ceiling: the best blind reconstruction.
    double d_max = std::numeric_limits<double>::infinity();
    for (int y = 0; y < ny; ++y) {
        double dy = 0.0;
        for (int x = 0; x < nx; ++x) dy += source_pmf[x] * distortion_matrix[x][y];
        d_max = std::min(d_max, dy);
    }
    if (target_distortion >= d_max) return {0.0, d_max};

    // Floor: per-letter best reconstruction.
    double d_min = 0.0;
    for (int x = 0; x < nx; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (int y = 0; y < ny; ++y) best = std::min(best, distortion_matrix[x][y]);
        d_min += source_pmf[x] * best;
    }
    if (target_distortion < d_min - 1e-12)
        throw std::invalid_argument("target distortion below the minimum achievable " +
                                    std::to_string(d_min));

    double lo = 1e-6, hi = 64.0;  // slope bracket, bits per unit distortion
    RDPoint hi_point = ba_at_slope(source_pmf, distortion_matrix, hi);
    if (hi_point.distortion > target_distortion + 1e-6)
        throw std::invalid_argument("target distortion out of reach of the slope bracket");
    RDPoint best = hi_point;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const RDPoint p = ba_at_slope(source_pmf, distortion_matrix, mid);
        if (p.distortion > target_distortion) {
            lo = mid;
        } else {
            hi = mid;
            best = p;
        }
        if (std::abs(p.distortion - target_distortion) <= 1e-9 || hi - lo < 1e-12) {
            if (p.distortion <= target_distortion + 1e-6) best = p;
            break;
        }
    }
    return best;
}

AuxModel sr_degraded_model(double d1, double d2) {
    if (d2 > d1) throw std::invalid_argument("refinement distortion must satisfy D2 <= D1");
    if (d2 < 0.0) throw std::invalid_argument("distortions must be >= 0");
    if (d1 >= 0.5) throw std::invalid_argument("degraded cascade needs D1 < 1/2");
    const double q = (d1 - d2) / (1.0 - 2.0 * d2);

    // Joint over (X, U1, U12): U12 = X + bern(d2), U1 = U12 + bern(q).
    std::vector<VariableSpec> vars{{"X", 2}, {"U_1", 2}, {"U_12", 2}};
    std::vector<double> probs(8, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int u12 = 0; u12 < 2; ++u12)
            for (int u1 = 0; u1 < 2; ++u1) {
                const double p = 0.5 * (u12 == x ? 1.0 - d2 : d2) * (u1 == u12 ? 1.0 - q : q);
                probs[std::size_t(x) * 4 + std::size_t(u1) * 2 + u12] = p;
            }

    std::map<DescriptionSet, std::string> aux;
    aux[DescriptionSet({1}, 2)] = "U_1";
    aux[DescriptionSet({1, 2}, 2)] = "U_12";
    std::map<DescriptionSet, DistortionMeasure> dist;
    dist[DescriptionSet({1}, 2)] = hamming_distortion(2);
    dist[DescriptionSet({1, 2}, 2)] = hamming_distortion(2);

    return AuxModel(2, Scheme::EC, JointDistribution(std::move(vars), std::move(probs)), "X",
                    {}, std::move(aux), std::move(dist));
}

}  // namespace mdcms::shannon
