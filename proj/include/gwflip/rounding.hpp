#pragma once

// Random hyperplane rounding: x_i = sign(<g, v_i>) with g standard Gaussian.

#include <Eigen/Dense>

#include <cstdint>

#include "gwflip/instance.hpp"
#include "gwflip/sdp.hpp"

namespace gwflip {

/// g ~ N(0, I_r), drawn in the embedding rank rather than the ambient
/// dimension; the inner products <g, v_i> have the same joint law.
struct GaussianSample {
    Eigen::VectorXd g;
    std::uint64_t seed = 0;
};

GaussianSample sample_gaussian(Eigen::Index rank, std::uint64_t seed);

/// Projections <g, v_i> for every row.
Eigen::VectorXd project(const SdpEmbedding& emb, const GaussianSample& g);

/// sign(0) is taken as +1.
Assignment hyperplane_round(const SdpEmbedding& emb, const GaussianSample& g);

}  // namespace gwflip
