#include "gwflip/rounding.hpp"

#include <stdexcept>

#include "gwflip/rng.hpp"

namespace gwflip {

GaussianSample sample_gaussian(Eigen::Index rank, std::uint64_t seed) {
    if (rank < 1) throw std::invalid_argument("gaussian sample needs rank >= 1");
    RandomStream rng(derive_seed(seed, 0x68797065ULL));
    GaussianSample out{Eigen::VectorXd(rank), seed};
    for (Eigen::Index c = 0; c < rank; ++c) out.g(c) = rng.gaussian();
    return out;
}

Eigen::VectorXd project(const SdpEmbedding& emb, const GaussianSample& g) {
    if (g.g.size() != emb.rank()) throw std::invalid_argument("gaussian dimension does not match embedding rank");
    return emb.vectors * g.g;
}

Assignment hyperplane_round(const SdpEmbedding& emb, const GaussianSample& g) {
    const Eigen::VectorXd p = project(emb, g);
    std::vector<int> x(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) x[static_cast<std::size_t>(i)] = p(i) >= 0.0 ? 1 : -1;
    return Assignment(std::move(x));
}

}  // namespace gwflip
