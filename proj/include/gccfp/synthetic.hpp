#pragma once

#include "gccfp/factors.hpp"
#include "gccfp/graph.hpp"
#include "gccfp/matrix.hpp"

#include <cstdint>
#include <vector>

namespace gccfp {

struct PlantedViewSpec {
    int features_per_cluster = 3;
    double flip_noise = 0.0; // symmetric bit-flip probability, in [0, 0.5)
};

/// Balanced planted-partition graph with per-cluster indicator features.
struct PlantedSpec {
    int n_vertices = 0;
    int k_clusters = 0;
    double p_in = 0.0;  // within-cluster edge probability
    double p_out = 0.0; // between-cluster edge probability
    std::vector<PlantedViewSpec> views;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlantedGraph {
    MultiViewGraph graph;
    std::vector<int> labels; // ground truth, length N
};

/// Deterministic in the seed: cluster sizes differ by at most one, each
/// intra-pair edge drawn with p_in and inter-pair with p_out, then each view
/// lays down features_per_cluster indicator rows per cluster and flips every
/// cell with its view's noise probability.
PlantedGraph generate(const PlantedSpec& spec);

enum class UpdateRule { V, U, P, X, C, W };

/// Scalar-loop transcription of the named update rule, used as ground truth
/// for the vectorized optimizer. Evaluates every bracketed product with
/// explicit nested loops over dense copies of the data, so it shares no code
/// path (and no association order) with the production kernels. Instances
/// are capped at N, M <= 32. `view` selects the P^i block for rule P.
Matrix oracle_update(UpdateRule rule, const LatentFactors& factors, const FitData& data,
                     const Hyperparams& hp, int view = 0);

} // namespace gccfp
