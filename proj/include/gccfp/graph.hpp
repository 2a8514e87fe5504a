#pragma once

#include "gccfp/matrix.hpp"

#include <string>
#include <utility>
#include <vector>

namespace gccfp {

/// One view of vertex features, M^i x N, nonnegative.
struct ViewFeatures {
    int view_index = 0; // 1-based position in the view list
    int n_features = 0;
    CsrMatrix matrix;
};

struct LoadStats {
    long self_loops_dropped = 0;
    long duplicate_edges = 0;
    long isolated_vertices = 0;
};

/// Undirected simple graph plus a list of feature views over the same
/// vertex set. Immutable after construction.
struct MultiViewGraph {
    int n_vertices = 0;
    CsrMatrix adjacency; // N x N, binary, symmetric, zero diagonal
    std::vector<ViewFeatures> views;
    std::vector<std::string> vertex_ids; // optional, empty unless supplied
    LoadStats stats;

    long n_edges() const noexcept { return static_cast<long>(adjacency.nnz() / 2); }
    int n_views() const noexcept { return static_cast<int>(views.size()); }
    int total_features() const noexcept {
        int m = 0;
        for (const auto& v : views) m += v.n_features;
        return m;
    }
};

struct LoadOptions {
    bool strict_binary_features = false; // reject feature values outside {0,1}
};

/// Re-weighted edge matrix; support equals the source edge set exactly.
struct DiffusionWeights {
    CsrMatrix matrix; // N x N, symmetric, positive on edges
    std::vector<int> source_degrees;
};

struct PropagatedFeatures {
    std::vector<CsrMatrix> per_view; // H^i, M^i x N
};

/// Builds a validated graph from raw parts: symmetrizes and deduplicates the
/// edge list, drops self-loops, and counts isolated vertices. Shared by the
/// file loader and the synthetic generator.
MultiViewGraph assemble_graph(int n_vertices, std::vector<std::pair<int, int>> edges,
                              std::vector<ViewFeatures> views,
                              const LoadOptions& options = {});

/// Loads edge and feature-view files (formats documented in the README).
/// At least one view is required; it fixes N for bounds checking.
MultiViewGraph load_graph(const std::string& edge_path,
                          const std::vector<std::string>& view_paths,
                          const LoadOptions& options = {});

/// Per-vertex neighbor counts under the binary adjacency.
std::vector<int> degrees(const MultiViewGraph& graph);

/// Edge re-weighting: for each edge (i,j),
///   D_ij = (d_i + d_j) * (common_neighbors(i,j) + 1) / (2 d_i d_j),
/// zero elsewhere. Downstream code consumes D in place of the adjacency.
DiffusionWeights diffusion_reweight(const MultiViewGraph& graph);

/// H^i = F^i * D for every view; materialized once before fitting.
PropagatedFeatures propagate_features(const MultiViewGraph& graph,
                                      const DiffusionWeights& dw);

/// Row-wise concatenation of the views, in order, into the global M x N matrix.
CsrMatrix stack_features(const MultiViewGraph& graph);

/// Labels file: one integer per line, line number = vertex index, -1 = missing.
std::vector<int> load_labels(const std::string& path);

void write_edge_file(const MultiViewGraph& graph, const std::string& path);
void write_view_file(const ViewFeatures& view, const std::string& path);
void write_labels_file(const std::vector<int>& labels, const std::string& path);

} // namespace gccfp
