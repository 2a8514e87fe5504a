#include "gccfp/graph.hpp"

#include "gccfp/error.hpp"
#include "gccfp/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace gccfp {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

bool is_comment_or_blank(const std::string& line) {
    for (char ch : line) {
        if (ch == ' ' || ch == '\t' || ch == '\r') continue;
        return ch == '#';
    }
    return true;
}

int parse_index(const std::string& tok, const std::string& path, long line_no,
                const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected " + what +
                         ", got \"" + tok + "\"");
    if (value < 0)
        throw ParseError(path + ":" + std::to_string(line_no) + ": negative " + what);
    return value;
}

double parse_value(const std::string& tok, const std::string& path, long line_no) {
    double value = 0.0;
    std::size_t consumed = 0;
    try {
        value = std::stod(tok, &consumed);
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected numeric value, got \"" + tok + "\"");
    }
    if (consumed != tok.size())
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected numeric value, got \"" + tok + "\"");
    if (std::isnan(value))
        throw ParseError(path + ":" + std::to_string(line_no) + ": NaN value rejected");
    if (value < 0.0)
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": negative value rejected");
    return value;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FileNotFoundError("cannot open " + path);
    return in;
}

ViewFeatures load_view(const std::string& path, int view_index, int expect_n,
                       const LoadOptions& options) {
    std::ifstream in = open_input(path);
    std::string line;
    long line_no = 0;
    int m = -1, n = -1;
    std::vector<CooEntry> entries;

    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        auto toks = split_ws(line);
        if (m < 0) {
            if (toks.size() != 2)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": header must be \"M N\"");
            m = parse_index(toks[0], path, line_no, "feature count");
            n = parse_index(toks[1], path, line_no, "vertex count");
            if (m < 1)
                throw ShapeError(path + ": view must declare at least one feature");
            if (expect_n >= 0 && n != expect_n)
                throw ShapeError(path + ": vertex count " + std::to_string(n) +
                                 " does not match previous views (" +
                                 std::to_string(expect_n) + ")");
            continue;
        }
        if (toks.size() != 3)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected \"feature vertex value\"");
        int f = parse_index(toks[0], path, line_no, "feature index");
        int v = parse_index(toks[1], path, line_no, "vertex index");
        double value = parse_value(toks[2], path, line_no);
        if (f >= m)
            throw BoundsError(path + ":" + std::to_string(line_no) + ": feature index " +
                              std::to_string(f) + " out of range [0, " +
                              std::to_string(m) + ")");
        if (v >= n)
            throw BoundsError(path + ":" + std::to_string(line_no) + ": vertex index " +
                              std::to_string(v) + " out of range [0, " +
                              std::to_string(n) + ")");
        if (value != 0.0) entries.push_back({f, v, value});
    }
    if (m < 0)
        throw ParseError(path + ": missing \"M N\" header line");

    ViewFeatures view;
    view.view_index = view_index;
    view.n_features = m;
    view.matrix = CsrMatrix::from_coo(m, n, std::move(entries));
    if (options.strict_binary_features) {
        for (int r = 0; r < view.matrix.rows(); ++r)
            for (double x : view.matrix.row_vals(r))
                if (x != 0.0 && x != 1.0)
                    throw ValidationError(path + ": non-binary feature value " +
                                          std::to_string(x) + " in strict mode");
    }
    return view;
}

} // namespace

MultiViewGraph assemble_graph(int n_vertices, std::vector<std::pair<int, int>> edges,
                              std::vector<ViewFeatures> views,
                              const LoadOptions& options) {
    if (n_vertices <= 0)
        throw ShapeError("graph needs at least one vertex");
    if (views.empty())
        throw ShapeError("graph needs at least one feature view");
    for (const auto& view : views) {
        if (view.matrix.cols() != n_vertices)
            throw ShapeError("view " + std::to_string(view.view_index) + " has " +
                             std::to_string(view.matrix.cols()) + " vertices, graph has " +
                             std::to_string(n_vertices));
        if (view.n_features < 1 || view.matrix.rows() != view.n_features)
            throw ShapeError("view " + std::to_string(view.view_index) +
                             " feature count mismatch");
        if (options.strict_binary_features) {
            for (int r = 0; r < view.matrix.rows(); ++r)
                for (double x : view.matrix.row_vals(r))
                    if (x != 0.0 && x != 1.0)
                        throw ValidationError("non-binary feature value in strict mode");
        }
    }

    MultiViewGraph g;
    g.n_vertices = n_vertices;
    g.views = std::move(views);

    long self_loops = 0;
    for (auto& [a, b] : edges) {
        if (a < 0 || a >= n_vertices || b < 0 || b >= n_vertices)
            throw BoundsError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") outside vertex range [0, " + std::to_string(n_vertices) +
                              ")");
        if (a > b) std::swap(a, b);
    }
    std::erase_if(edges, [&](const auto& e) {
        if (e.first == e.second) {
            ++self_loops;
            return true;
        }
        return false;
    });
    std::sort(edges.begin(), edges.end());
    long raw = static_cast<long>(edges.size());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.stats.self_loops_dropped = self_loops;
    g.stats.duplicate_edges = raw - static_cast<long>(edges.size());

    std::vector<CooEntry> coo;
    coo.reserve(edges.size() * 2);
    for (const auto& [a, b] : edges) {
        coo.push_back({a, b, 1.0});
        coo.push_back({b, a, 1.0});
    }
    g.adjacency = CsrMatrix::from_coo(n_vertices, n_vertices, std::move(coo));

    for (int i = 0; i < n_vertices; ++i)
        if (g.adjacency.row_nnz(i) == 0) ++g.stats.isolated_vertices;
    return g;
}

MultiViewGraph load_graph(const std::string& edge_path,
                          const std::vector<std::string>& view_paths,
                          const LoadOptions& options) {
    if (view_paths.empty())
        throw ShapeError("at least one feature view file is required");

    std::vector<ViewFeatures> views;
    int n = -1;
    for (std::size_t i = 0; i < view_paths.size(); ++i) {
        views.push_back(load_view(view_paths[i], static_cast<int>(i) + 1, n, options));
        n = views.back().matrix.cols();
    }

    std::ifstream in = open_input(edge_path);
    std::string line;
    long line_no = 0;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        auto toks = split_ws(line);
        if (toks.size() != 2)
            throw ParseError(edge_path + ":" + std::to_string(line_no) +
                             ": expected two vertex indices");
        int a = parse_index(toks[0], edge_path, line_no, "vertex index");
        int b = parse_index(toks[1], edge_path, line_no, "vertex index");
        if (a >= n || b >= n)
            throw BoundsError(edge_path + ":" + std::to_string(line_no) + ": edge (" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              ") outside vertex range [0, " + std::to_string(n) + ")");
        edges.emplace_back(a, b);
    }
    return assemble_graph(n, std::move(edges), std::move(views), options);
}

std::vector<int> degrees(const MultiViewGraph& graph) {
    std::vector<int> d(graph.n_vertices);
    for (int i = 0; i < graph.n_vertices; ++i) d[i] = graph.adjacency.row_nnz(i);
    return d;
}

DiffusionWeights diffusion_reweight(const MultiViewGraph& graph) {
    const CsrMatrix& adj = graph.adjacency;
    std::vector<int> degs = degrees(graph);

    std::vector<CooEntry> coo;
    coo.reserve(static_cast<std::size_t>(adj.nnz()));
    for (int i = 0; i < graph.n_vertices; ++i) {
        auto nbrs = adj.row_cols(i);
        for (int j : nbrs) {
            if (j <= i) continue; // each unordered pair once, mirrored below
            if (degs[i] == 0 || degs[j] == 0)
                throw InternalError("edge (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") with a degree-0 endpoint");
            // common neighbors by merging the two sorted adjacency rows
            auto jn = adj.row_cols(j);
            std::size_t p = 0, q = 0;
            long common = 0;
            while (p < nbrs.size() && q < jn.size()) {
                if (nbrs[p] < jn[q])
                    ++p;
                else if (nbrs[p] > jn[q])
                    ++q;
                else {
                    ++common;
                    ++p;
                    ++q;
                }
            }
            double di = degs[i], dj = degs[j];
            double w = (di + dj) * (static_cast<double>(common) + 1.0) / (2.0 * di * dj);
            coo.push_back({i, j, w});
            coo.push_back({j, i, w});
        }
    }

    DiffusionWeights dw;
    dw.matrix = CsrMatrix::from_coo(graph.n_vertices, graph.n_vertices, std::move(coo));
    dw.source_degrees = std::move(degs);
    return dw;
}

PropagatedFeatures propagate_features(const MultiViewGraph& graph,
                                      const DiffusionWeights& dw) {
    if (dw.matrix.rows() != graph.n_vertices || dw.matrix.cols() != graph.n_vertices)
        throw ShapeError("diffusion weights do not match graph vertex count");
    PropagatedFeatures pf;
    pf.per_view.reserve(graph.views.size());
    for (const auto& view : graph.views)
        pf.per_view.push_back(kernels::spgemm(view.matrix, dw.matrix));
    return pf;
}

CsrMatrix stack_features(const MultiViewGraph& graph) {
    if (graph.views.empty())
        throw ShapeError("cannot stack an empty view list");
    std::vector<CooEntry> coo;
    int offset = 0;
    for (const auto& view : graph.views) {
        const CsrMatrix& m = view.matrix;
        for (int r = 0; r < m.rows(); ++r) {
            auto cols = m.row_cols(r);
            auto vals = m.row_vals(r);
            for (std::size_t p = 0; p < cols.size(); ++p)
                coo.push_back({offset + r, cols[p], vals[p]});
        }
        offset += view.n_features;
    }
    return CsrMatrix::from_coo(offset, graph.n_vertices, std::move(coo));
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<int> labels;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        auto toks = split_ws(line);
        if (toks.size() != 1)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected one label per line");
        int value = 0;
        auto [ptr, ec] =
            std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), value);
        if (ec != std::errc{} || ptr != toks[0].data() + toks[0].size())
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected integer label, got \"" + toks[0] + "\"");
        labels.push_back(value);
    }
    return labels;
}

void write_edge_file(const MultiViewGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (int i = 0; i < graph.n_vertices; ++i)
        for (int j : graph.adjacency.row_cols(i))
            if (i < j) out << i << ' ' << j << '\n';
    if (!out) throw IoError("failed writing " + path);
}

void write_view_file(const ViewFeatures& view, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << view.n_features << ' ' << view.matrix.cols() << '\n';
    out.precision(17);
    for (int r = 0; r < view.matrix.rows(); ++r) {
        auto cols = view.matrix.row_cols(r);
        auto vals = view.matrix.row_vals(r);
        for (std::size_t p = 0; p < cols.size(); ++p)
            out << r << ' ' << cols[p] << ' ' << vals[p] << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_labels_file(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (int label : labels) out << label << '\n';
    if (!out) throw IoError("failed writing " + path);
}

} // namespace gccfp
