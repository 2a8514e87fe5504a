// Command-line front end: fit, sweep, synth, and eval subcommands over the
// plain-text dataset formats (see README).

#include "gccfp/error.hpp"
#include "gccfp/eval.hpp"
#include "gccfp/factors.hpp"
#include "gccfp/graph.hpp"
#include "gccfp/kernels.hpp"
#include "gccfp/optimizer.hpp"
#include "gccfp/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gccfp;

namespace {

constexpr std::uint64_t kDefaultSeed = 42; // fixed so runs reproduce by default

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open " + path.string());
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

struct HyperFlags {
    Hyperparams hp;
    std::string epsilon_mode = "relative";

    void attach(CLI::App* cmd, bool with_alpha_lambda = true) {
        if (with_alpha_lambda) { // sweep binds these names to its grids instead
            cmd->add_option("--alpha", hp.alpha, "structural weight")
                ->check(CLI::NonNegativeNumber);
            cmd->add_option("--lambda", hp.lambda, "propagation-regularizer weight")
                ->check(CLI::NonNegativeNumber);
        }
        cmd->add_option("--delta", hp.delta, "orthogonality penalty")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--k", hp.k_clusters, "number of clusters")->required();
        cmd->add_option("--s", hp.s_dim, "propagation latent dimension (default: k)");
        cmd->add_option("--t-max", hp.t_max, "maximum iterations");
        cmd->add_option("--epsilon", hp.epsilon, "convergence threshold");
        cmd->add_option("--epsilon-mode", epsilon_mode, "absolute or relative")
            ->check(CLI::IsMember({"absolute", "relative"}));
        cmd->add_option("--seed", hp.seed, "random seed");
    }

    Hyperparams resolve() const {
        Hyperparams out = hp;
        out.epsilon_mode =
            epsilon_mode == "absolute" ? EpsilonMode::absolute : EpsilonMode::relative;
        return out;
    }
};

json hyperparams_json(const Hyperparams& hp) {
    return json{{"alpha", hp.alpha},
                {"lambda", hp.lambda},
                {"delta", hp.delta},
                {"k", hp.k_clusters},
                {"s", hp.s()},
                {"t_max", hp.t_max},
                {"epsilon", hp.epsilon},
                {"epsilon_mode",
                 hp.epsilon_mode == EpsilonMode::absolute ? "absolute" : "relative"},
                {"seed", hp.seed}};
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const json& config, const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs) {
    json manifest;
    manifest["tool"] = "gccfp";
    manifest["subcommand"] = subcommand;
    manifest["config"] = config;
    json hashes = json::object();
    for (const auto& path : inputs) hashes[path.string()] = hex64(fnv1a_file(path));
    manifest["input_hashes_fnv1a64"] = hashes;
    manifest["outputs"] = outputs;
    write_json_file(out_dir / "manifest.json", manifest);
}

json eval_report_json(const EvalReport& report) {
    return json{{"nmi", report.nmi},
                {"accuracy", report.accuracy},
                {"n_scored", report.n_scored},
                {"contingency", report.contingency}};
}

void print_load_warnings(const MultiViewGraph& graph) {
    if (graph.stats.self_loops_dropped > 0)
        std::cerr << "warning: dropped " << graph.stats.self_loops_dropped
                  << " self-loop(s)\n";
    if (graph.stats.duplicate_edges > 0)
        std::cerr << "warning: merged " << graph.stats.duplicate_edges
                  << " duplicate edge(s)\n";
    if (graph.stats.isolated_vertices > 0)
        std::cerr << "warning: " << graph.stats.isolated_vertices
                  << " isolated vertex/vertices kept as zero rows\n";
}

struct FitArgs {
    std::string edges;
    std::vector<std::string> views;
    std::string labels;
    std::string out_dir = "gccfp-out";
    bool strict_binary = false;
    int checkpoint_every = 50;
    HyperFlags hyper;
};

int run_fit(const FitArgs& args) {
    fs::create_directories(args.out_dir);
    Hyperparams hp = args.hyper.resolve();

    LoadOptions load_options;
    load_options.strict_binary_features = args.strict_binary;
    MultiViewGraph graph =
        load_graph(args.edges, args.views, load_options);
    print_load_warnings(graph);

    std::vector<int> truth;
    if (!args.labels.empty()) {
        truth = load_labels(args.labels);
        if (static_cast<int>(truth.size()) != graph.n_vertices)
            throw ShapeError("labels file has " + std::to_string(truth.size()) +
                             " lines, graph has " + std::to_string(graph.n_vertices) +
                             " vertices");
    }

    FitData data = FitData::prepare(graph);
    FitOptions options;
    fs::path out_dir(args.out_dir);
    options.checkpoint_every = args.checkpoint_every;
    if (args.checkpoint_every > 0) {
        options.checkpoint = [&](int iteration, const LatentFactors& factors) {
            char name[64];
            std::snprintf(name, sizeof name, "factors_iter_%06d.txt", iteration);
            save_factors(factors, (out_dir / name).string());
        };
    }
    FitResult result = fit(data, hp, options);

    ClusterAssignment assignment = extract_clusters(result.factors.v);
    if (assignment.zero_rows > 0)
        std::cerr << "warning: " << assignment.zero_rows
                  << " all-zero membership row(s) assigned to cluster 0\n";

    {
        std::ofstream out(out_dir / "assignments.txt");
        if (!out) throw IoError("cannot write assignments.txt");
        for (int label : assignment.labels) out << label << '\n';
    }
    {
        std::ofstream out(out_dir / "trace.csv");
        if (!out) throw IoError("cannot write trace.csv");
        write_trace_csv(result.trace, out);
    }
    save_factors(result.factors, (out_dir / "factors.txt").string());

    json report;
    report["n_vertices"] = graph.n_vertices;
    report["n_features"] = graph.total_features();
    report["n_views"] = graph.n_views();
    report["hyperparams"] = hyperparams_json(hp);
    report["iterations"] = result.trace.iterations.size();
    report["converged"] = result.trace.converged;
    report["stop_reason"] = to_string(result.trace.stop_reason);
    report["objective_initial"] = result.trace.initial.total;
    report["objective_final"] = result.trace.final_total();
    report["zero_membership_rows"] = assignment.zero_rows;
    EvalReport ev;
    if (!truth.empty()) {
        ev = evaluate(assignment, truth);
        report["evaluation"] = eval_report_json(ev);
    }
    write_json_file(out_dir / "report.json", report);

    std::vector<fs::path> inputs;
    inputs.emplace_back(args.edges);
    for (const auto& v : args.views) inputs.emplace_back(v);
    if (!args.labels.empty()) inputs.emplace_back(args.labels);
    json config;
    config["edges"] = args.edges;
    config["views"] = args.views;
    config["labels"] = args.labels;
    config["strict_binary"] = args.strict_binary;
    config["hyperparams"] = hyperparams_json(hp);
    write_manifest(out_dir, "fit", config, inputs,
                   {"assignments.txt", "trace.csv", "factors.txt", "report.json"});

    std::cout << "fit: " << result.trace.iterations.size() << " iteration(s), "
              << (result.trace.converged ? "converged" : "not converged") << " ("
              << to_string(result.trace.stop_reason)
              << "), objective " << result.trace.final_total() << '\n';
    if (!truth.empty())
        std::cout << "nmi " << ev.nmi << ", accuracy " << ev.accuracy << " over "
                  << ev.n_scored << " vertices\n";
    return 0;
}

struct SweepArgs {
    std::string edges;
    std::vector<std::string> views;
    std::string labels;
    std::string out_dir = "gccfp-out";
    bool strict_binary = false;
    int jobs = 1;
    std::vector<double> alpha_grid{0.1, 0.5, 1, 5, 10, 20, 50, 100};
    std::vector<double> lambda_grid{0.001, 0.01, 0.1, 1, 5, 10, 50, 100};
    HyperFlags hyper;
};

struct SweepCell {
    double alpha = 0.0;
    double lambda = 0.0;
    double nmi = 0.0;
    double accuracy = 0.0;
    long iterations = 0;
    bool converged = false;
    double objective_final = 0.0;
    std::string error;
};

int run_sweep(const SweepArgs& args) {
    if (args.alpha_grid.empty() || args.lambda_grid.empty())
        throw ValidationError("sweep grids must be non-empty");
    if (args.labels.empty())
        throw ValidationError("sweep requires --labels to score the grid");
    fs::create_directories(args.out_dir);
    Hyperparams base = args.hyper.resolve();

    LoadOptions load_options;
    load_options.strict_binary_features = args.strict_binary;
    MultiViewGraph graph = load_graph(args.edges, args.views, load_options);
    print_load_warnings(graph);
    std::vector<int> truth = load_labels(args.labels);
    if (static_cast<int>(truth.size()) != graph.n_vertices)
        throw ShapeError("labels length does not match vertex count");
    const FitData data = FitData::prepare(graph); // shared read-only across cells

    std::vector<SweepCell> cells;
    for (double a : args.alpha_grid)
        for (double l : args.lambda_grid) {
            SweepCell cell;
            cell.alpha = a;
            cell.lambda = l;
            cells.push_back(std::move(cell));
        }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            SweepCell& cell = cells[i];
            try {
                Hyperparams hp = base;
                hp.alpha = cell.alpha;
                hp.lambda = cell.lambda;
                FitResult result = fit(data, hp);
                ClusterAssignment assignment = extract_clusters(result.factors.v);
                EvalReport report = evaluate(assignment, truth);
                cell.nmi = report.nmi;
                cell.accuracy = report.accuracy;
                cell.iterations = static_cast<long>(result.trace.iterations.size());
                cell.converged = result.trace.converged;
                cell.objective_final = result.trace.final_total();
            } catch (const Error& e) {
                cell.error = std::string(e.tag()) + ": " + e.what();
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    int jobs = std::max(1, args.jobs);
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::path out_dir(args.out_dir);
    {
        std::ofstream out(out_dir / "sweep.csv");
        if (!out) throw IoError("cannot write sweep.csv");
        out.precision(17);
        out << "alpha,lambda,nmi,accuracy,iterations,converged,objective_final,error\n";
        for (const auto& cell : cells) {
            out << cell.alpha << ',' << cell.lambda << ',' << cell.nmi << ','
                << cell.accuracy << ',' << cell.iterations << ','
                << (cell.converged ? 1 : 0) << ',' << cell.objective_final << ','
                << cell.error << '\n';
        }
    }

    std::vector<fs::path> inputs;
    inputs.emplace_back(args.edges);
    for (const auto& v : args.views) inputs.emplace_back(v);
    inputs.emplace_back(args.labels);
    json config;
    config["edges"] = args.edges;
    config["views"] = args.views;
    config["labels"] = args.labels;
    config["alpha_grid"] = args.alpha_grid;
    config["lambda_grid"] = args.lambda_grid;
    config["jobs"] = args.jobs;
    config["hyperparams"] = hyperparams_json(base);
    write_manifest(out_dir, "sweep", config, inputs, {"sweep.csv"});

    long failed = 0;
    for (const auto& cell : cells)
        if (!cell.error.empty()) ++failed;
    std::cout << "sweep: " << cells.size() << " cell(s), " << failed << " failed\n";
    return 0;
}

struct SynthArgs {
    int n = 120;
    int k = 3;
    double p_in = 0.3;
    double p_out = 0.02;
    std::vector<std::string> view_specs; // "fpc:noise"
    std::uint64_t seed = kDefaultSeed;
    std::string out_dir = "gccfp-out";
};

int run_synth(const SynthArgs& args) {
    PlantedSpec spec;
    spec.n_vertices = args.n;
    spec.k_clusters = args.k;
    spec.p_in = args.p_in;
    spec.p_out = args.p_out;
    spec.seed = args.seed;
    if (args.view_specs.empty()) {
        spec.views.push_back({3, 0.05});
    } else {
        for (const auto& raw : args.view_specs) {
            auto colon = raw.find(':');
            try {
                PlantedViewSpec vs;
                vs.features_per_cluster = std::stoi(raw.substr(0, colon));
                vs.flip_noise =
                    colon == std::string::npos ? 0.0 : std::stod(raw.substr(colon + 1));
                spec.views.push_back(vs);
            } catch (const std::exception&) {
                throw ParseError("bad --view-spec \"" + raw +
                                 "\", expected features_per_cluster:flip_noise");
            }
        }
    }

    PlantedGraph pg = generate(spec);
    fs::create_directories(args.out_dir);
    fs::path out_dir(args.out_dir);

    write_edge_file(pg.graph, (out_dir / "edges.txt").string());
    std::vector<std::string> outputs{"edges.txt", "labels.txt"};
    for (int i = 0; i < pg.graph.n_views(); ++i) {
        std::string name = "view" + std::to_string(i) + ".txt";
        write_view_file(pg.graph.views[i], (out_dir / name).string());
        outputs.push_back(name);
    }
    write_labels_file(pg.labels, (out_dir / "labels.txt").string());

    json config;
    config["n"] = args.n;
    config["k"] = args.k;
    config["p_in"] = args.p_in;
    config["p_out"] = args.p_out;
    config["views"] = args.view_specs;
    config["seed"] = args.seed;
    write_manifest(out_dir, "synth", config, {}, outputs);

    std::cout << "synth: " << pg.graph.n_vertices << " vertices, " << pg.graph.n_edges()
              << " edges, " << pg.graph.n_views() << " view(s) -> " << args.out_dir
              << '\n';
    return 0;
}

struct EvalArgs {
    std::string assignments;
    std::string labels;
    std::string out_dir = "gccfp-out";
};

int run_eval(const EvalArgs& args) {
    std::vector<int> pred = load_labels(args.assignments);
    std::vector<int> truth = load_labels(args.labels);
    if (pred.size() != truth.size())
        throw ShapeError("assignments (" + std::to_string(pred.size()) + ") and labels (" +
                         std::to_string(truth.size()) + ") differ in length");

    int k = 0;
    for (int label : pred) {
        if (label < 0) throw ValidationError("assignments must be nonnegative");
        k = std::max(k, label + 1);
    }
    ClusterAssignment assignment;
    assignment.labels = pred;
    assignment.k_clusters = k;
    EvalReport report = evaluate(assignment, truth);

    fs::create_directories(args.out_dir);
    fs::path out_dir(args.out_dir);
    write_json_file(out_dir / "report.json", eval_report_json(report));
    write_manifest(out_dir, "eval",
                   json{{"assignments", args.assignments}, {"labels", args.labels}},
                   {fs::path(args.assignments), fs::path(args.labels)}, {"report.json"});

    std::cout << "nmi " << report.nmi << ", accuracy " << report.accuracy << " over "
              << report.n_scored << " vertices\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view attributed-graph clustering via cross-view feature "
                 "propagation and nonnegative factorization"};
    app.require_subcommand(1);
    bool serial = false;
    app.add_flag("--serial", serial, "use the serial reference kernels");

    FitArgs fit_args;
    fit_args.hyper.hp.seed = kDefaultSeed;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a dataset and extract clusters");
    fit_cmd->add_option("--edges", fit_args.edges, "edge list file")->required();
    fit_cmd->add_option("--view", fit_args.views, "feature view file (repeatable, ordered)")
        ->required();
    fit_cmd->add_option("--labels", fit_args.labels, "ground-truth labels file");
    fit_cmd->add_option("--out-dir", fit_args.out_dir, "output directory");
    fit_cmd->add_flag("--strict-binary", fit_args.strict_binary,
                      "reject non-binary feature values");
    fit_cmd->add_option("--checkpoint-every", fit_args.checkpoint_every,
                        "factor checkpoint cadence in iterations (0 disables)");
    fit_args.hyper.attach(fit_cmd);

    SweepArgs sweep_args;
    sweep_args.hyper.hp.seed = kDefaultSeed;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "fit over an alpha x lambda grid and score each cell");
    sweep_cmd->add_option("--edges", sweep_args.edges, "edge list file")->required();
    sweep_cmd->add_option("--view", sweep_args.views, "feature view file (repeatable)")
        ->required();
    sweep_cmd->add_option("--labels", sweep_args.labels, "ground-truth labels file")
        ->required();
    sweep_cmd->add_option("--out-dir", sweep_args.out_dir, "output directory");
    sweep_cmd->add_flag("--strict-binary", sweep_args.strict_binary,
                        "reject non-binary feature values");
    sweep_cmd->add_option("--alpha", sweep_args.alpha_grid,
                          "alpha grid values (default: paper grid)");
    sweep_cmd->add_option("--lambda", sweep_args.lambda_grid,
                          "lambda grid values (default: paper grid)");
    sweep_cmd->add_option("--jobs", sweep_args.jobs, "parallel sweep cells");
    sweep_args.hyper.attach(sweep_cmd, /*with_alpha_lambda=*/false);

    SynthArgs synth_args;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "generate a planted-partition dataset");
    synth_cmd->add_option("--n", synth_args.n, "vertices");
    synth_cmd->add_option("--k", synth_args.k, "clusters");
    synth_cmd->add_option("--p-in", synth_args.p_in, "within-cluster edge probability");
    synth_cmd->add_option("--p-out", synth_args.p_out, "between-cluster edge probability");
    synth_cmd->add_option("--view-spec", synth_args.view_specs,
                          "view as features_per_cluster:flip_noise (repeatable)");
    synth_cmd->add_option("--seed", synth_args.seed, "random seed");
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory");

    EvalArgs eval_args;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "score precomputed assignments against labels");
    eval_cmd->add_option("--assignments", eval_args.assignments, "assignment file")
        ->required();
    eval_cmd->add_option("--labels", eval_args.labels, "ground-truth labels file")
        ->required();
    eval_cmd->add_option("--out-dir", eval_args.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);
    kernels::set_backend(serial ? kernels::Backend::serial : kernels::Backend::parallel);

    try {
        if (fit_cmd->parsed()) return run_fit(fit_args);
        if (sweep_cmd->parsed()) return run_sweep(sweep_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.tag() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
