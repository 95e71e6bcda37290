// Command-line driver for merge tree construction and comparison.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtted/mapping_json.hpp"
#include "mtted/mtted.hpp"

namespace fs = std::filesystem;
using namespace mtted;

namespace {

struct TreeFlags {
    std::string tree = "split";
    std::string cost = "winf";
    double eps = 0.0;
    std::optional<double> stab_cost;
    double simplify = 0.0;
    std::optional<std::size_t> threads;
    std::string out;
};

void add_tree_flag(CLI::App* cmd, TreeFlags& f)
{
    cmd->add_option("--tree", f.tree, "Merge tree type")
        ->check(CLI::IsMember({"join", "split"}))
        ->capture_default_str();
}

void add_distance_flags(CLI::App* cmd, TreeFlags& f)
{
    cmd->add_option("--cost", f.cost, "Cost model")
        ->check(CLI::IsMember({"winf", "overhang"}))
        ->capture_default_str();
    cmd->add_option("--eps", f.eps, "Stabilization threshold as a fraction of max persistence")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--stab-cost", f.stab_cost,
                    "Fixed cost added to the distance when stabilization merges saddles")
        ->check(CLI::NonNegativeNumber);
}

void add_out_flag(CLI::App* cmd, TreeFlags& f)
{
    cmd->add_option("--out", f.out, "Output path (default: standard output)");
}

StabilizationConfig stab_of(const TreeFlags& f)
{
    StabilizationConfig s;
    s.epsilon_fraction = f.eps;
    if (f.stab_cost) {
        s.add_fixed_cost = true;
        s.fixed_cost = *f.stab_cost;
    }
    return s;
}

template <typename Fn>
void with_output(const std::string& path, Fn fn)
{
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path);
    fn(out);
    if (!out)
        throw DataError("write failed for " + path);
}

std::string first_token(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        return tok;
    }
    return {};
}

ScalarGraph load_field(const std::string& path, const std::string& format)
{
    if (format == "binary")
        return grid_to_graph(load_grid(path, GridFormat::binary));
    if (first_token(path) == "vertices")
        return load_graph(path);
    return grid_to_graph(load_grid(path, GridFormat::text));
}

GridFormat grid_format(const std::string& s)
{
    return s == "binary" ? GridFormat::binary : GridFormat::text;
}

std::vector<std::string> labels_for(const std::vector<std::string>& paths)
{
    std::vector<std::string> labels;
    std::set<std::string> seen;
    bool unique = true;
    for (const auto& p : paths) {
        labels.push_back(fs::path(p).stem().string());
        unique = unique && seen.insert(labels.back()).second;
    }
    if (!unique)
        labels = paths;
    for (const auto& l : labels)
        if (l.find(',') != std::string::npos)
            throw DataError("label contains a comma: " + l);
    return labels;
}

std::vector<std::size_t> parse_dims(const std::string& s)
{
    std::vector<std::size_t> dims;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t v = 0;
        if (!detail::parse_int(part, v) || v == 0)
            throw DataError("bad dimension '" + part + "'");
        dims.push_back(v);
    }
    if (dims.empty() || dims.size() > 3)
        throw DataError("dims must list 1 to 3 sizes");
    return dims;
}

GaussianSpec parse_gaussian(const std::string& s, std::size_t rank)
{
    std::vector<double> v;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        double x = 0;
        if (!detail::parse_double(part, x))
            throw DataError("bad number '" + part + "' in gaussian '" + s + "'");
        v.push_back(x);
    }
    if (v.size() != rank + 2)
        throw DataError("gaussian '" + s + "' needs " + std::to_string(rank) +
                        " center coordinates, amplitude and sigma");
    GaussianSpec g;
    g.center.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank));
    g.amplitude = v[rank];
    g.sigma = v[rank + 1];
    return g;
}

std::string numbered(const std::string& dir, const std::string& stem, std::size_t i,
                     std::size_t count, GridFormat fmt)
{
    std::string num = std::to_string(i);
    std::string width = std::to_string(count > 0 ? count - 1 : 0);
    if (num.size() < width.size())
        num.insert(0, width.size() - num.size(), '0');
    const char* ext = fmt == GridFormat::binary ? ".bin" : ".txt";
    return (fs::path(dir) / (stem + "_" + num + ext)).string();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Merge tree edit distances for scalar fields"};
    app.require_subcommand(1);
    TreeFlags f;

    // tree build
    auto* tree_cmd = app.add_subcommand("tree", "Merge tree commands")->require_subcommand(1);
    auto* build = tree_cmd->add_subcommand("build", "Build a merge tree from a grid or graph");
    std::string field_path, field_format = "text";
    build->add_option("field", field_path, "Grid or graph file")->required();
    build->add_option("--format", field_format, "Grid file format")
        ->check(CLI::IsMember({"text", "binary"}));
    add_tree_flag(build, f);
    build->add_option("--simplify", f.simplify, "Persistence simplification threshold fraction")
        ->check(CLI::Range(0.0, 1.0));
    add_out_flag(build, f);

    // dist pair / dist matrix
    auto* dist = app.add_subcommand("dist", "Distance commands")->require_subcommand(1);
    auto* pair = dist->add_subcommand("pair", "Distances between two trees");
    std::string tree1, tree2;
    bool emit_mapping = false;
    pair->add_option("tree1", tree1)->required();
    pair->add_option("tree2", tree2)->required();
    add_distance_flags(pair, f);
    pair->add_flag("--emit-mapping", emit_mapping, "Print the edit mapping as JSON");
    add_out_flag(pair, f);

    auto* matrix = dist->add_subcommand("matrix", "All-pairs tree edit distance matrix");
    std::vector<std::string> tree_paths;
    matrix->add_option("trees", tree_paths, "Tree files")->required();
    add_distance_flags(matrix, f);
    matrix->add_option("--threads", f.threads, "Worker count (default: MERGE_TED_THREADS)")
        ->check(CLI::PositiveNumber);
    add_out_flag(matrix, f);

    // periodicity
    auto* period = app.add_subcommand("periodicity", "Lag profile of a distance matrix");
    std::string matrix_path;
    period->add_option("matrix", matrix_path, "Distance matrix CSV")->required();
    add_out_flag(period, f);

    // symmetry
    auto* sym = app.add_subcommand("symmetry", "Distances between sub-trees of one tree");
    std::string sym_tree;
    double min_pers = 0.0, min_scalar = 0.0;
    sym->add_option("tree", sym_tree)->required();
    sym->add_option("--min-persistence", min_pers, "Minimum root persistence of a sub-tree")
        ->required();
    sym->add_option("--min-scalar", min_scalar, "Scalar threshold that separates sub-trees")
        ->required();
    add_distance_flags(sym, f);
    sym->add_option("--threads", f.threads, "Worker count")->check(CLI::PositiveNumber);
    add_out_flag(sym, f);

    // gen gaussians
    auto* gen = app.add_subcommand("gen", "Synthetic fields")->require_subcommand(1);
    auto* gauss = gen->add_subcommand("gaussians", "Sum of gaussians on a grid");
    std::string dims_str, preset, out_dir, out_format = "text";
    std::vector<std::string> gauss_specs;
    std::size_t frames = 60, period_len = 20, size = 150;
    gauss->add_option("--dims", dims_str, "Grid sizes, e.g. 64,64");
    gauss->add_option("--gauss", gauss_specs, "Gaussian as center...,amplitude,sigma");
    gauss->add_option("--preset", preset, "Built-in experiment field")
        ->check(CLI::IsMember({"periodic", "symmetry", "two-gaussian"}));
    gauss->add_option("--frames", frames, "Frame count for the periodic preset");
    gauss->add_option("--period", period_len, "Period of the periodic preset");
    gauss->add_option("--size", size, "Grid side for the two-gaussian preset");
    gauss->add_option("--out-dir", out_dir, "Directory for the periodic preset frames");
    gauss->add_option("--format", out_format)->check(CLI::IsMember({"text", "binary"}));
    add_out_flag(gauss, f);

    // field subsample / smooth
    auto* field = app.add_subcommand("field", "Grid preprocessing")->require_subcommand(1);
    auto* sub = field->add_subcommand("subsample", "Subsample a grid");
    std::string grid_path;
    std::size_t step = 0, reduce_by = 0, iterations = 0;
    sub->add_option("grid", grid_path)->required();
    sub->add_option("--format", field_format)->check(CLI::IsMember({"text", "binary"}));
    auto* step_opt = sub->add_option("--step", step, "Keep every step-th sample per axis")
                         ->check(CLI::PositiveNumber);
    auto* sched_opt =
        sub->add_option("--schedule", reduce_by, "Remove this many samples per axis each iteration")
            ->check(CLI::PositiveNumber);
    sub->add_option("--iterations", iterations, "Iterations of the schedule");
    sub->add_option("--out-dir", out_dir, "Directory for schedule outputs");
    step_opt->excludes(sched_opt);
    add_out_flag(sub, f);

    auto* smooth = field->add_subcommand("smooth", "Laplacian smoothing");
    std::size_t iters = 1;
    smooth->add_option("grid", grid_path)->required();
    smooth->add_option("--format", field_format)->check(CLI::IsMember({"text", "binary"}));
    smooth->add_option("--iters", iters, "Iterations")->capture_default_str();
    smooth->add_option("--each", out_dir, "Write every iteration into this directory");
    add_out_flag(smooth, f);

    // diag export
    auto* diag = app.add_subcommand("diag", "Persistence diagrams")->require_subcommand(1);
    auto* exp = diag->add_subcommand("export", "Write a tree's diagram as CSV");
    std::string diag_tree;
    exp->add_option("tree", diag_tree)->required();
    add_out_flag(exp, f);

    auto* oracle = app.add_subcommand("oracle", "Brute-force distance for tiny trees");
    oracle->group("");
    oracle->add_option("tree1", tree1)->required();
    oracle->add_option("tree2", tree2)->required();
    oracle->add_option("--cost", f.cost)->check(CLI::IsMember({"winf", "overhang"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const CostModel model = parse_cost_model(f.cost);

        if (build->parsed()) {
            MergeTree t = make_merge_tree(load_field(field_path, field_format),
                                          parse_orientation(f.tree));
            if (f.simplify > 0)
                t = simplify(t, f.simplify);
            with_output(f.out, [&](std::ostream& out) { write_tree(out, t); });
            std::cerr << "nodes " << t.size() << " max_persistence "
                      << detail::format_double(t.max_persistence()) << '\n';
        } else if (pair->parsed()) {
            MergeTree a = load_tree(tree1), b = load_tree(tree2);
            TedResult r = ted(a, b, model, stab_of(f));
            double w1 = wasserstein1(diagram_of(a), diagram_of(b));
            double db = bottleneck(diagram_of(a), diagram_of(b));
            with_output(f.out, [&](std::ostream& out) {
                if (emit_mapping) {
                    out << mapping_to_json(r).dump(2) << '\n';
                    return;
                }
                out << "D " << detail::format_double(r.distance) << '\n'
                    << "W1 " << detail::format_double(w1) << '\n'
                    << "DB " << detail::format_double(db) << '\n';
            });
        } else if (matrix->parsed()) {
            if (tree_paths.size() < 2)
                throw DataError("dist matrix needs at least two trees");
            std::vector<MergeTree> trees;
            for (const auto& p : tree_paths)
                trees.push_back(load_tree(p));
            DistanceMatrix dm = compute_distance_matrix(trees, labels_for(tree_paths), model,
                                                        stab_of(f), resolve_threads(f.threads));
            with_output(f.out, [&](std::ostream& out) { write_matrix_csv(out, dm); });
        } else if (period->parsed()) {
            PeriodicityReport r = detect_periodicity(load_matrix_csv(matrix_path));
            with_output(f.out, [&](std::ostream& out) {
                out << "lag,mean\n";
                for (auto [lag, m] : r.lag_means)
                    out << lag << ',' << detail::format_double(m) << '\n';
                if (r.period)
                    out << "period " << *r.period << '\n';
                else
                    out << "period none (flat lag profile)\n";
                out << "local_minima";
                for (auto l : r.local_minima)
                    out << ' ' << l;
                out << '\n';
            });
        } else if (sym->parsed()) {
            DistanceMatrix dm = symmetry_matrix(load_tree(sym_tree), min_pers, min_scalar, model,
                                                stab_of(f), resolve_threads(f.threads));
            with_output(f.out, [&](std::ostream& out) { write_matrix_csv(out, dm); });
        } else if (gauss->parsed()) {
            GridFormat fmt = grid_format(out_format);
            if (preset == "periodic") {
                if (out_dir.empty())
                    throw DataError("the periodic preset needs --out-dir");
                fs::create_directories(out_dir);
                for (std::size_t t = 0; t < frames; ++t)
                    save_grid(numbered(out_dir, "frame", t, frames, fmt),
                              periodic_gaussian_frame(100, 25, period_len, t), fmt);
            } else {
                ScalarGrid g;
                if (preset == "symmetry") {
                    g = symmetry_blob_field();
                } else if (preset == "two-gaussian") {
                    if (size < 2)
                        throw DataError("--size must be at least 2");
                    g = two_gaussian_field(size);
                } else {
                    if (dims_str.empty())
                        throw DataError("gen gaussians needs --dims or --preset");
                    auto dims = parse_dims(dims_str);
                    std::vector<GaussianSpec> specs;
                    for (const auto& s : gauss_specs)
                        specs.push_back(parse_gaussian(s, dims.size()));
                    g = gen_gaussian_sum(dims, specs);
                }
                if (f.out.empty()) {
                    if (fmt == GridFormat::binary)
                        throw DataError("binary output needs --out");
                    write_grid_text(std::cout, g);
                } else {
                    save_grid(f.out, g, fmt);
                }
            }
        } else if (sub->parsed()) {
            GridFormat fmt = grid_format(field_format);
            ScalarGrid g = load_grid(grid_path, fmt);
            if (*sched_opt) {
                if (out_dir.empty() || iterations == 0)
                    throw DataError("--schedule needs --iterations and --out-dir");
                auto grids = subsample_schedule(g, reduce_by, iterations);
                fs::create_directories(out_dir);
                for (std::size_t i = 0; i < grids.size(); ++i)
                    save_grid(numbered(out_dir, "iter", i, grids.size(), fmt), grids[i], fmt);
            } else {
                if (step == 0)
                    throw DataError("field subsample needs --step or --schedule");
                ScalarGrid s = subsample(g, step);
                if (f.out.empty())
                    write_grid_text(std::cout, s);
                else
                    save_grid(f.out, s, fmt);
            }
        } else if (smooth->parsed()) {
            GridFormat fmt = grid_format(field_format);
            ScalarGrid g = load_grid(grid_path, fmt);
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                save_grid(numbered(out_dir, "smooth", 0, iters + 1, fmt), g, fmt);
                for (std::size_t i = 1; i <= iters; ++i) {
                    g = smooth_laplacian(g, 1);
                    save_grid(numbered(out_dir, "smooth", i, iters + 1, fmt), g, fmt);
                }
            } else {
                g = smooth_laplacian(g, iters);
            }
            if (f.out.empty() && out_dir.empty())
                write_grid_text(std::cout, g);
            else if (!f.out.empty())
                save_grid(f.out, g, fmt);
        } else if (exp->parsed()) {
            PersistenceDiagram d = diagram_of(load_tree(diag_tree));
            with_output(f.out, [&](std::ostream& out) { write_diagram_csv(out, d); });
        } else if (oracle->parsed()) {
            OracleResult r = brute_force_dc(load_tree(tree1), load_tree(tree2), model);
            std::cout << "Dc " << detail::format_double(r.distance) << '\n'
                      << "mappings " << r.mappings_enumerated << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
