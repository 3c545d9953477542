#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "smw/baselines.hpp"
#include "smw/bench.hpp"
#include "smw/grid.hpp"
#include "smw/io.hpp"
#include "smw/metrics.hpp"
#include "smw/oracle.hpp"
#include "smw/random_graph.hpp"
#include "smw/semantic_mutex_watershed.hpp"
#include "smw/tensor.hpp"

using namespace smw;

namespace {

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError: return 2;
    case ErrorCode::ShapeMismatch: return 3;
    case ErrorCode::TooLargeForOracle: return 4;
    default: return 1;
    }
}

// "-" is the given default stream.
void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
    if (path == "-") {
        fn(fallback);
        fallback.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    fn(out);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

void write_label_map(const std::string& prefix, const PanopticLabelMap& m) {
    write_tensor(prefix + "_class", m.class_tensor());
    write_tensor(prefix + "_instance", m.instance_tensor());
}

PanopticLabelMap read_label_map(const std::string& prefix) {
    return PanopticLabelMap::from_tensors(read_tensor<std::int32_t>(prefix + "_class"),
                                          read_tensor<std::int32_t>(prefix + "_instance"));
}

// Unit offsets along each axis.
OffsetPattern nearest_neighbours(std::size_t dims) {
    OffsetPattern p;
    for (std::size_t d = 0; d < dims; ++d) {
        std::vector<std::int64_t> delta(dims, 0);
        delta[d] = 1;
        p.add(delta, Polarity::Attractive);
    }
    return p;
}

const char* pass(bool ok) { return ok ? "PASS" : "FAIL"; }

struct GridInputs {
    std::string affinities, offsets, semantic;
    double semantic_epsilon = 0.0;
    std::optional<double> threshold;

    void add_to(CLI::App* cmd, bool semantic_required) {
        cmd->add_option("--affinities", affinities, "affinity tensor (channel per offset)")->required();
        cmd->add_option("--offsets", offsets, "offsets file")->required();
        auto* s = cmd->add_option("--semantic", semantic, "semantic probability tensor (channel per class)");
        if (semantic_required) s->required();
        cmd->add_option("--semantic-epsilon", semantic_epsilon, "drop semantic edges with probability <= this");
        cmd->add_option("--threshold", threshold, "split every channel into attractive/repulsive at this value");
    }

    ExtendedGraph graph(std::vector<std::size_t>* shape) const {
        const auto a = read_tensor<float>(affinities);
        const auto pattern = read_offsets_file(offsets);
        std::optional<DenseTensor<float>> sem;
        if (!semantic.empty()) sem = read_tensor<float>(semantic);
        GridGraphOptions opts;
        opts.semantic_epsilon = semantic_epsilon;
        opts.split_threshold = threshold;
        *shape = a.trailing_shape();
        return build_grid_graph(a, pattern, sem ? &*sem : nullptr, opts);
    }
};

// ---- segment-graph ----

struct SegmentGraphArgs {
    std::string graph, nodes = "-", summary = "-";
    bool no_timing = false;
};

int segment_graph(const SegmentGraphArgs& args) {
    const ExtendedGraph g = read_graph_file(args.graph);
    const auto t0 = std::chrono::steady_clock::now();
    const SegmentationResult r = run_smw(g, {.exact_energy = true});
    const auto t1 = std::chrono::steady_clock::now();

    nlohmann::ordered_json j;
    j["num_nodes"] = g.num_nodes();
    j["num_labels"] = g.num_labels();
    j["num_edges"] = g.num_edges();
    j["num_clusters"] = r.num_clusters();
    j["num_active"] = std::count(r.active.begin(), r.active.end(), true);
    j["energy"] = r.energy;
    j["exact_energy"] = to_decimal(*r.exact_energy);
    if (!args.no_timing) j["runtime_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();

    with_output(args.nodes, std::cout, [&](std::ostream& out) { write_node_assignment(out, r); });
    with_output(args.summary, std::cerr, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    return 0;
}

// ---- segment-grid ----

struct SegmentGridArgs {
    GridInputs in;
    std::string out;
};

int segment_grid(const SegmentGridArgs& args) {
    std::vector<std::size_t> shape;
    const ExtendedGraph g = args.in.graph(&shape);
    write_label_map(args.out, label_map_from_segmentation(run_smw(g), shape));
    return 0;
}

// ---- verify ----

struct VerifyArgs {
    std::string graph;
    std::size_t random = 0;
    std::uint64_t seed = 0;
    bool constraints_only = false;
};

struct Verdict {
    bool optimal = true, mutex = true, label = true, polytope = true;
    std::string smw_energy, oracle_energy;
};

Verdict verify_one(const ExtendedGraph& g, bool constraints_only) {
    Verdict v;
    const SegmentationResult r = run_smw(g, {.exact_energy = true});
    v.smw_energy = to_decimal(*r.exact_energy);
    if (!constraints_only) {
        const OracleSolution opt = brute_force_optimum(g);
        v.oracle_energy = to_decimal(opt.energy);
        v.optimal = opt.energy == *r.exact_energy;
    }
    v.mutex = check_mutex_constraint(g, r.active);
    v.label = check_label_constraint(g, r.active);
    const DensifiedCut dense = densify_cut(g, r);
    v.polytope = check_smwc_polytope(dense.graph, dense.y).feasible();
    return v;
}

int verify(const VerifyArgs& args) {
    if (args.graph.empty() == (args.random == 0))
        throw CLI::ValidationError("verify", "give either a graph file or --random N");
    if (!args.graph.empty()) {
        const Verdict v = verify_one(read_graph_file(args.graph), args.constraints_only);
        std::cout << "verdict=" << (args.constraints_only ? "UNCHECKED" : v.optimal ? "OPTIMAL" : "SUBOPTIMAL") << '\n'
                  << "smw_energy=" << v.smw_energy << '\n';
        if (!args.constraints_only) std::cout << "oracle_energy=" << v.oracle_energy << '\n';
        std::cout << "mutex_constraint=" << pass(v.mutex) << '\n'
                  << "label_constraint=" << pass(v.label) << '\n'
                  << "polytope=" << pass(v.polytope) << '\n'
                  << "constraints=" << pass(v.mutex && v.label && v.polytope) << '\n';
        return v.optimal && v.mutex && v.label && v.polytope ? 0 : 1;
    }
    Rng rng(args.seed);
    std::size_t optimal = 0, mutex = 0, label = 0, polytope = 0;
    for (std::size_t i = 0; i < args.random; ++i) {
        const Verdict v = verify_one(random_extended_graph(rng), args.constraints_only);
        optimal += v.optimal;
        mutex += v.mutex;
        label += v.label;
        polytope += v.polytope;
    }
    const std::size_t n = args.random;
    const bool all = optimal == n && mutex == n && label == n && polytope == n;
    std::cout << "graphs=" << n << '\n';
    if (!args.constraints_only) std::cout << "optimal=" << optimal << '/' << n << '\n';
    std::cout << "mutex_constraint=" << mutex << '/' << n << '\n'
              << "label_constraint=" << label << '/' << n << '\n'
              << "polytope=" << polytope << '/' << n << '\n'
              << "verdict=" << (args.constraints_only ? (all ? "CONSTRAINTS_PASS" : "CONSTRAINTS_FAIL")
                                                      : (all ? "OPTIMAL" : "FAIL"))
              << '\n';
    return all ? 0 : 1;
}

// ---- bench ----

struct BenchArgs {
    BenchConfig cfg;
    std::string out = "-";
    std::optional<double> max_slope;
    bool no_timing = false;
};

int bench(const BenchArgs& args) {
    if (args.cfg.sizes.empty() || !std::is_sorted(args.cfg.sizes.begin(), args.cfg.sizes.end()) ||
        std::adjacent_find(args.cfg.sizes.begin(), args.cfg.sizes.end()) != args.cfg.sizes.end() ||
        args.cfg.sizes.front() == 0)
        throw CLI::ValidationError("--sizes", "sizes must be positive and strictly ascending");
    if (args.cfg.repeats == 0) throw CLI::ValidationError("--repeats", "at least one repeat");
    if (args.no_timing && args.max_slope) throw CLI::ValidationError("--max-slope", "needs timing");

    const BenchReport report = run_bench(args.cfg);
    with_output(args.out, std::cout, [&](std::ostream& out) { write_bench_csv(out, report, !args.no_timing); });
    if (args.no_timing) return 0;
    for (const BenchSummary& s : report.medians)
        std::cerr << "median." << s.size << '=' << s.median_seconds << '\n';
    std::cerr << "slope=" << report.slope << '\n';
    if (args.max_slope) {
        const bool ok = report.slope <= *args.max_slope;
        std::cerr << "slope_check=" << pass(ok) << '\n';
        return ok ? 0 : 1;
    }
    return 0;
}

// ---- eval ----

struct EvalArgs {
    std::string pred, gt, out;
    std::vector<LabelId> things, stuff;
    bool no_merge_stuff = false, skip_pred_only = false;
};

int eval(const EvalArgs& args) {
    PqOptions opts;
    opts.merge_stuff = !args.no_merge_stuff;
    opts.include_pred_only_classes = !args.skip_pred_only;
    const PqReport r = panoptic_quality(read_label_map(args.pred), read_label_map(args.gt),
                                        {args.things.begin(), args.things.end()},
                                        {args.stuff.begin(), args.stuff.end()}, opts);
    std::cout << to_key_value(r);
    if (!args.out.empty()) with_output(args.out, std::cout, [&](std::ostream& o) { o << to_json(r).dump(2) << '\n'; });
    return 0;
}

// ---- baseline ----

struct MwsMaxArgs {
    GridInputs in;
    std::string graph, nodes = "-", out;
};

int baseline_mws_max(const MwsMaxArgs& args) {
    if (!args.graph.empty()) {
        const SegmentationResult r = mws_max(read_graph_file(args.graph));
        with_output(args.nodes, std::cout, [&](std::ostream& out) { write_node_assignment(out, r); });
        return 0;
    }
    if (args.in.affinities.empty() || args.in.offsets.empty() || args.out.empty())
        throw CLI::ValidationError("mws-max", "give --graph, or --affinities, --offsets and --out");
    std::vector<std::size_t> shape;
    const ExtendedGraph g = args.in.graph(&shape);
    write_label_map(args.out, label_map_from_segmentation(mws_max(g), shape));
    return 0;
}

struct CcSemArgs {
    std::string semantic, offsets, out;
};

int baseline_cc_sem(const CcSemArgs& args) {
    const auto sem = read_tensor<float>(args.semantic);
    const OffsetPattern connectivity =
        args.offsets.empty() ? nearest_neighbours(sem.rank() - 1) : read_offsets_file(args.offsets);
    write_label_map(args.out, cc_semantic(sem, connectivity));
    return 0;
}

struct CcAffArgs {
    std::string affinities, offsets, semantic, out;
    double threshold = 0.5;
};

int baseline_cc_aff(const CcAffArgs& args) {
    write_label_map(args.out, cc_affinity(read_tensor<float>(args.affinities), read_offsets_file(args.offsets),
                                          args.threshold, read_tensor<float>(args.semantic)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic mutex watershed: joint graph partitioning and labeling"};
    app.require_subcommand(1);
    std::function<int()> action;

    SegmentGraphArgs sg;
    auto* cmd = app.add_subcommand("segment-graph", "segment an SMWG graph file");
    cmd->add_option("graph", sg.graph, "SMWG v1 graph file")->required();
    cmd->add_option("--nodes", sg.nodes, "node assignment output, '-' for stdout")->capture_default_str();
    cmd->add_option("--summary", sg.summary, "JSON summary output, '-' for stderr")->capture_default_str();
    cmd->add_flag("--no-timing", sg.no_timing, "leave runtime out of the summary");
    cmd->callback([&] { action = [&] { return segment_graph(sg); }; });

    SegmentGridArgs sgrid;
    cmd = app.add_subcommand("segment-grid", "segment a pixel/voxel grid from affinity and semantic tensors");
    sgrid.in.add_to(cmd, false);
    cmd->add_option("--out", sgrid.out, "output prefix for <out>_class and <out>_instance tensors")->required();
    cmd->callback([&] { action = [&] { return segment_grid(sgrid); }; });

    VerifyArgs va;
    cmd = app.add_subcommand("verify", "compare the watershed with the brute-force optimum and check constraints");
    cmd->add_option("graph", va.graph, "SMWG v1 graph file");
    cmd->add_option("--random", va.random, "check N random graphs instead");
    cmd->add_option("--seed", va.seed, "seed for --random")->capture_default_str();
    cmd->add_flag("--constraints-only", va.constraints_only, "skip the brute-force optimum");
    cmd->callback([&] { action = [&] { return verify(va); }; });

    BenchArgs ba;
    cmd = app.add_subcommand("bench", "time the watershed on synthetic 3D volumes");
    cmd->add_option("--sizes", ba.cfg.sizes, "cube side lengths, ascending")->delimiter(',')->capture_default_str();
    cmd->add_option("--repeats", ba.cfg.repeats, "timed runs per size")->capture_default_str();
    cmd->add_option("--seed", ba.cfg.seed, "volume seed")->capture_default_str();
    cmd->add_option("--out", ba.out, "CSV output, '-' for stdout")->capture_default_str();
    cmd->add_option("--max-slope", ba.max_slope, "exit 1 when the log-log slope exceeds this");
    cmd->add_flag("--no-timing", ba.no_timing, "leave timings out (reproducible output)");
    cmd->callback([&] { action = [&] { return bench(ba); }; });

    EvalArgs ea;
    cmd = app.add_subcommand("eval", "panoptic quality of a prediction against ground truth");
    cmd->add_option("--pred", ea.pred, "prediction prefix (<pred>_class, <pred>_instance)")->required();
    cmd->add_option("--gt", ea.gt, "ground-truth prefix")->required();
    cmd->add_option("--things", ea.things, "thing class ids")->delimiter(',');
    cmd->add_option("--stuff", ea.stuff, "stuff class ids")->delimiter(',');
    cmd->add_option("--out", ea.out, "JSON report output");
    cmd->add_flag("--no-merge-stuff", ea.no_merge_stuff, "match stuff segments individually");
    cmd->add_flag("--skip-pred-only", ea.skip_pred_only, "leave classes absent from the ground truth out of the means");
    cmd->callback([&] { action = [&] { return eval(ea); }; });

    auto* baseline = app.add_subcommand("baseline", "baseline segmentations");
    baseline->require_subcommand(1);

    MwsMaxArgs ma;
    cmd = baseline->add_subcommand("mws-max", "mutex watershed, then the strongest semantic edge per cluster");
    cmd->add_option("--graph", ma.graph, "SMWG v1 graph file (instead of tensors)");
    cmd->add_option("--nodes", ma.nodes, "node assignment output for --graph, '-' for stdout")->capture_default_str();
    cmd->add_option("--affinities", ma.in.affinities, "affinity tensor");
    cmd->add_option("--offsets", ma.in.offsets, "offsets file");
    cmd->add_option("--semantic", ma.in.semantic, "semantic probability tensor");
    cmd->add_option("--semantic-epsilon", ma.in.semantic_epsilon, "drop semantic edges with probability <= this");
    cmd->add_option("--threshold", ma.in.threshold, "split every channel at this value");
    cmd->add_option("--out", ma.out, "output prefix");
    cmd->callback([&] { action = [&] { return baseline_mws_max(ma); }; });

    CcSemArgs cs;
    cmd = baseline->add_subcommand("cc-sem", "connected components of the argmax class");
    cmd->add_option("--semantic", cs.semantic, "semantic probability tensor")->required();
    cmd->add_option("--offsets", cs.offsets, "connectivity offsets (default: axis neighbours)");
    cmd->add_option("--out", cs.out, "output prefix")->required();
    cmd->callback([&] { action = [&] { return baseline_cc_sem(cs); }; });

    CcAffArgs ca;
    cmd = baseline->add_subcommand("cc-aff", "connected components of thresholded affinities, majority class");
    cmd->add_option("--affinities", ca.affinities, "affinity tensor")->required();
    cmd->add_option("--offsets", ca.offsets, "offsets file")->required();
    cmd->add_option("--semantic", ca.semantic, "semantic probability tensor")->required();
    cmd->add_option("--threshold", ca.threshold, "affinity threshold")->capture_default_str();
    cmd->add_option("--out", ca.out, "output prefix")->required();
    cmd->callback([&] { action = [&] { return baseline_cc_aff(ca); }; });

    try {
        app.parse(argc, argv);
        return action();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
