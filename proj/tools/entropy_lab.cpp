#include <cstdio>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "entlab/experiments.hpp"
#include "entlab/hset.hpp"
#include "entlab/summation.hpp"
#include "entlab/tree_json.hpp"

using nlohmann::json;
using namespace entlab;

namespace {

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

int cmd_run(const std::optional<std::string>& experiment, const std::optional<std::string>& config_path,
            const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out, double time_limit) {
    json j = config_path ? read_json_file(*config_path) : json::object();
    auto cfg = config_from_json(j, experiment);
    if (seed) cfg.seed = *seed;
    if (out) cfg.output_dir = *out;

    RunLimits limits;
    limits.seconds = time_limit;
    if (!apply_memory_cap(limits.memory_bytes)) std::cerr << "warning: could not install the memory cap\n";
    const Deadline deadline(limits.seconds);
    const auto result = run_experiment(cfg, deadline);
    write_report(cfg, result, deadline.elapsed_seconds());

    for (const auto& c : result.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    if (result.status != "ok") {
        std::cerr << "error: " << result.summary.value("error", result.status) << " (partial results written to "
                  << cfg.output_dir << ")\n";
        return kUsage;
    }
    return result.all_pass() ? kPass : kViolation;
}

int cmd_gen_tree(const std::string& profile_path, int depth, const std::string& out, int m_star, int j_min,
                 std::uint64_t seed) {
    const auto h = hprofile_from_json(read_json_file(profile_path));
    const auto g = generate_hset_tree(h, m_star, depth, seed, j_min);
    TreeDocument doc;
    doc.parent = g.tree.parents();
    doc.extra = json{{"profile", to_json(h)},
                     {"m_star", m_star},
                     {"j_min", j_min},
                     {"depth", depth},
                     {"seed", seed},
                     {"c_hat", g.c_hat}};
    write_tree_document(out, doc);
    std::cout << "wrote " << g.tree.size() << " vertices, c_hat = " << g.c_hat << "\n";
    return kPass;
}

int cmd_norm(const std::string& tree_path, double p, double q, std::uint64_t seed) {
    const auto doc = read_tree_document(tree_path);
    const auto tree = doc.tree();
    const std::vector<double> ones(tree.size(), 1.0);
    const auto& u = doc.u ? *doc.u : ones;
    const auto& w = doc.w ? *doc.w : ones;
    NormConfig cfg;
    cfg.seed = seed;
    const auto est = norm_oracle_nonnegative(tree, u, w, p, q, cfg);
    json out{{"p", p},
             {"q", q},
             {"lower", est.lower},
             {"upper", est.upper},
             {"holder_upper", est.holder_upper},
             {"schur_upper", est.schur_upper},
             {"iterations", est.iterations}};
    if (est.grid_upper) out["grid_upper"] = *est.grid_upper;
    std::cout << out.dump(2) << "\n";
    return est.lower <= est.upper ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy numbers of weighted summation operators on trees"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one experiment and write results.csv, summary.json, manifest.json");
    std::optional<std::string> experiment, config_path, out;
    std::optional<std::uint64_t> seed;
    double time_limit = 600.0;
    run->add_option("--experiment", experiment, "Experiment name");
    run->add_option("--config", config_path, "JSON config {experiment, params, seed, output_dir}");
    run->add_option("--seed", seed, "Seed (overrides the config)");
    run->add_option("--out", out, "Output directory (overrides the config)");
    run->add_option("--time-limit", time_limit, "Wall-clock cap in seconds")->capture_default_str();

    auto* gen = app.add_subcommand("gen-tree", "Generate a tree following an h-profile");
    std::string profile_path, tree_out;
    int depth = 0, m_star = 1, j_min = 0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--profile", profile_path, "Profile JSON {theta, gamma, tau, c3}")->required();
    gen->add_option("--depth", depth, "Levels below the root")->required();
    gen->add_option("--out", tree_out, "Output tree JSON")->required();
    gen->add_option("--m-star", m_star, "Depth scale m*")->capture_default_str();
    gen->add_option("--j-min", j_min, "Absolute depth of the root")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();

    auto* norm = app.add_subcommand("norm", "Two-sided l_p -> l_q norm of a weighted tree");
    std::string tree_path;
    double p = 2.0, q = 2.0;
    std::uint64_t norm_seed = 0;
    norm->add_option("--tree", tree_path, "Tree JSON {parent, u, w}")->required();
    norm->add_option("--p", p, "Domain exponent")->required();
    norm->add_option("--q", q, "Target exponent")->required();
    norm->add_option("--seed", norm_seed, "Seed for the random restarts")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        if (*run) return cmd_run(experiment, config_path, seed, out, time_limit);
        if (*gen) return cmd_gen_tree(profile_path, depth, tree_out, m_star, j_min, gen_seed);
        if (*norm) return cmd_norm(tree_path, p, q, norm_seed);
    } catch (const ResourceExceeded& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource error: out of memory\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
