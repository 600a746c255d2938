// Command-line front end: simulate | moments | orthogonalize | verify |
// replicate | chaos-check. Every command honors --seed and is reproducible
// bit for bit. Exit codes: 0 ok, 2 schema error, 3 numeric failure,
// 4 verification FAIL.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mapmart/errors.hpp"
#include "mapmart/mc_verify.hpp"
#include "mapmart/model_json.hpp"
#include "mapmart/monomial_chaos.hpp"
#include "mapmart/ortho_basis.hpp"
#include "mapmart/predictable_rep.hpp"
#include "mapmart/rng.hpp"

using nlohmann::json;

namespace {

struct RunOptions {
    std::string model_file;
    std::string config_file;
    std::string out;
    std::uint64_t seed = 20250801;
    double dt = 0.01;
    std::size_t paths = 100000;
    unsigned threads = 0;
    int K = 3;
    std::size_t buckets = 10;
    std::string suite;
    std::string payoff = "terminal_ordinate";
    int g = 0, p = 0, b = 0;
    std::vector<double> dts = {1e-2, 5e-3, 2.5e-3};
    bool print_tree = false;
    int g_x = 3, g_y = 1;
};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mapmart::SchemaError("schema: cannot open file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw mapmart::SchemaError(std::string("schema: bad JSON in ") + path +
                                   ": " + e.what());
    }
    return j;
}

// Config file fills defaults; explicitly passed flags override it.
void apply_config(RunOptions& opt, const CLI::App& cmd) {
    if (opt.config_file.empty()) return;
    const json cfg = load_json_file(opt.config_file);
    if (!cfg.is_object()) throw mapmart::SchemaError("schema: config must be an object");
    const std::set<std::string> allowed = {"model",   "model_file", "seed",
                                           "dt",      "paths",      "threads",
                                           "K",       "buckets",    "suite",
                                           "payoff",  "g",          "p",
                                           "b",       "dts",        "out",
                                           "g_x",     "g_y"};
    for (const auto& item : cfg.items())
        if (allowed.find(item.key()) == allowed.end())
            throw mapmart::SchemaError("schema: unknown config key '" +
                                       item.key() + "'");
    auto unset = [&cmd](const char* flag) {
        const CLI::Option* o = cmd.get_option_no_throw(flag);
        return o == nullptr || o->count() == 0;
    };
    if (cfg.contains("model_file") && unset("--model"))
        opt.model_file = cfg.at("model_file").get<std::string>();
    if (cfg.contains("seed") && unset("--seed"))
        opt.seed = cfg.at("seed").get<std::uint64_t>();
    if (cfg.contains("dt") && unset("--dt")) opt.dt = cfg.at("dt").get<double>();
    if (cfg.contains("paths") && unset("--paths"))
        opt.paths = cfg.at("paths").get<std::size_t>();
    if (cfg.contains("threads") && unset("--threads"))
        opt.threads = cfg.at("threads").get<unsigned>();
    if (cfg.contains("K") && unset("--K")) opt.K = cfg.at("K").get<int>();
    if (cfg.contains("buckets") && unset("--buckets"))
        opt.buckets = cfg.at("buckets").get<std::size_t>();
    if (cfg.contains("suite") && unset("--suite"))
        opt.suite = cfg.at("suite").get<std::string>();
    if (cfg.contains("payoff") && unset("--payoff"))
        opt.payoff = cfg.at("payoff").get<std::string>();
    if (cfg.contains("g") && unset("--g")) opt.g = cfg.at("g").get<int>();
    if (cfg.contains("p") && unset("--p")) opt.p = cfg.at("p").get<int>();
    if (cfg.contains("b") && unset("--b")) opt.b = cfg.at("b").get<int>();
    if (cfg.contains("g_x") && unset("--g-x")) opt.g_x = cfg.at("g_x").get<int>();
    if (cfg.contains("g_y") && unset("--g-y")) opt.g_y = cfg.at("g_y").get<int>();
    if (cfg.contains("dts") && unset("--dts"))
        opt.dts = cfg.at("dts").get<std::vector<double>>();
    if (cfg.contains("out") && unset("--out"))
        opt.out = cfg.at("out").get<std::string>();
}

mapmart::MapSpec load_model(const RunOptions& opt) {
    if (!opt.config_file.empty()) {
        const json cfg = load_json_file(opt.config_file);
        if (cfg.contains("model") && opt.model_file.empty())
            return mapmart::require_valid(mapmart::map_spec_from_json(cfg.at("model")));
    }
    if (opt.model_file.empty())
        return mapmart::MapSpec::default_spec();
    return mapmart::require_valid(
        mapmart::map_spec_from_json(load_json_file(opt.model_file)));
}

void emit(const RunOptions& opt, const json& j) {
    const std::string text = j.dump(2) + "\n";
    if (opt.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(opt.out);
        if (!out) throw mapmart::SchemaError("schema: cannot write " + opt.out);
        out << text;
    }
}

json basis_to_json(const mapmart::OrthogonalBasis& basis) {
    json j;
    json labels = json::array();
    for (const auto& l : basis.space.labels) labels.push_back(l.str());
    j["labels"] = labels;
    json gram = json::array(), coeffs = json::array();
    for (Eigen::Index i = 0; i < basis.space.gram.rows(); ++i) {
        json row = json::array(), crow = json::array();
        for (Eigen::Index k = 0; k < basis.space.gram.cols(); ++k) {
            row.push_back(basis.space.gram(i, k));
            crow.push_back(basis.coeffs(i, k));
        }
        gram.push_back(row);
        coeffs.push_back(crow);
    }
    j["gram"] = gram;
    j["coeffs"] = coeffs;
    json norms = json::array();
    for (Eigen::Index i = 0; i < basis.norms.size(); ++i)
        norms.push_back(basis.norms(i));
    j["norms"] = norms;
    return j;
}

json replication_to_json(const mapmart::ReplicationReport& rep) {
    json j;
    j["schema"] = "v1";
    j["basis_order"] = rep.basis_order;
    j["n_paths"] = rep.n_paths;
    j["n_buckets"] = rep.n_buckets;
    j["dt"] = rep.dt;
    j["seed"] = rep.seed;
    j["integrators"] = rep.integrator_names;
    j["features"] = {"1", "theta_bar", "xi_bar"};
    j["bucket_starts"] = rep.bucket_starts;
    json coeffs = json::array();
    for (const auto& bucket : rep.coeffs) {
        json per_q = json::array();
        for (const auto& arr : bucket) per_q.push_back({arr[0], arr[1], arr[2]});
        coeffs.push_back(per_q);
    }
    j["coeffs"] = coeffs;
    j["residual_variance"] = rep.residual_variance;
    j["residual_stderr"] = rep.residual_stderr;
    j["floor_variance"] = rep.floor_variance;
    j["payoff_variance"] = rep.payoff_variance;
    j["ridge"] = rep.ridge;
    j["exact_target"] = rep.exact_target;
    return j;
}

int cmd_simulate(const RunOptions& opt) {
    const auto spec = load_model(opt);
    if (opt.paths < 1) throw mapmart::SchemaError("schema: --paths must be >= 1");
    const std::string prefix = opt.out.empty() ? "path" : opt.out;
    for (std::size_t i = 0; i < opt.paths; ++i) {
        const auto path =
            mapmart::simulate(spec, opt.dt, mapmart::path_seed(opt.seed, i));
        std::ostringstream name;
        name << prefix << "_" << i << ".csv";
        std::ofstream out(name.str());
        if (!out) throw mapmart::SchemaError("schema: cannot write " + name.str());
        mapmart::write_csv(out, path);
        std::cout << name.str() << "\n";
    }
    return 0;
}

int cmd_moments(const RunOptions& opt) {
    const auto spec = load_model(opt);
    const auto comp = mapmart::compensators(spec);
    json j;
    j["schema"] = "v1";
    j["spec_hash"] = mapmart::spec_hash(spec);
    j["theta_mean_rate"] = comp.theta_mean_rate;
    j["big_jump_mean"] = {{"nu1", mapmart::big_jump_mean(spec.nu1)},
                          {"nu2", mapmart::big_jump_mean(spec.nu2)}};
    json m1 = json::array(), m2 = json::array();
    for (int k = 1; k <= 2 * spec.k_max; ++k) {
        m1.push_back(comp.nu1_table.m(k));
        m2.push_back(comp.nu2_table.m(k));
    }
    j["scalar_moments"] = {{"nu1", m1}, {"nu2", m2}};
    json joint = json::array();
    for (int k = 1; k <= 2 * spec.k_max; ++k) {
        json row = json::array();
        for (int l = 0; l + k <= 2 * spec.k_max; ++l)
            row.push_back(comp.nu1_table.c(k, l));
        joint.push_back(row);
    }
    j["joint_moments"] = joint;
    emit(opt, j);
    return 0;
}

int cmd_orthogonalize(const RunOptions& opt) {
    const auto spec = load_model(opt);
    const auto alpha = mapmart::estimate_alpha(spec, opt.dt,
                                               mapmart::path_seed(opt.seed, 77),
                                               20000);
    const auto nu2_table = mapmart::MomentTable::for_measure(spec.nu2, spec.k_max);
    const auto nu1_table =
        mapmart::MomentTable::for_modulator(spec.nu1, spec.u_law, spec.k_max);
    json j;
    j["schema"] = "v1";
    j["spec_hash"] = mapmart::spec_hash(spec);
    j["alpha"] = {{"value", alpha.value},
                  {"method", alpha.analytic ? "analytic" : "monte_carlo"},
                  {"stderr", alpha.stderr_},
                  {"n_paths", alpha.n_paths}};
    const auto s1 = mapmart::build_s1(nu2_table, alpha.value, opt.K);
    j["s1"] = basis_to_json(mapmart::gram_schmidt(s1));
    if (opt.g_x + opt.g_y >= 1) {
        const auto s3 =
            mapmart::build_s3(nu1_table, spec.sigma1, opt.g_x, opt.g_y);
        j["s3"] = basis_to_json(mapmart::gram_schmidt(s3));
    }
    emit(opt, j);
    return 0;
}

int cmd_verify(const RunOptions& opt) {
    const auto spec = load_model(opt);
    if (opt.suite.empty())
        throw mapmart::SchemaError("schema: verify needs --suite");
    mapmart::SuiteConfig cfg;
    cfg.n_paths = opt.paths;
    cfg.dt = opt.dt;
    cfg.seed = opt.seed;
    cfg.threads = opt.threads;
    cfg.h_order = opt.K;
    cfg.iso_order = opt.K;
    cfg.g_x = opt.g_x;
    cfg.g_y = opt.g_y;
    cfg.n_buckets = opt.buckets;
    cfg.replication_paths = opt.paths;
    const auto report = mapmart::run_suite(opt.suite, spec, cfg);
    std::cerr << mapmart::summary_lines(report);
    emit(opt, mapmart::to_json(report));
    return report.verdict ? 0 : 4;
}

int cmd_replicate(const RunOptions& opt) {
    const auto spec = load_model(opt);
    mapmart::Payoff payoff;
    if (opt.payoff == "terminal_ordinate")
        payoff = mapmart::Payoff::terminal_ordinate();
    else if (opt.payoff == "terminal_square")
        payoff = mapmart::Payoff::terminal_square();
    else if (opt.payoff == "monomial")
        payoff = mapmart::Payoff::monomial(opt.g, opt.p, opt.b);
    else
        throw mapmart::SchemaError("schema: unknown payoff '" + opt.payoff + "'");
    const auto rep = mapmart::replicate(spec, payoff, opt.K, opt.paths, opt.dt,
                                        opt.seed, opt.buckets);
    emit(opt, replication_to_json(rep));
    return 0;
}

int cmd_chaos_check(const RunOptions& opt) {
    const auto spec = load_model(opt);
    const auto comp = mapmart::compensators(spec);
    const auto ex = mapmart::expand(opt.g, opt.p, opt.b);
    if (opt.print_tree) std::cerr << mapmart::render(ex);
    json per_dt = json::array();
    for (double dt : opt.dts) {
        double acc = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < opt.paths; ++i) {
            const auto path =
                mapmart::simulate(spec, dt, mapmart::path_seed(opt.seed, i));
            const auto chk = mapmart::evaluate(ex, path, spec, comp);
            acc += chk.abs_error * chk.abs_error;
            worst = std::max(worst, chk.abs_error);
        }
        per_dt.push_back({{"dt", dt},
                          {"rms_error",
                           std::sqrt(acc / static_cast<double>(opt.paths))},
                          {"max_error", worst}});
    }
    json j;
    j["schema"] = "v1";
    j["spec_hash"] = mapmart::spec_hash(spec);
    j["gpb"] = {opt.g, opt.p, opt.b};
    j["n_paths"] = opt.paths;
    j["results"] = per_dt;
    emit(opt, j);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov additive process martingale toolkit"};
    app.require_subcommand(1);
    RunOptions opt;

    auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--model", opt.model_file, "Model spec JSON file");
        cmd->add_option("--config", opt.config_file,
                        "Run config JSON (flags override file values)");
        cmd->add_option("--seed", opt.seed, "Base RNG seed");
        cmd->add_option("--dt", opt.dt, "Uniform mesh step");
        cmd->add_option("--paths", opt.paths, "Number of Monte Carlo paths");
        cmd->add_option("--threads", opt.threads,
                        "Parallel path workers (0 = hardware)");
        cmd->add_option("--out", opt.out, "Output file (default stdout)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Write path CSV files");
    add_common(sim);

    CLI::App* mom = app.add_subcommand("moments", "Print the moment tables");
    add_common(mom);

    CLI::App* orth =
        app.add_subcommand("orthogonalize", "Emit the H/G basis report");
    add_common(orth);
    orth->add_option("--K", opt.K, "H family size");
    orth->add_option("--g-x", opt.g_x, "G family theta labels");
    orth->add_option("--g-y", opt.g_y, "G family triggered labels");

    CLI::App* ver = app.add_subcommand("verify", "Run a verification suite");
    add_common(ver);
    ver->add_option("--suite", opt.suite,
                    "martingale|isometry|orthogonality|chaos|replication");
    ver->add_option("--K", opt.K, "Pair order bound");
    ver->add_option("--g-x", opt.g_x, "G family theta labels");
    ver->add_option("--g-y", opt.g_y, "G family triggered labels");
    ver->add_option("--buckets", opt.buckets, "Replication time buckets");

    CLI::App* repl =
        app.add_subcommand("replicate", "Estimate predictable integrands");
    add_common(repl);
    repl->add_option("--payoff", opt.payoff,
                     "terminal_ordinate|terminal_square|monomial");
    repl->add_option("--K", opt.K, "Integrator basis order");
    repl->add_option("--buckets", opt.buckets, "Time buckets");
    repl->add_option("--g", opt.g, "Monomial theta power");
    repl->add_option("--p", opt.p, "Monomial xi^L power");
    repl->add_option("--b", opt.b, "Monomial xi^f power");

    CLI::App* chaos =
        app.add_subcommand("chaos-check", "Pathwise monomial representation check");
    add_common(chaos);
    chaos->add_option("--g", opt.g, "theta power");
    chaos->add_option("--p", opt.p, "xi^L power");
    chaos->add_option("--b", opt.b, "xi^f power");
    chaos->add_option("--dts", opt.dts, "Mesh steps to sweep");
    chaos->add_flag("--print-tree", opt.print_tree, "Render the expansion");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* cmd = app.get_subcommands().front();
        apply_config(opt, *cmd);
        if (cmd == sim) return cmd_simulate(opt);
        if (cmd == mom) return cmd_moments(opt);
        if (cmd == orth) return cmd_orthogonalize(opt);
        if (cmd == ver) return cmd_verify(opt);
        if (cmd == repl) return cmd_replicate(opt);
        if (cmd == chaos) return cmd_chaos_check(opt);
    } catch (const mapmart::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const mapmart::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
