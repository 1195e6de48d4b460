// Command-line front end: solve models, compute observation-value metrics,
// sweep inspection accuracy, simulate policies, build the bundled case
// studies, and convert interchange-format files.
//
// Exit codes: 0 success, 1 unexpected error, 2 bad input (parse/validation),
// 3 budget exhausted before reaching the gap target (outputs still written),
// 4 incompatible settings handed to a two-setting metric.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "voiplan/bounds.hpp"
#include "voiplan/casestudies.hpp"
#include "voiplan/errors.hpp"
#include "voiplan/io.hpp"
#include "voiplan/metrics.hpp"
#include "voiplan/model.hpp"
#include "voiplan/sim.hpp"
#include "voiplan/solvers.hpp"

namespace {

using namespace voiplan;

struct SolverFlags {
    std::string solver = "gap";
    SolverConfig config;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
    cmd->add_option("--solver", f.solver, "Solver: gap, perseus, or pbvi")
        ->envname("VOIPLAN_SOLVER")
        ->capture_default_str();
    cmd->add_option("--epsilon", f.config.epsilon, "Convergence gap target at the root")
        ->envname("VOIPLAN_EPSILON")
        ->capture_default_str();
    cmd->add_option("--max-iterations", f.config.max_iterations,
                    "Sweep/trial cap before giving up");
    cmd->add_option("--max-seconds", f.config.max_wall_seconds, "Wall-clock budget in seconds");
    cmd->add_option("--belief-set-size", f.config.belief_set_size,
                    "Collected belief set cap (perseus/pbvi)");
    cmd->add_option("--trajectory-length", f.config.trajectory_length,
                    "Exploration walk length / trial depth cap");
    cmd->add_option("--seed", f.config.exploration_seed, "Exploration seed")
        ->envname("VOIPLAN_SEED");
    cmd->add_option("--upper-point-cap", f.config.upper_point_cap,
                    "Maximum retained sawtooth upper-bound points");
}

int exhausted_code(bool exhausted) { return exhausted ? 3 : 0; }

void print_value_report(const char* role, const ValueReport& r) {
    std::cout << role << ": " << r.label << "  value " << format_g9(r.value) << "  gap "
              << format_g9(r.gap) << "\n";
}

// --- solve ---

struct SolveArgs {
    std::string model_path;
    SolverFlags flags;
    std::string bounds_out;
    std::string log_out;
};

int run_solve(const SolveArgs& a) {
    std::string kind_str;
    const PomdpModel model = load_model_file(a.model_path, &kind_str);
    const SolverKind kind = parse_solver_kind(a.flags.solver);
    a.flags.config.validate();
    const Belief root = model.initial_belief();
    const ValueBounds bounds = solve_with(kind, model, a.flags.config, root);

    const double lower = bounds.lower_value(root);
    const double upper = bounds.upper_value(root);
    std::cout << "model: " << a.model_path << " (" << kind_str << ", " << model.num_states()
              << " states)\n";
    std::cout << "solver: " << solver_kind_name(kind)
              << "  epsilon: " << format_g9(a.flags.config.epsilon) << "\n";
    std::cout << "root lower: " << format_g9(lower) << "  upper: " << format_g9(upper)
              << "  gap: " << format_g9(upper - lower) << "\n";
    std::cout << "alphas: " << bounds.lower.size() << "  upper points: "
              << bounds.upper_points.size() << "  iterations: " << bounds.log.size()
              << "  budget exhausted: " << (bounds.budget_exhausted ? "yes" : "no") << "\n";

    if (!a.bounds_out.empty())
        save_bounds_archive(bounds, solver_config_digest(a.flags.config, kind), a.bounds_out);
    if (!a.log_out.empty()) write_text_atomic(a.log_out, convergence_csv(bounds.log));
    return exhausted_code(bounds.budget_exhausted);
}

// --- metrics ---

struct MetricsArgs {
    std::string metric;
    std::string model_path;
    std::string model2_path;
    int channel = -1;
    SolverFlags flags;
    std::string out;
    std::string format = "csv";
};

int run_metrics(const MetricsArgs& a) {
    const PomdpModel model = load_model_file(a.model_path);
    const SolverKind kind = parse_solver_kind(a.flags.solver);
    a.flags.config.validate();
    const Belief root = model.initial_belief();

    GainResult g;
    if (a.metric == "voi") {
        g = voi(model, root, a.flags.config, kind);
    } else if (a.metric == "vopi") {
        g = vopi(model, root, a.flags.config, kind);
    } else if (a.metric == "voshm") {
        if (a.model2_path.empty())
            throw ParseError("voshm needs --model2 (the permanent-monitoring setting)");
        ControlSetting first{a.model_path, model, Provenance::explicit_setting};
        ControlSetting second{a.model2_path, load_model_file(a.model2_path),
                              Provenance::explicit_setting};
        g = voshm(first, second, root, a.flags.config, kind);
    } else if (a.metric == "rvoci") {
        if (a.channel < 0)
            throw ParseError("rvoci needs --channel (the observation action to make permanent)");
        g = rvoci(model, static_cast<std::size_t>(a.channel), root, a.flags.config, kind);
    } else {
        throw ParseError("unknown metric '" + a.metric + "' (voi, vopi, voshm, rvoci)");
    }

    std::cout << "metric: " << a.metric << "\n";
    print_value_report("first", g.first);
    print_value_report("second", g.second);
    std::cout << "gain: " << format_g9(g.gain) << "  uncertainty: " << format_g9(g.uncertainty)
              << "\n";

    if (!a.out.empty()) {
        if (a.format == "csv")
            write_text_atomic(a.out, gain_report_csv(a.metric, g));
        else if (a.format == "kv")
            write_text_atomic(a.out, gain_report_kv(a.metric, g));
        else
            throw ParseError("unknown report format '" + a.format + "' (csv, kv)");
    }
    const bool exhausted = g.first.gap + g.second.gap > 0 &&
                           (g.uncertainty > 2.0 * a.flags.config.epsilon + 1e-12);
    return exhausted_code(exhausted);
}

// --- sweep ---

struct SweepArgs {
    std::string grid = "0.5:1.0:0.05";
    SolverFlags flags;
    std::string out;
};

std::vector<double> parse_grid(const std::string& spec) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
        throw ParseError("grid must look like lo:hi:step, got '" + spec + "'");
    if (step <= 0 || hi < lo) throw ParseError("grid needs step > 0 and hi >= lo");
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double x = lo + static_cast<double>(i) * step;
        if (x > hi + 1e-9) break;
        out.push_back(x);
    }
    return out;
}

int run_sweep(const SweepArgs& a) {
    const SolverKind kind = parse_solver_kind(a.flags.solver);
    a.flags.config.validate();
    const std::vector<double> grid = parse_grid(a.grid);

    std::string csv =
        "p,v_blind,gap_blind,v1,gap1,v2,gap2,v_mdp,voi1,voi2,voshm,vopi\n";
    bool any_exhausted = false;
    for (double p : grid) {
        const PomdpModel m1 = build_three_component(p, 1);
        const PomdpModel m2 = build_three_component(p, 2);
        const ControlSetting blind = make_default(m1);
        const Belief root = m1.initial_belief();

        const ValueBounds b_blind = solve_with(kind, blind.model, a.flags.config, root);
        const ValueBounds b1 = solve_with(kind, m1, a.flags.config, root);
        const ValueBounds b2 = solve_with(kind, m2, a.flags.config, root);
        any_exhausted |= b_blind.budget_exhausted || b1.budget_exhausted || b2.budget_exhausted;

        const double v_blind = b_blind.lower_value(root);
        const double g_blind = b_blind.gap(root);
        const double v1 = b1.lower_value(root);
        const double g1 = b1.gap(root);
        const double v2 = b2.lower_value(root);
        const double g2 = b2.gap(root);
        const double v_mdp = mdp_value_at_belief(m1, mdp_value_iteration(m1), root);

        csv += format_g9(p);
        for (double v : {v_blind, g_blind, v1, g1, v2, g2, v_mdp, v1 - v_blind, v2 - v_blind,
                         v2 - v1, v_mdp - v_blind})
            csv += std::string(",") + format_g9(v);
        csv += "\n";
        std::cout << "p=" << format_g9(p) << "  blind " << format_g9(v_blind) << "  v1 "
                  << format_g9(v1) << "  v2 " << format_g9(v2) << "  mdp " << format_g9(v_mdp)
                  << std::endl;
    }
    if (!a.out.empty()) write_text_atomic(a.out, csv);
    return exhausted_code(any_exhausted);
}

// --- simulate ---

struct SimulateArgs {
    std::string model_path;
    std::string policy = "do-nothing";
    RolloutConfig config;
    std::string out;
    std::string trace_out;
};

std::unique_ptr<Policy> make_policy(const std::string& spec, const PomdpModel& model,
                                    std::unique_ptr<ValueBounds>& bounds_keeper,
                                    bool& wants_initial_observation) {
    wants_initial_observation = false;
    if (spec == "do-nothing") return std::make_unique<DoNothingPolicy>();
    if (spec == "always-repair") return std::make_unique<AlwaysRepairPolicy>();
    const std::size_t colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "greedy") {
        if (arg.empty()) throw ParseError("greedy policy needs a bounds file: greedy:<file>");
        bounds_keeper = std::make_unique<ValueBounds>(load_bounds_archive(arg));
        if (!bounds_keeper->lower.empty() &&
            bounds_keeper->lower[0].v.size() != model.num_states())
            throw ParseError("bounds file does not match the model's state count");
        return std::make_unique<GreedyPolicy>(*bounds_keeper);
    }
    if (head == "condition") {
        if (arg.size() != 3)
            throw ParseError("condition policy needs three 0/1 flags, e.g. condition:001");
        ConditionBasedPolicy rule;
        for (std::size_t i = 0; i < 3; ++i) {
            if (arg[i] != '0' && arg[i] != '1')
                throw ParseError("condition policy flags must be 0 or 1");
            rule.repair_when[i] = (arg[i] == '1');
        }
        wants_initial_observation = true;
        return std::make_unique<ConditionObservationPolicy>(rule);
    }
    throw ParseError("unknown policy '" + spec +
                     "' (greedy:<bounds>, condition:<flags>, do-nothing, always-repair)");
}

int run_simulate(SimulateArgs& a) {
    const PomdpModel model = load_model_file(a.model_path);
    std::unique_ptr<ValueBounds> bounds_keeper;
    bool wants_initial_obs = false;
    std::unique_ptr<Policy> policy = make_policy(a.policy, model, bounds_keeper, wants_initial_obs);
    if (wants_initial_obs) a.config.initial_observation = true;
    a.config.validate();

    const Belief root = model.initial_belief();
    const RolloutResult r = rollout(model, *policy, root, a.config);
    const double trunc = truncation_error_bound(model, r.horizon);
    std::cout << "policy: " << policy->name() << "  episodes: " << r.episodes
              << "  horizon: " << r.horizon << "\n";
    std::cout << "mean return: " << format_g9(r.mean) << " +/- " << format_g9(r.ci_halfwidth)
              << " (" << format_g9(r.confidence * 100) << "% CI), truncation bound "
              << format_g9(trunc) << "\n";
    if (!a.out.empty()) write_text_atomic(a.out, rollout_csv(policy->name(), r, trunc));
    if (!a.trace_out.empty()) {
        const PolicyTrace trace = trace_realization(model, *policy, root, a.config.seed,
                                                    r.horizon, a.config.initial_observation);
        write_text_atomic(a.trace_out, trace_csv(model, trace));
    }
    return 0;
}

// --- build ---

struct BuildArgs {
    std::string family;
    std::string out;
    double accuracy = 0.8;
    int setting = 1;
    double default_accuracy = -1.0;
    std::uint64_t seed = 1;
    std::size_t rates = 83;
    std::size_t horizon = 42;
    double jitter = 0.25;
};

int run_build(const BuildArgs& a) {
    if (a.family == "three-component") {
        std::string text = "voiplan-model 1\nfactored three_component\n";
        text += "accuracy " + format_g9(a.accuracy) + "\n";
        text += "setting " + std::to_string(a.setting) + "\n";
        if (a.default_accuracy >= 0.0)
            text += "default_accuracy " + format_g9(a.default_accuracy) + "\n";
        text += "end\n";
        parse_model_text(text);  // reject bad parameters before writing
        write_text_atomic(a.out, text);
    } else if (a.family == "deck") {
        DeckShape shape;
        shape.rate_count = a.rates;
        shape.horizon = a.horizon;
        shape.jitter = a.jitter;
        const DeckModelSpec spec = synth_deck_spec(a.seed, shape);
        const std::string text = write_deck_spec_text(spec, a.setting);
        parse_model_text(text);
        write_text_atomic(a.out, text);
    } else {
        throw ParseError("unknown family '" + a.family + "' (three-component, deck)");
    }
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

// --- convert ---

struct ConvertArgs {
    std::string in;
    std::string out;
    bool shift_rewards = false;
};

int run_convert(const ConvertArgs& a) {
    double shift = 0.0;
    const PomdpModel model = load_cassandra_file(a.in, a.shift_rewards, &shift);
    save_model_file(model, a.out);
    std::cout << "wrote " << a.out << " (" << model.num_states() << " states, "
              << model.num_maint() << " actions)\n";
    if (shift != 0.0)
        std::cout << "rewards shifted by " << format_g9(-shift) << " per step; values shift by "
                  << format_g9(-shift / (1.0 - model.discount)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inspection-and-maintenance planning under partial observability"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a model to a target gap");
    solve_cmd->add_option("--model", solve_args.model_path, "Model file")->required();
    add_solver_flags(solve_cmd, solve_args.flags);
    solve_cmd->add_option("--bounds-out", solve_args.bounds_out, "Write the bounds archive here");
    solve_cmd->add_option("--log-out", solve_args.log_out, "Write the convergence CSV here");

    MetricsArgs metrics_args;
    CLI::App* metrics_cmd =
        app.add_subcommand("metrics", "Value-of-observation metrics (voi, vopi, voshm, rvoci)");
    metrics_cmd->add_option("--metric", metrics_args.metric, "voi, vopi, voshm, or rvoci")
        ->required();
    metrics_cmd->add_option("--model", metrics_args.model_path, "Model file")->required();
    metrics_cmd->add_option("--model2", metrics_args.model2_path,
                            "Second setting (voshm: the permanent-monitoring side)");
    metrics_cmd->add_option("--channel", metrics_args.channel,
                            "Observation action index made permanent (rvoci)");
    add_solver_flags(metrics_cmd, metrics_args.flags);
    metrics_cmd->add_option("--out", metrics_args.out, "Write the gain report here");
    metrics_cmd->add_option("--format", metrics_args.format, "Report format: csv or kv")
        ->capture_default_str();

    SweepArgs sweep_args;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "Inspection-accuracy sweep over the three-component system");
    sweep_cmd->add_option("--grid", sweep_args.grid, "Accuracy grid lo:hi:step")
        ->capture_default_str();
    add_solver_flags(sweep_cmd, sweep_args.flags);
    sweep_cmd->add_option("--out", sweep_args.out, "Write the sweep CSV here");

    SimulateArgs sim_args;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo policy rollouts");
    sim_cmd->add_option("--model", sim_args.model_path, "Model file")->required();
    sim_cmd->add_option("--policy", sim_args.policy,
                        "greedy:<bounds>, condition:<flags>, do-nothing, always-repair")
        ->capture_default_str();
    sim_cmd->add_option("--episodes", sim_args.config.episodes, "Episode count")
        ->capture_default_str();
    sim_cmd->add_option("--horizon", sim_args.config.horizon,
                        "Steps per episode (0: pick from the discount and cost scale)");
    sim_cmd->add_option("--seed", sim_args.config.seed, "Master seed")->envname("VOIPLAN_SEED");
    sim_cmd->add_option("--confidence", sim_args.config.confidence,
                        "Confidence level: 0.90, 0.95, or 0.99");
    sim_cmd->add_option("--threads", sim_args.config.threads, "Worker threads")
        ->envname("VOIPLAN_THREADS");
    sim_cmd->add_flag("--initial-observation", sim_args.config.initial_observation,
                      "Draw a default-channel observation of the start state first");
    sim_cmd->add_option("--out", sim_args.out, "Write the rollout CSV here");
    sim_cmd->add_option("--trace", sim_args.trace_out,
                        "Write a single-episode trace CSV here (same seed)");

    BuildArgs build_args;
    CLI::App* build_cmd = app.add_subcommand("build", "Write a bundled case-study model file");
    build_cmd->add_option("--family", build_args.family, "three-component or deck")->required();
    build_cmd->add_option("--out", build_args.out, "Output model file")->required();
    build_cmd->add_option("--accuracy", build_args.accuracy, "Inspection accuracy p")
        ->capture_default_str();
    build_cmd->add_option("--setting", build_args.setting,
                          "1: optional inspections, 2: free always-on channel")
        ->capture_default_str();
    build_cmd->add_option("--default-accuracy", build_args.default_accuracy,
                          "Replace the default channel with a free condition channel");
    build_cmd->add_option("--seed", build_args.seed, "Synthetic deck seed")
        ->capture_default_str();
    build_cmd->add_option("--rates", build_args.rates, "Deck deterioration-rate bins")
        ->capture_default_str();
    build_cmd->add_option("--horizon", build_args.horizon, "Deck decision steps")
        ->capture_default_str();
    build_cmd->add_option("--jitter", build_args.jitter, "Deck ramp roughness")
        ->capture_default_str();

    ConvertArgs convert_args;
    CLI::App* convert_cmd =
        app.add_subcommand("convert", "Convert an interchange-format file to the native format");
    convert_cmd->add_option("--in", convert_args.in, "Interchange-format input")->required();
    convert_cmd->add_option("--out", convert_args.out, "Native model output")->required();
    convert_cmd->add_flag("--shift-rewards", convert_args.shift_rewards,
                          "Allow positive rewards by shifting all rewards down");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*solve_cmd) return run_solve(solve_args);
        if (*metrics_cmd) return run_metrics(metrics_args);
        if (*sweep_cmd) return run_sweep(sweep_args);
        if (*sim_cmd) return run_simulate(sim_args);
        if (*build_cmd) return run_build(build_args);
        if (*convert_cmd) return run_convert(convert_args);
    } catch (const IncompatibleSettings& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SpecInvariantViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
