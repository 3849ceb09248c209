#include "lrfree/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "lrfree/harness.hpp"
#include "lrfree/invariants.hpp"
#include "lrfree/objectives.hpp"

namespace lrfree::cli {

namespace {

struct App {
    CLI::App app{"Learning-rate-free optimizers: runs, sweeps and property checks", "lrfree"};
    CLI::App* run = nullptr;
    CLI::App* sweep = nullptr;
    CLI::App* gradcheck = nullptr;
    CLI::App* invariants = nullptr;
    CLI::App* list = nullptr;
    Invocation inv;
    std::string config;
    std::string out;

    App() {
        app.require_subcommand(1, 1);
        app.fallthrough();
        app.add_flag("-v,--verbose", inv.verbose, "Print progress to stderr");

        run = app.add_subcommand("run", "Run one experiment and write its trace");
        run->add_option("-c,--config", config, "Experiment config (JSON)")->required();
        run->add_option("-o,--out", out, "Output directory");

        sweep = app.add_subcommand("sweep", "Run a list of experiments and print a comparison table");
        sweep->add_option("-c,--config", config, "Sweep config: {\"runs\": [...]} or an array")->required();
        sweep->add_option("-o,--out", out, "Write per-run traces to this directory");
        sweep->add_option("-j,--threads", inv.threads, "Runs executed concurrently")
            ->check(CLI::PositiveNumber);

        gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
        gradcheck->add_option("-c,--config", config, "Check only this experiment's objective");

        invariants = app.add_subcommand("invariants", "Run property suites");
        invariants->add_option("-s,--suite", inv.suite, "Suite id or 'all'");

        list = app.add_subcommand("list", "List optimizers, objectives, scaling rules, schedules and suites");
    }

    Invocation finish() {
        if (run->parsed()) inv.command = Command::Run;
        else if (sweep->parsed()) inv.command = Command::Sweep;
        else if (gradcheck->parsed()) inv.command = Command::Gradcheck;
        else if (invariants->parsed()) inv.command = Command::Invariants;
        else inv.command = Command::List;
        if (!config.empty()) inv.config_path = config;
        if (!out.empty()) inv.out_dir = out;
        return inv;
    }

    std::string help() const {
        for (CLI::App* sub : {run, sweep, gradcheck, invariants, list})
            if (sub->parsed()) return sub->help();
        return app.help();
    }
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }
}

int cmd_run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = parse_config(read_json(*inv.config_path));
    const std::string dir = inv.out_dir.value_or(cfg.output.value_or("."));
    if (inv.verbose) err << "running " << cfg.name << ": " << to_json(cfg).dump() << '\n';
    const RunSummary s = run_experiment(cfg, dir);
    out << to_json(s).dump(2) << '\n';
    if (s.failure) {
        err << "run failed: " << *s.failure << '\n';
        return kRunFailure;
    }
    return kOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const auto configs = parse_sweep(read_json(*inv.config_path));
    SweepOptions options;
    options.threads = inv.threads;
    if (inv.out_dir) options.out_dir = *inv.out_dir;
    if (inv.verbose) err << "sweeping " << configs.size() << " configs\n";
    const auto rows = sweep(configs, options);
    print_table(out, rows);
    if (inv.out_dir) {
        std::ofstream csv(std::filesystem::path(*inv.out_dir) / "sweep.csv", std::ios::binary);
        csv << "name,optimizer,final_loss,min_loss,success,error\n";
        for (const auto& r : rows)
            csv << r.name << ',' << r.optimizer << ',' << r.final_loss << ',' << r.min_loss << ','
                << (r.success ? 1 : 0) << ",\"" << r.error << "\"\n";
    }
    return kOk;
}

int cmd_gradcheck(const Invocation& inv, std::ostream& out, std::ostream&) {
    std::vector<ObjectivePtr> objectives;
    if (inv.config_path) {
        objectives.push_back(build_objective(parse_config(read_json(*inv.config_path)).objective));
    } else {
        DatasetSpec ds;
        ds.samples = 100;
        ds.features = 6;
        const SyntheticDataset data = make_dataset(ds);
        Rng rng(0);
        objectives = {ill_conditioned_quadratic(8, 100.0, rng.normal_vec(8)),
                      l1_lipschitz(rng.normal_vec(8)), logistic_regression(data), tiny_mlp(data, 5, 1)};
    }
    constexpr double kStep = 1e-5;
    constexpr double kTolerance = 1e-5;
    bool ok = true;
    Rng rng(12345);
    for (const auto& f : objectives) {
        double worst = 0.0;
        for (int p = 0; p < 10; ++p) {
            ParamVec w = add(f->initial_point(), rng.normal_vec(f->dim()));
            if (f->name() == "l1")  // stay clear of the kinks
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (std::abs(w[i] - (*f->w_star)[i]) < 1e-3) w[i] += 0.01;
            const ParamVec ga = f->gradient(w);
            const ParamVec gf = finite_diff_grad(*f, w, kStep);
            worst = std::max(worst, norm2(sub(ga, gf)) / std::max({norm2(ga), norm2(gf), 1e-300}));
        }
        const bool pass = worst <= kTolerance;
        ok &= pass;
        out << (pass ? "[PASS] " : "[FAIL] ") << f->name() << "  max relative error " << worst << '\n';
    }
    return ok ? kOk : kRunFailure;
}

int cmd_invariants(const Invocation& inv, std::ostream& out) {
    const InvariantReport report = check_invariants(inv.suite);
    print_report(out, report);
    return report.passed() ? kOk : kRunFailure;
}

int cmd_list(std::ostream& out) {
    out << "optimizers: sgd adam sps naive_sps ps_sps dadapt_sgd ps_da_sgd\n"
        << "objectives: quadratic l1 logistic mlp\n"
        << "scaling rules: identity constant adam amsgrad\n"
        << "schedules: constant poly cosine\n"
        << "invariant suites:";
    for (const auto& s : invariant_suites()) out << ' ' << s;
    out << " all\n";
    return kOk;
}

}  // namespace

ParseOutcome parse_args(const std::vector<std::string>& args) {
    App app;
    std::vector<const char*> argv{"lrfree"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        return {std::nullopt, kOk, app.help()};
    } catch (const CLI::CallForAllHelp&) {
        return {std::nullopt, kOk, app.app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        return {std::nullopt, kUsage, std::string("error: ") + e.what() + "\n\n" + app.help()};
    }
    return {app.finish(), kOk, {}};
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        switch (inv.command) {
            case Command::Run: return cmd_run(inv, out, err);
            case Command::Sweep: return cmd_sweep(inv, out, err);
            case Command::Gradcheck: return cmd_gradcheck(inv, out, err);
            case Command::Invariants: return cmd_invariants(inv, out);
            case Command::List: return cmd_list(out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        return kRunFailure;
    }
    return kUsage;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const ParseOutcome parsed = parse_args(args);
    if (!parsed.invocation) {
        (parsed.exit_code == kOk ? out : err) << parsed.message;
        return parsed.exit_code;
    }
    return execute(*parsed.invocation, out, err);
}

}  // namespace lrfree::cli
