#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matprop/error.hpp"
#include "matprop/estimators.hpp"
#include "matprop/harness.hpp"
#include "matprop/instances.hpp"
#include "matprop/matrix_io.hpp"
#include "matprop/oracle.hpp"
#include "matprop/rank_tester.hpp"
#include "matprop/spectral_testers.hpp"

namespace matprop {

namespace {

Overrides parse_sets(const std::vector<std::string>& sets) {
    Overrides o;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set " + s + ": expected name=value");
        set_override(o, s.substr(0, eq), s.substr(eq + 1));
    }
    return o;
}

void print_verdict(std::ostream& out, const Verdict& v) {
    out << to_string(v.decision) << " queries=" << v.queries_used << " statistic=" << format_real(v.statistic)
        << " stage=" << v.stage << '\n';
}

void print_report(std::ostream& out, const EstimatorReport& r) {
    out << "estimate=" << format_real(r.estimate) << " queries=" << r.queries_used
        << " samples=" << r.nominal_samples << '\n';
}

// Options shared by the single-run commands.
struct RunOptions {
    std::string in;
    std::uint64_t seed = 0;
    std::vector<std::string> sets;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--in", o.in, "matrix file")->required();
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--set", o.sets, "constant override name=value (repeatable)");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sublinear-query matrix property testers and estimators", "matprop"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    // gen
    auto* gen = app.add_subcommand("gen", "generate an instance matrix");
    InstanceSpec spec;
    std::string family_name, field_name = "real", gen_out = "-";
    gen->add_option("--family", family_name, "instance family")->required();
    gen->add_option("--n", spec.n, "side length");
    gen->add_option("--d", spec.d, "rank or stable-rank parameter");
    gen->add_option("--eps", spec.eps, "farness / gap parameter");
    gen->add_option("--field", field_name, "real or gf:<p>");
    gen->add_option("--eta", spec.eta, "Schatten pair perturbation");
    gen->add_option("--trunc-C", spec.trunc_C, "truncation level");
    gen->add_option("--member", spec.member, "pair member, 0 or 1");
    gen->add_option("--noise-exponent", spec.noise_exponent, "Gaussian pair noise n^-k");
    gen->add_option("--seed", spec.seed, "random seed");
    gen->add_option("--out", gen_out, "output path, - for stdout");

    // rank-test
    auto* rank = app.add_subcommand("rank-test", "non-adaptive rank test");
    RunOptions rank_opts;
    std::size_t rank_d = 0;
    double rank_eps = 0.1;
    bool rank_sensing = false;
    add_run_options(rank, rank_opts);
    rank->add_option("--d", rank_d, "target rank")->required();
    rank->add_option("--eps", rank_eps, "farness");
    rank->add_flag("--sensing", rank_sensing, "bilinear sensing probes instead of entries");

    // stable-rank-test
    auto* srank = app.add_subcommand("stable-rank-test", "three-stage stable rank test");
    RunOptions srank_opts;
    double srank_d = 0.0, srank_eps = 0.1;
    bool srank_sensing = false;
    add_run_options(srank, srank_opts);
    srank->add_option("--d", srank_d, "stable rank threshold")->required();
    srank->add_option("--eps", srank_eps, "gap");
    srank->add_flag("--sensing", srank_sensing, "sensing model");

    // schatten-test
    auto* schatten = app.add_subcommand("schatten-test", "Schatten-p norm test (p > 2)");
    RunOptions sch_opts;
    double sch_p = 4.0, sch_c = 0.5, sch_eps = 0.1;
    add_run_options(schatten, sch_opts);
    schatten->add_option("--p", sch_p, "Schatten exponent");
    schatten->add_option("--c", sch_c, "mass threshold, fraction of n^p");
    schatten->add_option("--eps", sch_eps, "gap");

    // opnorm
    auto* opnorm = app.add_subcommand("opnorm", "norm estimators");
    RunOptions op_opts;
    std::string method;
    std::optional<std::size_t> op_q, op_N, op_k;
    std::optional<double> op_tau, op_dhint;
    add_run_options(opnorm, op_opts);
    opnorm->add_option("--method", method, "frobenius | screen | sampling | cycles | sensing")
        ->required()
        ->check(CLI::IsMember({"frobenius", "screen", "sampling", "cycles", "sensing"}));
    opnorm->add_option("--q", op_q, "frobenius: draws; screen: block side; cycles, sensing: cycle length");
    opnorm->add_option("--N", op_N, "cycles averaged");
    opnorm->add_option("--k", op_k, "sketch size (sensing)");
    opnorm->add_option("--tau", op_tau, "accuracy (sampling)");
    opnorm->add_option("--d-hint", op_dhint, "stable-rank hint (sampling)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Monte Carlo trials to CSV");
    std::string exp_config, exp_out;
    std::vector<std::string> exp_sets;
    std::size_t workers = 0;
    bool timing = false;
    exp->add_option("--config", exp_config, "key=value config file");
    exp->add_option("--set", exp_sets, "setting key=value (repeatable, wins over the file)");
    exp->add_option("--out", exp_out, "CSV path (default: config output or stdout)");
    exp->add_option("--workers", workers, "worker threads (default: MATPROP_WORKERS or cores)");
    exp->add_flag("--timing", timing, "fill the ms column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        if (*gen) {
            spec.family = parse_family(family_name);
            const Field f = Field::parse(field_name);
            spec.p = f.is_real() ? 0 : f.modulus();
            const DenseMatrix m = generate(spec);
            const MatrixMeta meta{spec.seed, to_string(spec.family)};
            if (gen_out == "-") {
                write_matrix(out, m, meta);
            } else {
                save_matrix(gen_out, m, meta);
            }
        } else if (*rank) {
            const Overrides o = parse_sets(rank_opts.sets);
            DenseMatrix m = load_matrix(rank_opts.in).matrix;
            Rng rng(rank_opts.seed);
            if (rank_sensing) {
                SensingOracle oracle(std::move(m));
                print_verdict(out, test_rank_sensing(oracle, rank_d, rng));
            } else {
                EntryOracle oracle(std::move(m));
                print_verdict(out, test_rank(oracle, make_rank_config(rank_d, rank_eps, rank_opts.seed, o), rng));
            }
        } else if (*srank) {
            const Overrides o = parse_sets(srank_opts.sets);
            DenseMatrix m = load_matrix(srank_opts.in).matrix;
            Rng rng(srank_opts.seed);
            const QueryModel mode = srank_sensing ? QueryModel::Sensing : QueryModel::Sampling;
            const StableRankConfig cfg = make_stable_rank_config(srank_d, srank_eps, mode, srank_opts.seed, o);
            if (srank_sensing) {
                SensingOracle oracle(std::move(m));
                print_verdict(out, test_stable_rank(oracle, cfg, rng));
            } else {
                EntryOracle oracle(std::move(m));
                print_verdict(out, test_stable_rank(oracle, cfg, rng));
            }
        } else if (*schatten) {
            const Overrides o = parse_sets(sch_opts.sets);
            EntryOracle oracle(load_matrix(sch_opts.in).matrix);
            Rng rng(sch_opts.seed);
            print_verdict(out, test_schatten(oracle, make_schatten_config(sch_p, sch_c, sch_eps, sch_opts.seed, o), rng));
        } else if (*opnorm) {
            SamplerParams sp = make_sampler_params(parse_sets(op_opts.sets));
            if (op_N) sp.N_cycles = *op_N;
            if (op_k) sp.k_sketch = *op_k;
            if (op_tau) sp.tau = *op_tau;
            if (op_dhint) sp.d_hint = *op_dhint;
            if (op_q && (method == "cycles" || method == "sensing")) sp.q_cycle = *op_q;
            DenseMatrix m = load_matrix(op_opts.in).matrix;
            Rng rng(op_opts.seed);
            if (method == "sensing") {
                SensingOracle oracle(std::move(m));
                print_report(out, estimate_opnorm_sensing(oracle, sp, rng));
            } else {
                EntryOracle oracle(std::move(m));
                if (method == "frobenius") {
                    print_report(out, estimate_frobenius(oracle, op_q.value_or(1000), rng));
                } else if (method == "screen") {
                    print_report(out, opnorm_screen(oracle, op_q.value_or(32), rng));
                } else if (method == "sampling") {
                    print_report(out, estimate_opnorm_sampling(oracle, sp, rng));
                } else {
                    print_report(out, estimate_opnorm_cycles(oracle, sp.q_cycle, sp.N_cycles, rng));
                }
            }
        } else if (*exp) {
            ExperimentConfig cfg;
            if (!exp_config.empty()) apply_config_file(cfg, exp_config);
            for (const auto& s : exp_sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) throw ConfigError("--set " + s + ": expected key=value");
                try {
                    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
                } catch (const ConfigError& e) {
                    throw ConfigError(std::string("--set ") + e.what());
                }
            }
            if (!exp_out.empty()) cfg.output = exp_out;
            if (timing) cfg.timing = true;
            const ExperimentResult r = run_experiment(cfg, workers);
            if (cfg.output.empty() || cfg.output == "-") {
                write_csv(out, r.records);
                write_summary(err, r.summary);
            } else {
                std::ofstream file(cfg.output);
                if (!file) throw ConfigError("output: cannot write " + cfg.output);
                write_csv(file, r.records);
                write_summary(out, r.summary);
            }
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const OutOfRange& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ShapeMismatch& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace matprop
