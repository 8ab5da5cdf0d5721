// Copyright 2026 The orbit_tomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "orbit_tomo/cli.h"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "orbit_tomo/experiments.h"
#include "orbit_tomo/orbit_record.h"
#include "orbit_tomo/span_analysis.h"

namespace orbit_tomo {

namespace {

namespace fs = std::filesystem;

// Flags shared by the subcommands. Each is applied on top of the config file
// only when it was given on the command line.
struct Flags {
    int d = 0;
    double j = 0.0;
    std::string unitary;
    std::string observable;
    std::string measure;
    std::string unitary_file;
    std::string observable_file;
    std::string state_file;
    std::string record_file;
    uint64_t seed = 0;
    int record_length = 0;
    int n_states = 0;
    int n_unitaries = 0;
    double sigma = 0.0;
    double ensemble_size = 0.0;
    std::string fit_method;
    std::string grid;
    int threads = 0;
    std::string config_file;
    std::string output_dir;
    std::string name;
    bool full_scale = false;
};

struct Options {
    CLI::Option *d = nullptr;
    CLI::Option *j = nullptr;
    CLI::Option *unitary = nullptr;
    CLI::Option *observable = nullptr;
    CLI::Option *measure = nullptr;
    CLI::Option *unitary_file = nullptr;
    CLI::Option *observable_file = nullptr;
    CLI::Option *state_file = nullptr;
    CLI::Option *record_file = nullptr;
    CLI::Option *seed = nullptr;
    CLI::Option *record_length = nullptr;
    CLI::Option *n_states = nullptr;
    CLI::Option *n_unitaries = nullptr;
    CLI::Option *sigma = nullptr;
    CLI::Option *ensemble_size = nullptr;
    CLI::Option *fit_method = nullptr;
    CLI::Option *grid = nullptr;
    CLI::Option *threads = nullptr;
};

bool given(const CLI::Option *opt) {
    return opt != nullptr && opt->count() > 0;
}

void add_system_flags(CLI::App &cmd, Flags &f, Options &o) {
    auto *size = cmd.add_option_group("system size");
    o.d = size->add_option("--d", f.d, "Hilbert-space dimension");
    o.j = size->add_option("--J", f.j, "spin quantum number (d = 2J + 1)");
    o.d->excludes(o.j);
    o.unitary = cmd.add_option("--unitary", f.unitary, "unitary source: haar, qkt, dkt or file");
    o.unitary_file = cmd.add_option("--unitary-file", f.unitary_file, "JSON matrix file for --unitary file");
    o.observable = cmd.add_option("--observable", f.observable, "observable: Jz, Jx or file");
    o.observable_file = cmd.add_option("--observable-file", f.observable_file, "JSON matrix file for --observable file");
    o.seed = cmd.add_option("--seed", f.seed, "base seed");
    o.record_length = cmd.add_option("--record-length", f.record_length, "number of recorded steps")
                          ->check(CLI::PositiveNumber);
}

void add_fit_flags(CLI::App &cmd, Flags &f, Options &o) {
    o.measure = cmd.add_option("--measure", f.measure, "state measure: fubini_study, bures, hilbert_schmidt or file");
    o.sigma = cmd.add_option("--sigma", f.sigma, "standard deviation of the additive measurement noise")
                  ->check(CLI::NonNegativeNumber);
    o.ensemble_size = cmd.add_option("--N", f.ensemble_size, "ensemble size N")->check(CLI::PositiveNumber);
    o.fit_method = cmd.add_option("--fit-method", f.fit_method, "positivity solver: barrier or projected_gradient");
}

void add_output_flags(CLI::App &cmd, Flags &f) {
    cmd.add_option("--output-dir,--output", f.output_dir,
                   "output directory (default: $ORBIT_TOMO_OUTPUT_DIR, else the current directory)");
    cmd.add_option("--name", f.name, "file stem for the CSV and JSON outputs");
}

ExperimentConfig load_config_file(const std::string &path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    ExperimentConfig c = config_from_json(j, base);
    if (c.experiment != base.experiment) {
        throw ConfigError("config file '" + path + "' is for experiment '" + std::string(to_string(c.experiment)) +
                          "', but the command line asks for '" + std::string(to_string(base.experiment)) + "'");
    }
    return c;
}

void apply_flags(ExperimentConfig &c, const Flags &f, const Options &o) {
    if (given(o.d)) {
        c.d = f.d;
    }
    if (given(o.j)) {
        c.d = spin_dimension(f.j);
    }
    if (given(o.unitary)) {
        c.unitary = parse_unitary_source(f.unitary);
    }
    if (given(o.unitary_file)) {
        c.unitary_file = f.unitary_file;
        if (!given(o.unitary)) {
            c.unitary = UnitarySource::file;
        }
    }
    if (given(o.observable)) {
        c.observable = parse_observable_kind(f.observable);
    }
    if (given(o.observable_file)) {
        c.observable_file = f.observable_file;
        if (!given(o.observable)) {
            c.observable = ObservableKind::file;
        }
    }
    if (given(o.measure)) {
        c.measure = parse_state_measure(f.measure);
    }
    if (given(o.state_file)) {
        c.state_file = f.state_file;
        if (!given(o.measure)) {
            c.measure = StateMeasure::file;
        }
    }
    if (given(o.record_file)) {
        c.record_file = f.record_file;
    }
    if (given(o.seed)) {
        c.base_seed = f.seed;
    }
    if (given(o.record_length)) {
        c.record_length = f.record_length;
    }
    if (given(o.n_states)) {
        c.n_states = f.n_states;
    }
    if (given(o.n_unitaries)) {
        c.n_unitaries = f.n_unitaries;
    }
    if (given(o.sigma)) {
        c.sigma = f.sigma;
    }
    if (given(o.ensemble_size)) {
        c.ensemble_size = f.ensemble_size;
    }
    if (given(o.fit_method)) {
        try {
            c.fit.method = parse_fit_method(f.fit_method);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    if (given(o.grid)) {
        c.prefix_grid = parse_prefix_grid(f.grid);
    }
    if (given(o.threads)) {
        c.threads = f.threads;
    }
}

fs::path output_directory(const Flags &f, const ExperimentConfig &c) {
    fs::path dir;
    if (!f.output_dir.empty()) {
        dir = f.output_dir;
    } else if (!c.output_path.empty()) {
        dir = c.output_path;
    } else if (const char *env = std::getenv("ORBIT_TOMO_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        dir = env;
    } else {
        dir = ".";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

std::ofstream open_output(const fs::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    return out;
}

void write_json(const fs::path &path, const nlohmann::json &j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

nlohmann::json base_metadata(const ExperimentConfig &c) {
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash(c)));
    return {{"library", "orbit_tomo"},
            {"version", kLibraryVersion},
            {"config", c},
            {"config_hash", hash},
            {"seeds", {{"base_seed", c.base_seed}, {"unitary_seed", unitary_seed(c, 0)}}}};
}

int run_span_check(const ExperimentConfig &c, const Flags &f) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    const ComplexMatrix u0 = make_unitary(c, 0);
    const HermitianOperator o0 = make_observable(c);
    const int length = resolved_record_length(c);
    const OperatorBasis basis(c.d);
    const OperatorOrbit orbit = build_orbit(u0, o0, length - 1);
    const DesignMatrix design = design_matrix(orbit, basis);
    Eigen::BDCSVD<RealMatrix> svd(design.entries);
    const RealVector sv = svd.singularValues();
    const int span = numerical_rank(sv, design.rows(), design.cols());
    const SaturationReport report = check_saturation(u0, o0);
    const int bound = c.d * c.d - c.d + 1;

    const fs::path dir = output_directory(f, c);
    const std::string stem = f.name.empty() ? "span_check" : f.name;
    {
        auto out = open_output(dir / (stem + ".csv"));
        out << "index,singular_value\n";
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            out << i << ',' << format_double(sv[i]) << '\n';
        }
    }
    nlohmann::json meta = base_metadata(c);
    meta["record_length"] = length;
    meta["span_dimension"] = span;
    meta["rank_bound"] = bound;
    meta["commutant_dimension"] = commutant_dimension(u0);
    meta["missing_subspace_dimension"] = missing_subspace_dimension(u0, o0);
    meta["saturation_report"] = report;
    meta["wall_time_seconds"] = seconds_since(start);
    write_json(dir / (stem + ".json"), meta);

    std::cout << "span dimension " << span << " of bound " << bound << " (record length " << length
              << "), saturation conditions " << (report.saturated ? "hold" : "fail") << '\n';
    std::cout << (dir / (stem + ".json")).string() << '\n';
    return kExitOk;
}

int run_reconstruct(const ExperimentConfig &c, const Flags &f) {
    const auto start = std::chrono::steady_clock::now();
    const ReconstructionReport report = run_reconstruction(c);
    const ComplexMatrix &rho = report.fit.rho_bar.matrix();

    const fs::path dir = output_directory(f, c);
    const std::string stem = f.name.empty() ? "reconstruct" : f.name;
    {
        auto out = open_output(dir / (stem + ".csv"));
        out << "row,col,real,imag\n";
        for (Eigen::Index r = 0; r < rho.rows(); ++r) {
            for (Eigen::Index col = 0; col < rho.cols(); ++col) {
                out << r << ',' << col << ',' << format_double(rho(r, col).real()) << ','
                    << format_double(rho(r, col).imag()) << '\n';
            }
        }
    }
    if (c.record_file.empty()) {
        auto out = open_output(dir / (stem + "_record.csv"));
        write_record_csv(out, report.record);
    }
    nlohmann::json meta = base_metadata(c);
    meta["seeds"]["state_seed"] = state_seed(c, 0);
    meta["record_length"] = report.record_length;
    meta["covariance_rank"] = report.covariance_rank;
    meta["fit"] = report.fit;
    meta["fidelity"] = report.fidelity ? nlohmann::json(*report.fidelity) : nlohmann::json(nullptr);
    if (report.truth) {
        meta["truth"] = matrix_to_json(report.truth->matrix());
    }
    meta["wall_time_seconds"] = seconds_since(start);
    write_json(dir / (stem + ".json"), meta);

    std::cout << "covariance rank " << report.covariance_rank << ", cost " << format_double(report.fit.cost);
    if (report.fidelity) {
        std::cout << ", fidelity " << format_double(*report.fidelity);
    }
    std::cout << '\n' << (dir / (stem + ".json")).string() << '\n';
    return kExitOk;
}

int run_experiment_command(const ExperimentConfig &c, const Flags &f) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult result = run_experiment(c);
    const double wall = seconds_since(start);

    const fs::path dir = output_directory(f, c);
    const std::string stem = f.name.empty() ? std::string(to_string(c.experiment)) : f.name;
    {
        auto out = open_output(dir / (stem + ".csv"));
        write_rows_csv(out, result.rows);
    }
    write_json(dir / (stem + ".json"), experiment_metadata(result, wall));

    const int final_n = result.prefix_lengths.back();
    for (const auto &family : families(result.rows)) {
        std::cout << family << ": mean fidelity at n=" << final_n << " is "
                  << format_double(mean_fidelity(result.rows, final_n, family)) << '\n';
    }
    std::cout << (dir / (stem + ".csv")).string() << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(int argc, char **argv) {
    CLI::App app{"Quantum state reconstruction from a single-observable time series", "orbit-tomo"};
    app.set_version_flag("--version", std::string(kLibraryVersion));
    app.require_subcommand(1);

    Flags f;
    Options span_opts;
    Options rec_opts;
    Options exp_opts;

    auto *span = app.add_subcommand("span-check", "rank of the measurement orbit and the saturation conditions");
    add_system_flags(*span, f, span_opts);
    span->get_option_group("system size")->require_option(1);
    add_output_flags(*span, f);

    auto *rec = app.add_subcommand("reconstruct", "simulate or load one record and reconstruct the state");
    add_system_flags(*rec, f, rec_opts);
    add_fit_flags(*rec, f, rec_opts);
    rec_opts.state_file = rec->add_option("--state-file", f.state_file, "JSON density matrix used as the true state");
    rec_opts.record_file =
        rec->add_option("--record-file", f.record_file, "CSV record (n,value) to reconstruct from instead of simulating");
    rec->add_option("--config", f.config_file, "JSON config file; flags override its values");
    add_output_flags(*rec, f);

    auto *exp = app.add_subcommand("experiment", "run a seeded fidelity experiment");
    std::string kind;
    exp->add_option("kind", kind, "pure, mixed, qkt or dkt")
        ->required()
        ->check(CLI::IsMember({"pure", "mixed", "qkt", "dkt", "pure_fidelity_vs_n", "mixed_fidelity_vs_d",
                               "qkt_states", "dkt_states"}));
    add_system_flags(*exp, f, exp_opts);
    add_fit_flags(*exp, f, exp_opts);
    exp_opts.n_states = exp->add_option("--n-states", f.n_states, "states per unitary (per family for qkt/dkt)")
                            ->check(CLI::PositiveNumber);
    exp_opts.n_unitaries =
        exp->add_option("--n-unitaries", f.n_unitaries, "number of Haar unitaries")->check(CLI::PositiveNumber);
    exp_opts.grid = exp->add_option("--grid", f.grid, "prefix grid: auto, every, log or final");
    exp_opts.threads = exp->add_option("--threads", f.threads, "worker threads (0 = all cores)")
                           ->check(CLI::NonNegativeNumber);
    exp->add_option("--config", f.config_file, "JSON config file; flags override its values");
    exp->add_flag("--full-scale", f.full_scale, "use the full sample counts (100 states x 10 unitaries, 200 x 20 mixed)");
    add_output_flags(*exp, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        CLI::App *failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << '\n' << failing->help();
        return kExitConfigError;
    }

    try {
        ExperimentConfig c;
        const Options *opts = nullptr;
        if (span->parsed()) {
            c.experiment = ExperimentKind::span_check;
            opts = &span_opts;
        } else if (rec->parsed()) {
            c.experiment = ExperimentKind::reconstruct;
            opts = &rec_opts;
        } else {
            c.experiment = parse_experiment_kind(kind);
            opts = &exp_opts;
        }
        if (c.experiment == ExperimentKind::qkt_states || c.experiment == ExperimentKind::dkt_states) {
            c.d = 7;
        }
        if (f.full_scale) {
            apply_full_scale(c);
        }
        if (!f.config_file.empty()) {
            c = load_config_file(f.config_file, c);
        }
        apply_flags(c, f, *opts);
        if (c.experiment == ExperimentKind::mixed_fidelity_vs_d && !given(opts->measure) &&
            c.measure == StateMeasure::fubini_study) {
            c.measure = StateMeasure::bures;
        }
        if (rec->parsed() && f.config_file.empty() && !given(opts->d) && !given(opts->j)) {
            throw ConfigError("reconstruct needs --d or --J (or a --config file)");
        }
        validate(c);

        if (span->parsed()) {
            return run_span_check(c, f);
        }
        if (rec->parsed()) {
            return run_reconstruct(c, f);
        }
        return run_experiment_command(c, f);
    } catch (const NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumericalError;
    } catch (const EigenstateAmbiguity &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumericalError;
    } catch (const std::invalid_argument &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        std::cerr << "run 'orbit-tomo --help' for usage\n";
        return kExitConfigError;
    } catch (const std::domain_error &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumericalError;
    }
}

}  // namespace orbit_tomo
