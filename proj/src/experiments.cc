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

#include "orbit_tomo/experiments.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "orbit_tomo/orbit_record.h"
#include "orbit_tomo/random_ensembles.h"
#include "orbit_tomo/span_analysis.h"

namespace orbit_tomo {

namespace {

constexpr uint64_t kUnitaryStream = 1;
constexpr uint64_t kStateStream = 2;
constexpr uint64_t kNoiseStream = 3;

constexpr std::string_view kGenericPure = "generic_pure";
constexpr std::string_view kGenericMixed = "generic_mixed";
constexpr std::string_view kParityCat = "parity_cat";
constexpr std::string_view kParityMixed = "parity_mixed";

template <typename Enum, size_t N>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N], const char *what) {
    for (const auto &[name, value] : table) {
        if (name == s) {
            return value;
        }
    }
    std::string options;
    for (const auto &[name, value] : table) {
        options += options.empty() ? "" : ", ";
        options += name;
    }
    throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of: " + options + ")");
}

const std::pair<std::string_view, ExperimentKind> kExperimentNames[] = {
    {"pure_fidelity_vs_n", ExperimentKind::pure_fidelity_vs_n},
    {"pure", ExperimentKind::pure_fidelity_vs_n},
    {"mixed_fidelity_vs_d", ExperimentKind::mixed_fidelity_vs_d},
    {"mixed", ExperimentKind::mixed_fidelity_vs_d},
    {"qkt_states", ExperimentKind::qkt_states},
    {"qkt", ExperimentKind::qkt_states},
    {"dkt_states", ExperimentKind::dkt_states},
    {"dkt", ExperimentKind::dkt_states},
    {"span_check", ExperimentKind::span_check},
    {"span-check", ExperimentKind::span_check},
    {"reconstruct", ExperimentKind::reconstruct},
};
const std::pair<std::string_view, UnitarySource> kUnitaryNames[] = {
    {"auto", UnitarySource::automatic}, {"haar", UnitarySource::haar}, {"qkt", UnitarySource::qkt},
    {"dkt", UnitarySource::dkt},        {"file", UnitarySource::file},
};
const std::pair<std::string_view, ObservableKind> kObservableNames[] = {
    {"auto", ObservableKind::automatic}, {"Jz", ObservableKind::jz}, {"jz", ObservableKind::jz},
    {"Jx", ObservableKind::jx},          {"jx", ObservableKind::jx}, {"file", ObservableKind::file},
};
const std::pair<std::string_view, StateMeasure> kMeasureNames[] = {
    {"fubini_study", StateMeasure::fubini_study},
    {"bures", StateMeasure::bures},
    {"hilbert_schmidt", StateMeasure::hilbert_schmidt},
    {"hs", StateMeasure::hilbert_schmidt},
    {"file", StateMeasure::file},
};
const std::pair<std::string_view, PrefixGrid> kGridNames[] = {
    {"auto", PrefixGrid::automatic},
    {"every", PrefixGrid::every},
    {"log", PrefixGrid::log},
    {"final", PrefixGrid::final_only},
};

int bound(int d) {
    return d * d - d + 1;
}

void parallel_for(int count, int threads, const std::function<void(int)> &body) {
    if (threads <= 0) {
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) {
                    body(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

DensityMatrix load_density_json(const std::string &path) {
    ComplexMatrix m = load_matrix_json(path);
    try {
        return DensityMatrix(std::move(m));
    } catch (const std::invalid_argument &e) {
        throw ConfigError("state file '" + path + "': " + e.what());
    }
}

DensityMatrix sample_state(const ExperimentConfig &config, StateMeasure measure, SeededRng &rng) {
    switch (measure) {
        case StateMeasure::fubini_study:
            return random_pure_fubini_study(config.d, rng);
        case StateMeasure::bures:
            return random_mixed_bures(config.d, rng);
        case StateMeasure::hilbert_schmidt:
            return random_mixed_hs(config.d, rng);
        case StateMeasure::file:
            return load_density_json(config.state_file);
    }
    throw ConfigError("unsupported state measure");
}

DensityMatrix sample_family(const ExperimentConfig &config, std::string_view family, SeededRng &rng) {
    const double j = config.spin();
    if (family == kGenericPure) {
        return random_pure_fubini_study(config.d, rng);
    }
    if (family == kGenericMixed) {
        return random_mixed_hs(config.d, rng);
    }
    if (family == kParityCat) {
        return random_parity_cat(j, rng);
    }
    if (family == kParityMixed) {
        return random_extremal_jx_mixture(j, rng);
    }
    return sample_state(config, parse_state_measure(family), rng);
}

// Everything that depends only on the unitary: the orbit, and for each prefix
// length the pseudo-inverse and covariance.
struct UnitaryContext {
  uint64_t seed = 0;
  OperatorOrbit orbit;
  std::vector<LinearInverter> inverters;
  std::vector<RealMatrix> covariances;
  ComplexMatrix eigenvectors;  // of U0, for the purity prior
};

// Pure-state runs carry the prior that the unknown state is pure.
bool uses_purity_prior(const ExperimentConfig &config) {
    return config.experiment == ExperimentKind::pure_fidelity_vs_n ||
           (config.experiment == ExperimentKind::reconstruct && config.measure == StateMeasure::fubini_study);
}

UnitaryContext build_context(const ExperimentConfig &config, int unitary_index, const HermitianOperator &observable,
                             const OperatorBasis &basis, const std::vector<int> &lengths, int record_length) {
    ComplexMatrix u0 = make_unitary(config, unitary_index);
    OperatorOrbit orbit = build_orbit(u0, observable, record_length - 1);
    DesignMatrix design = design_matrix(orbit, basis);
    UnitaryContext ctx{unitary_seed(config, unitary_index), std::move(orbit), {}, {}, {}};
    if (uses_purity_prior(config)) {
        ctx.eigenvectors = unitary_eigen(u0).vectors;
    }
    for (int n : lengths) {
        DesignMatrix prefix = design.prefix(n);
        ctx.inverters.emplace_back(prefix);
        ctx.covariances.push_back(covariance(prefix));
    }
    return ctx;
}

struct Trial {
  int unitary_index;
  int state_index;
  int trial_index;
  std::string family;
};

ExperimentResult run_trials(const ExperimentConfig &config, const std::vector<int> &unitary_indices,
                            const std::vector<Trial> &trials) {
    validate(config);
    const int record_length = resolved_record_length(config);
    const std::vector<int> lengths = prefix_lengths(config);
    const OperatorBasis basis(config.d);
    const HermitianOperator observable = make_observable(config);
    const uint64_t hash = config_hash(config);
    const std::string experiment_name(to_string(config.experiment));

    std::map<int, UnitaryContext> contexts;
    for (int u : unitary_indices) {
        contexts.emplace(u, build_context(config, u, observable, basis, lengths, record_length));
    }

    std::vector<std::vector<ExperimentRow>> per_trial(trials.size());
    parallel_for(static_cast<int>(trials.size()), config.threads, [&](int i) {
        const Trial &trial = trials[static_cast<size_t>(i)];
        const UnitaryContext &ctx = contexts.at(trial.unitary_index);
        const uint64_t seed = state_seed(config, trial.trial_index);
        SeededRng state_rng(seed, kStateStream);
        DensityMatrix truth = sample_family(config, trial.family, state_rng);
        SeededRng noise_rng(seed, kNoiseStream);
        MeasurementRecord record = simulate_record(truth, ctx.orbit, config.ensemble_size, config.sigma, noise_rng);

        auto &rows = per_trial[static_cast<size_t>(i)];
        rows.reserve(lengths.size());
        for (size_t g = 0; g < lengths.size(); ++g) {
            const int n = lengths[g];
            ExperimentRow row{experiment_name, trial.family, config.d, n, trial.unitary_index, trial.state_index,
                              std::numeric_limits<double>::quiet_NaN(), ctx.inverters[g].rank(), 0.0, 0, false,
                              ctx.seed, seed, hash};
            try {
                MlEstimate ml = ctx.inverters[g].estimate(record.prefix(n), config.ensemble_size);
                FitResult fit = positivity_fit(ml, ctx.covariances[g], basis, config.fit);
                if (ctx.eigenvectors.size() > 0) {
                    fit = apply_purity_prior(fit, ml, ctx.covariances[g], basis, ctx.eigenvectors, observable);
                }
                row.fidelity = fidelity(fit.rho_bar, truth);
                row.cost = fit.cost;
                row.iterations = fit.iterations;
                row.converged = fit.converged;
            } catch (const NumericalError &) {
                // Recorded as a failed row (NaN fidelity, not converged).
            }
            rows.push_back(std::move(row));
        }
    });

    ExperimentResult result{config, lengths, {}};
    for (auto &rows : per_trial) {
        for (auto &row : rows) {
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

void require_experiment(const ExperimentConfig &config, ExperimentKind kind, const char *runner) {
    if (config.experiment != kind) {
        throw ConfigError(std::string(runner) + ": config is for experiment '" +
                          std::string(to_string(config.experiment)) + "'");
    }
}

ExperimentResult run_kicked_top(const ExperimentConfig &config) {
    std::vector<Trial> trials;
    const std::string_view names[] = {kGenericPure, kGenericMixed, kParityCat, kParityMixed};
    int trial_index = 0;
    for (std::string_view family : names) {
        for (int s = 0; s < config.n_states; ++s) {
            trials.push_back({0, s, trial_index++, std::string(family)});
        }
    }
    return run_trials(config, {0}, trials);
}

}  // namespace

std::string_view to_string(ExperimentKind v) {
    switch (v) {
        case ExperimentKind::pure_fidelity_vs_n:
            return "pure_fidelity_vs_n";
        case ExperimentKind::mixed_fidelity_vs_d:
            return "mixed_fidelity_vs_d";
        case ExperimentKind::qkt_states:
            return "qkt_states";
        case ExperimentKind::dkt_states:
            return "dkt_states";
        case ExperimentKind::span_check:
            return "span_check";
        case ExperimentKind::reconstruct:
            return "reconstruct";
    }
    return "unknown";
}

std::string_view to_string(UnitarySource v) {
    switch (v) {
        case UnitarySource::automatic:
            return "auto";
        case UnitarySource::haar:
            return "haar";
        case UnitarySource::qkt:
            return "qkt";
        case UnitarySource::dkt:
            return "dkt";
        case UnitarySource::file:
            return "file";
    }
    return "unknown";
}

std::string_view to_string(ObservableKind v) {
    switch (v) {
        case ObservableKind::automatic:
            return "auto";
        case ObservableKind::jz:
            return "Jz";
        case ObservableKind::jx:
            return "Jx";
        case ObservableKind::file:
            return "file";
    }
    return "unknown";
}

std::string_view to_string(StateMeasure v) {
    switch (v) {
        case StateMeasure::fubini_study:
            return "fubini_study";
        case StateMeasure::bures:
            return "bures";
        case StateMeasure::hilbert_schmidt:
            return "hilbert_schmidt";
        case StateMeasure::file:
            return "file";
    }
    return "unknown";
}

std::string_view to_string(PrefixGrid v) {
    switch (v) {
        case PrefixGrid::automatic:
            return "auto";
        case PrefixGrid::every:
            return "every";
        case PrefixGrid::log:
            return "log";
        case PrefixGrid::final_only:
            return "final";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view s) {
    return parse_enum(s, kExperimentNames, "experiment");
}
UnitarySource parse_unitary_source(std::string_view s) {
    return parse_enum(s, kUnitaryNames, "unitary source");
}
ObservableKind parse_observable_kind(std::string_view s) {
    return parse_enum(s, kObservableNames, "observable");
}
StateMeasure parse_state_measure(std::string_view s) {
    return parse_enum(s, kMeasureNames, "state measure");
}
PrefixGrid parse_prefix_grid(std::string_view s) {
    return parse_enum(s, kGridNames, "prefix grid");
}

void apply_full_scale(ExperimentConfig &config) {
    if (config.experiment == ExperimentKind::mixed_fidelity_vs_d) {
        config.n_states = 200;
        config.n_unitaries = 20;
    } else {
        config.n_states = 100;
        config.n_unitaries = 10;
    }
}

void validate(const ExperimentConfig &config) {
    if (config.d < 2) {
        throw ConfigError("d must be at least 2 (got " + std::to_string(config.d) + ")");
    }
    if (config.n_states < 1 || config.n_unitaries < 1) {
        throw ConfigError("n_states and n_unitaries must be at least 1");
    }
    if (config.record_length < 0) {
        throw ConfigError("record_length must be positive (0 selects the default)");
    }
    if (!(config.ensemble_size > 0.0)) {
        throw ConfigError("ensemble size N must be positive");
    }
    if (!(config.sigma >= 0.0)) {
        throw ConfigError("sigma must be non-negative");
    }
    if (resolved_unitary(config) == UnitarySource::file && config.unitary_file.empty()) {
        throw ConfigError("unitary source 'file' needs unitary_file");
    }
    if (resolved_observable(config) == ObservableKind::file && config.observable_file.empty()) {
        throw ConfigError("observable 'file' needs observable_file");
    }
    if (config.measure == StateMeasure::file && config.state_file.empty() &&
        config.experiment != ExperimentKind::reconstruct) {
        throw ConfigError("state measure 'file' needs state_file");
    }
    if (config.experiment == ExperimentKind::pure_fidelity_vs_n && config.measure != StateMeasure::fubini_study &&
        config.measure != StateMeasure::file) {
        throw ConfigError("the pure-state experiment samples from the fubini_study measure");
    }
    if (config.experiment == ExperimentKind::mixed_fidelity_vs_d && config.measure != StateMeasure::bures &&
        config.measure != StateMeasure::hilbert_schmidt && config.measure != StateMeasure::file) {
        throw ConfigError("the mixed-state experiment needs measure bures or hilbert_schmidt");
    }
}

void to_json(nlohmann::json &j, const ExperimentConfig &c) {
    j = nlohmann::json{
        {"experiment", to_string(c.experiment)},
        {"d", c.d},
        {"unitary", to_string(c.unitary)},
        {"observable", to_string(c.observable)},
        {"measure", to_string(c.measure)},
        {"n_states", c.n_states},
        {"n_unitaries", c.n_unitaries},
        {"record_length", c.record_length},
        {"ensemble_size", c.ensemble_size},
        {"sigma", c.sigma},
        {"base_seed", c.base_seed},
        {"output_path", c.output_path},
        {"prefix_grid", to_string(c.prefix_grid)},
        {"qkt", {{"phi", c.qkt.phi}, {"theta", c.qkt.theta}}},
        {"dkt",
         {{"phi", c.dkt.phi}, {"phi_prime", c.dkt.phi_prime}, {"theta_x", c.dkt.theta_x}, {"theta_y", c.dkt.theta_y}}},
        {"unitary_file", c.unitary_file},
        {"observable_file", c.observable_file},
        {"state_file", c.state_file},
        {"record_file", c.record_file},
        {"fit",
         {{"method", to_string(c.fit.method)},
          {"gap_tolerance", c.fit.gap_tolerance},
          {"barrier_growth", c.fit.barrier_growth},
          {"max_newton_steps", c.fit.max_newton_steps},
          {"relative_tolerance", c.fit.relative_tolerance},
          {"max_iterations", c.fit.max_iterations}}},
        {"threads", c.threads},
    };
}

ExperimentConfig config_from_json(const nlohmann::json &j, ExperimentConfig c) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    auto check_keys = [](const nlohmann::json &obj, std::initializer_list<std::string_view> allowed,
                         const std::string &where) {
        for (const auto &item : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
                throw ConfigError("unknown config key '" + where + item.key() + "'");
            }
        }
    };
    check_keys(j,
               {"experiment", "d", "J", "unitary", "observable", "measure", "n_states", "n_unitaries",
                "record_length", "ensemble_size", "N", "sigma", "base_seed", "seed", "output_path", "prefix_grid",
                "qkt", "dkt", "unitary_file", "observable_file", "state_file", "record_file", "fit", "threads",
                "full_scale"},
               "");
    try {
        if (j.contains("experiment")) {
            c.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
        }
        if (j.value("full_scale", false)) {
            apply_full_scale(c);
        }
        if (j.contains("d")) {
            c.d = j.at("d").get<int>();
        }
        if (j.contains("J")) {
            c.d = spin_dimension(j.at("J").get<double>());
        }
        if (j.contains("unitary")) {
            c.unitary = parse_unitary_source(j.at("unitary").get<std::string>());
        }
        if (j.contains("observable")) {
            c.observable = parse_observable_kind(j.at("observable").get<std::string>());
        }
        if (j.contains("measure")) {
            c.measure = parse_state_measure(j.at("measure").get<std::string>());
        }
        c.n_states = j.value("n_states", c.n_states);
        c.n_unitaries = j.value("n_unitaries", c.n_unitaries);
        c.record_length = j.value("record_length", c.record_length);
        c.ensemble_size = j.value("ensemble_size", c.ensemble_size);
        c.ensemble_size = j.value("N", c.ensemble_size);
        c.sigma = j.value("sigma", c.sigma);
        c.base_seed = j.value("base_seed", c.base_seed);
        c.base_seed = j.value("seed", c.base_seed);
        c.output_path = j.value("output_path", c.output_path);
        if (j.contains("prefix_grid")) {
            c.prefix_grid = parse_prefix_grid(j.at("prefix_grid").get<std::string>());
        }
        if (j.contains("qkt")) {
            const auto &q = j.at("qkt");
            check_keys(q, {"phi", "theta"}, "qkt.");
            c.qkt.phi = q.value("phi", c.qkt.phi);
            c.qkt.theta = q.value("theta", c.qkt.theta);
        }
        if (j.contains("dkt")) {
            const auto &q = j.at("dkt");
            check_keys(q, {"phi", "phi_prime", "theta_x", "theta_y"}, "dkt.");
            c.dkt.phi = q.value("phi", c.dkt.phi);
            c.dkt.phi_prime = q.value("phi_prime", c.dkt.phi_prime);
            c.dkt.theta_x = q.value("theta_x", c.dkt.theta_x);
            c.dkt.theta_y = q.value("theta_y", c.dkt.theta_y);
        }
        c.unitary_file = j.value("unitary_file", c.unitary_file);
        c.observable_file = j.value("observable_file", c.observable_file);
        c.state_file = j.value("state_file", c.state_file);
        c.record_file = j.value("record_file", c.record_file);
        if (j.contains("fit")) {
            const auto &f = j.at("fit");
            check_keys(f,
                       {"method", "gap_tolerance", "barrier_growth", "max_newton_steps", "relative_tolerance",
                        "max_iterations"},
                       "fit.");
            if (f.contains("method")) {
                c.fit.method = parse_fit_method(f.at("method").get<std::string>());
            }
            c.fit.gap_tolerance = f.value("gap_tolerance", c.fit.gap_tolerance);
            c.fit.barrier_growth = f.value("barrier_growth", c.fit.barrier_growth);
            c.fit.max_newton_steps = f.value("max_newton_steps", c.fit.max_newton_steps);
            c.fit.relative_tolerance = f.value("relative_tolerance", c.fit.relative_tolerance);
            c.fit.max_iterations = f.value("max_iterations", c.fit.max_iterations);
        }
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const ConfigError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return c;
}

uint64_t config_hash(const ExperimentConfig &config) {
    nlohmann::json j = config;
    j.erase("output_path");
    j.erase("threads");
    std::string text = j.dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

UnitarySource resolved_unitary(const ExperimentConfig &config) {
    if (config.unitary != UnitarySource::automatic) {
        return config.unitary;
    }
    switch (config.experiment) {
        case ExperimentKind::qkt_states:
            return UnitarySource::qkt;
        case ExperimentKind::dkt_states:
            return UnitarySource::dkt;
        default:
            return UnitarySource::haar;
    }
}

ObservableKind resolved_observable(const ExperimentConfig &config) {
    if (config.observable != ObservableKind::automatic) {
        return config.observable;
    }
    return config.experiment == ExperimentKind::qkt_states ? ObservableKind::jx : ObservableKind::jz;
}

int resolved_record_length(const ExperimentConfig &config) {
    if (config.record_length > 0) {
        return config.record_length;
    }
    switch (config.experiment) {
        case ExperimentKind::pure_fidelity_vs_n:
        case ExperimentKind::span_check:
            return bound(config.d);
        case ExperimentKind::reconstruct:
            return config.measure == StateMeasure::fubini_study ? bound(config.d) : 10 * bound(config.d);
        default:
            return 10 * bound(config.d);
    }
}

namespace {

PrefixGrid resolved_grid(const ExperimentConfig &config) {
    if (config.prefix_grid != PrefixGrid::automatic) {
        return config.prefix_grid;
    }
    switch (config.experiment) {
        case ExperimentKind::pure_fidelity_vs_n:
        case ExperimentKind::qkt_states:
        case ExperimentKind::dkt_states:
            return config.d <= 5 ? PrefixGrid::every : PrefixGrid::log;
        default:
            return PrefixGrid::final_only;
    }
}

}  // namespace

std::string_view resolved_grid_name(const ExperimentConfig &config) {
    return to_string(resolved_grid(config));
}

std::vector<int> prefix_lengths(const ExperimentConfig &config) {
    const int length = resolved_record_length(config);
    std::set<int> grid;
    switch (resolved_grid(config)) {
        case PrefixGrid::every:
            for (int n = 1; n <= length; ++n) {
                grid.insert(n);
            }
            break;
        case PrefixGrid::log: {
            // Every step up to 10, then a geometric ratio of 1.2; the saturation
            // length d^2 - d + 1 is always included.
            for (int n = 1; n <= std::min(10, length); ++n) {
                grid.insert(n);
            }
            double x = 10.0;
            while (x < length) {
                x *= 1.2;
                grid.insert(std::min(length, static_cast<int>(std::ceil(x))));
            }
            if (bound(config.d) <= length) {
                grid.insert(bound(config.d));
            }
            break;
        }
        case PrefixGrid::automatic:
        case PrefixGrid::final_only:
            break;
    }
    grid.insert(length);
    return {grid.begin(), grid.end()};
}

ComplexMatrix load_matrix_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open matrix file '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
        const auto &re = j.at("real");
        const auto n = static_cast<Eigen::Index>(re.size());
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            if (static_cast<Eigen::Index>(re[r].size()) != n) {
                throw ConfigError("matrix file '" + path + "': 'real' is not square");
            }
            for (Eigen::Index c = 0; c < n; ++c) {
                m(r, c) = re[r][c].get<double>();
            }
        }
        if (j.contains("imag")) {
            const auto &im = j.at("imag");
            if (static_cast<Eigen::Index>(im.size()) != n) {
                throw ConfigError("matrix file '" + path + "': 'imag' shape differs from 'real'");
            }
            for (Eigen::Index r = 0; r < n; ++r) {
                if (static_cast<Eigen::Index>(im[r].size()) != n) {
                    throw ConfigError("matrix file '" + path + "': 'imag' shape differs from 'real'");
                }
                for (Eigen::Index c = 0; c < n; ++c) {
                    m(r, c) += Complex(0.0, im[r][c].get<double>());
                }
            }
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("matrix file '" + path + "': " + e.what());
    }
}

ComplexMatrix make_unitary(const ExperimentConfig &config, int unitary_index) {
    switch (resolved_unitary(config)) {
        case UnitarySource::haar: {
            SeededRng rng(unitary_seed(config, unitary_index), kUnitaryStream);
            return haar_unitary(config.d, rng);
        }
        case UnitarySource::qkt: {
            KickedTopParams p = config.qkt;
            p.j = config.spin();
            return qkt_floquet(p);
        }
        case UnitarySource::dkt: {
            DoubleKickedTopParams p = config.dkt;
            p.j = config.spin();
            return dkt_floquet(p);
        }
        case UnitarySource::file: {
            ComplexMatrix u = load_matrix_json(config.unitary_file);
            if (u.rows() != config.d) {
                throw ConfigError("unitary file is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                                  " but d = " + std::to_string(config.d));
            }
            if (!is_unitary(u, 1e-12)) {
                throw ConfigError("unitary file does not hold a unitary matrix (tolerance 1e-12)");
            }
            return u;
        }
        case UnitarySource::automatic:
            break;
    }
    throw ConfigError("unresolved unitary source");
}

HermitianOperator make_observable(const ExperimentConfig &config) {
    switch (resolved_observable(config)) {
        case ObservableKind::jz:
            return spin_matrices(config.spin()).jz;
        case ObservableKind::jx:
            return spin_matrices(config.spin()).jx;
        case ObservableKind::file: {
            ComplexMatrix o = load_matrix_json(config.observable_file);
            if (o.rows() != config.d) {
                throw ConfigError("observable file dimension does not match d = " + std::to_string(config.d));
            }
            try {
                return HermitianOperator(std::move(o));
            } catch (const std::invalid_argument &e) {
                throw ConfigError(std::string("observable file: ") + e.what());
            }
        }
        case ObservableKind::automatic:
            break;
    }
    throw ConfigError("unresolved observable");
}

uint64_t unitary_seed(const ExperimentConfig &config, int unitary_index) {
    return config.base_seed + static_cast<uint64_t>(unitary_index);
}

uint64_t state_seed(const ExperimentConfig &config, int trial_index) {
    return config.base_seed + static_cast<uint64_t>(trial_index);
}

ExperimentResult run_pure_experiment(const ExperimentConfig &config) {
    require_experiment(config, ExperimentKind::pure_fidelity_vs_n, "run_pure_experiment");
    std::vector<int> unitaries;
    std::vector<Trial> trials;
    const std::string family(to_string(config.measure));
    for (int u = 0; u < config.n_unitaries; ++u) {
        unitaries.push_back(u);
        for (int s = 0; s < config.n_states; ++s) {
            trials.push_back({u, s, u * config.n_states + s, family});
        }
    }
    return run_trials(config, unitaries, trials);
}

ExperimentResult run_mixed_experiment(const ExperimentConfig &config) {
    require_experiment(config, ExperimentKind::mixed_fidelity_vs_d, "run_mixed_experiment");
    ExperimentConfig adjusted = config;
    if (adjusted.measure == StateMeasure::fubini_study) {
        adjusted.measure = StateMeasure::bures;
    }
    std::vector<int> unitaries;
    std::vector<Trial> trials;
    const std::string family(to_string(adjusted.measure));
    for (int u = 0; u < adjusted.n_unitaries; ++u) {
        unitaries.push_back(u);
        for (int s = 0; s < adjusted.n_states; ++s) {
            trials.push_back({u, s, u * adjusted.n_states + s, family});
        }
    }
    return run_trials(adjusted, unitaries, trials);
}

ExperimentResult run_qkt_experiment(const ExperimentConfig &config) {
    require_experiment(config, ExperimentKind::qkt_states, "run_qkt_experiment");
    return run_kicked_top(config);
}

ExperimentResult run_dkt_experiment(const ExperimentConfig &config) {
    require_experiment(config, ExperimentKind::dkt_states, "run_dkt_experiment");
    return run_kicked_top(config);
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
    switch (config.experiment) {
        case ExperimentKind::pure_fidelity_vs_n:
            return run_pure_experiment(config);
        case ExperimentKind::mixed_fidelity_vs_d:
            return run_mixed_experiment(config);
        case ExperimentKind::qkt_states:
            return run_qkt_experiment(config);
        case ExperimentKind::dkt_states:
            return run_dkt_experiment(config);
        default:
            throw ConfigError("run_experiment: '" + std::string(to_string(config.experiment)) +
                              "' is not a table-producing experiment");
    }
}

void write_rows_csv(std::ostream &out, const std::vector<ExperimentRow> &rows) {
    out << "experiment,family,d,n,unitary_index,state_index,fidelity,covariance_rank,cost,iterations,converged,"
           "unitary_seed,state_seed,config_hash\n";
    char hash[17];
    for (const auto &r : rows) {
        std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(r.config_hash));
        out << r.experiment << ',' << r.family << ',' << r.d << ',' << r.n << ',' << r.unitary_index << ','
            << r.state_index << ',' << format_double(r.fidelity) << ',' << r.covariance_rank << ','
            << format_double(r.cost) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
            << r.unitary_seed << ',' << r.state_seed << ',' << hash << '\n';
    }
}

std::vector<std::string> families(const std::vector<ExperimentRow> &rows) {
    std::vector<std::string> out;
    for (const auto &r : rows) {
        if (std::find(out.begin(), out.end(), r.family) == out.end()) {
            out.push_back(r.family);
        }
    }
    return out;
}

std::map<int, double> per_unitary_mean_fidelity(const std::vector<ExperimentRow> &rows, int n,
                                                std::string_view family) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto &r : rows) {
        if (r.n != n || (!family.empty() && r.family != family) || std::isnan(r.fidelity)) {
            continue;
        }
        auto &slot = acc[r.unitary_index];
        slot.first += r.fidelity;
        slot.second += 1;
    }
    std::map<int, double> out;
    for (const auto &[u, sum_count] : acc) {
        out[u] = sum_count.first / sum_count.second;
    }
    return out;
}

double mean_fidelity(const std::vector<ExperimentRow> &rows, int n, std::string_view family) {
    auto per_unitary = per_unitary_mean_fidelity(rows, n, family);
    if (per_unitary.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double sum = 0.0;
    for (const auto &[u, mean] : per_unitary) {
        sum += mean;
    }
    return sum / static_cast<double>(per_unitary.size());
}

std::map<int, double> mean_fidelity_curve(const std::vector<ExperimentRow> &rows, std::string_view family) {
    std::set<int> ns;
    for (const auto &r : rows) {
        ns.insert(r.n);
    }
    std::map<int, double> out;
    for (int n : ns) {
        double m = mean_fidelity(rows, n, family);
        if (!std::isnan(m)) {
            out[n] = m;
        }
    }
    return out;
}

nlohmann::json experiment_metadata(const ExperimentResult &result, double wall_time_seconds) {
    const ExperimentConfig &c = result.config;
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash(c)));

    std::vector<uint64_t> unitary_seeds;
    std::set<int> unitary_indices;
    for (const auto &r : result.rows) {
        unitary_indices.insert(r.unitary_index);
    }
    for (int u : unitary_indices) {
        unitary_seeds.push_back(unitary_seed(c, u));
    }

    nlohmann::json summary = nlohmann::json::object();
    const int final_n = result.prefix_lengths.empty() ? 0 : result.prefix_lengths.back();
    for (const auto &family : families(result.rows)) {
        auto per_unitary = per_unitary_mean_fidelity(result.rows, final_n, family);
        nlohmann::json per = nlohmann::json::array();
        for (const auto &[u, m] : per_unitary) {
            per.push_back(m);
        }
        int rank = 0;
        for (const auto &r : result.rows) {
            if (r.family == family && r.n == final_n) {
                rank = r.covariance_rank;
                break;
            }
        }
        summary[family] = {{"final_n", final_n},
                           {"mean_fidelity", mean_fidelity(result.rows, final_n, family)},
                           {"per_unitary_mean_fidelity", per},
                           {"covariance_rank", rank}};
    }
    int failed = 0;
    int not_converged = 0;
    for (const auto &r : result.rows) {
        failed += std::isnan(r.fidelity) ? 1 : 0;
        not_converged += r.converged ? 0 : 1;
    }

    return nlohmann::json{
        {"library", "orbit_tomo"},
        {"version", kLibraryVersion},
        {"config", c},
        {"config_hash", hash},
        {"seeds",
         {{"base_seed", c.base_seed},
          {"unitary_seeds", unitary_seeds},
          {"state_seed_rule", "base_seed + trial_index"},
          {"unitary_seed_rule", "base_seed + unitary_index"}}},
        {"resolved",
         {{"unitary", to_string(resolved_unitary(c))},
          {"observable", to_string(resolved_observable(c))},
          {"record_length", resolved_record_length(c)}}},
        {"prefix_grid", resolved_grid_name(c)},
        {"prefix_lengths", result.prefix_lengths},
        {"rows", result.rows.size()},
        {"failed_rows", failed},
        {"non_converged_rows", not_converged},
        {"summary", summary},
        {"wall_time_seconds", wall_time_seconds},
    };
}

nlohmann::json matrix_to_json(const ComplexMatrix &m) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> rr;
        std::vector<double> ii;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ii.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return {{"real", re}, {"imag", im}};
}

void to_json(nlohmann::json &j, const FitResult &fit) {
    j = nlohmann::json{
        {"cost", fit.cost},
        {"iterations", fit.iterations},
        {"converged", fit.converged},
        {"used_baseline", fit.used_baseline},
        {"rho_bar", matrix_to_json(fit.rho_bar.matrix())},
    };
}

namespace {

MeasurementRecord load_record_csv(const std::string &path, double ensemble_size) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open record file '" + path + "'");
    }
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "n,value") {
            continue;
        }
        std::string field = line.substr(line.find(',') == std::string::npos ? 0 : line.find(',') + 1);
        try {
            size_t used = 0;
            values.push_back(std::stod(field, &used));
        } catch (const std::exception &) {
            throw ConfigError("record file '" + path + "', line " + std::to_string(line_no) + ": not a number");
        }
    }
    MeasurementRecord record;
    record.values = Eigen::Map<RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    record.ensemble_size = ensemble_size;
    return record;
}

}  // namespace

ReconstructionReport run_reconstruction(const ExperimentConfig &config) {
    validate(config);
    const OperatorBasis basis(config.d);
    HermitianOperator observable = make_observable(config);
    ComplexMatrix u0 = make_unitary(config, 0);

    std::optional<DensityMatrix> truth;
    MeasurementRecord record;
    int length = resolved_record_length(config);
    if (!config.record_file.empty()) {
        record = load_record_csv(config.record_file, config.ensemble_size);
        length = record.length();
        if (length < 1) {
            throw ConfigError("record file '" + config.record_file + "' holds no values");
        }
    }
    OperatorOrbit orbit = build_orbit(u0, observable, length - 1);
    if (config.record_file.empty()) {
        const uint64_t seed = state_seed(config, 0);
        SeededRng state_rng(seed, kStateStream);
        truth = sample_state(config, config.measure, state_rng);
        SeededRng noise_rng(seed, kNoiseStream);
        record = simulate_record(*truth, orbit, config.ensemble_size, config.sigma, noise_rng);
    }
    DesignMatrix design = design_matrix(orbit, basis);
    MlEstimate ml = ml_estimate(design, record, config.ensemble_size);
    const RealMatrix c = covariance(design);
    FitResult fit = positivity_fit(ml, c, basis, config.fit);
    if (uses_purity_prior(config)) {
        fit = apply_purity_prior(fit, ml, c, basis, unitary_eigen(u0).vectors, observable);
    }
    std::optional<double> f;
    if (truth) {
        f = fidelity(fit.rho_bar, *truth);
    }
    return ReconstructionReport{fit, ml.covariance_rank, length, f, truth, record};
}

}  // namespace orbit_tomo
