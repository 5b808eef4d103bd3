#include "funflow_cli/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "funflow/bandwidth.hpp"
#include "funflow/constants.hpp"
#include "funflow/curves.hpp"
#include "funflow/errors.hpp"
#include "funflow/estimator.hpp"
#include "funflow/experiments.hpp"
#include "funflow/seminorms.hpp"
#include "funflow/snapshot.hpp"

namespace funflow::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
    // data
    std::string curves, responses, query, snapshot, out, plot;
    // estimator
    double ell = 0.0;
    std::string kernel = "quadratic";
    std::string seminorm = "pca:3";
    bool center = false;
    double C = 1.0;
    double nu = 0.1;
    bool cv = false;
    std::optional<double> alpha;
    std::optional<double> scale;
    bool running = false;
    std::string policy = "frozen";
    std::uint64_t seed = 1;
    // simulation and studies
    std::size_t n = 100;
    std::size_t p = 100;
    double noise = 0.1;
    std::size_t queries = 0;
    std::string study = "table1";
    std::string design = "brownian";
    std::size_t reps = 500;
    std::vector<std::size_t> ns;
    // constants
    std::optional<double> kappa;
    std::optional<double> delta;
    // bench
    std::size_t n0 = 100;
    std::vector<std::size_t> N{1, 50, 100, 200};
    std::size_t repeats = 3;
};

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Kernel kernel_of(const Options& o) { return Kernel::parse(o.kernel); }

SemiNormSpec seminorm_of(const Options& o) {
    auto spec = SemiNormSpec::parse(o.seminorm);
    spec.center = o.center;
    return spec;
}

CdfPolicy policy_of(const Options& o) {
    if (o.policy == "frozen") return CdfPolicy::frozen;
    if (o.policy == "refresh") return CdfPolicy::refresh;
    fail(ErrorCode::invalid_argument, "unknown CDF policy '" + o.policy + "' (frozen|refresh)");
}

BandwidthPlan plan_of(const Options& o, double C, double nu) {
    if (o.running) {
        require(!o.scale, ErrorCode::invalid_argument, "--scale cannot be combined with --running");
        return BandwidthPlan::running(C, nu);
    }
    return BandwidthPlan::frozen(C, nu, o.scale);
}

/// Resolved settings echoed in every output.
std::vector<std::pair<std::string, std::string>> resolved(const std::string& command, const Options& o) {
    std::vector<std::pair<std::string, std::string>> kv{{"command", command}};
    auto add = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    if (command == "simulate") {
        add("n", std::to_string(o.n));
        add("p", std::to_string(o.p));
        add("noise", fmt(o.noise));
        add("queries", std::to_string(o.queries));
        add("seed", std::to_string(o.seed));
        add("out", o.out.empty() ? "." : o.out);
        return kv;
    }
    if (command == "constants") {
        add("kernel", o.kernel);
        add("kappa", o.kappa ? fmt(*o.kappa) : "");
        add("delta", o.delta ? fmt(*o.delta) : "");
        add("l", fmt(o.ell));
        return kv;
    }
    if (command == "bench") {
        add("n0", std::to_string(o.n0));
        std::string list;
        for (auto v : o.N) list += (list.empty() ? "" : ",") + std::to_string(v);
        add("N", list);
        add("repeats", std::to_string(o.repeats));
        add("p", std::to_string(o.p));
        add("noise", fmt(o.noise));
    }
    if (command == "experiment") {
        add("study", o.study);
        add("design", o.design);
        add("n", std::to_string(o.n));
        add("p", std::to_string(o.p));
        add("noise", fmt(o.noise));
        add("reps", std::to_string(o.reps));
    }
    if (command == "fit" || command == "update" || command == "cv") {
        add("curves", o.curves);
        add("responses", o.responses);
    }
    if (command == "fit") add("query", o.query);
    if (command == "fit" || command == "update") add("snapshot", o.snapshot);
    if (command != "update") {
        add("l", fmt(o.ell));
        add("kernel", o.kernel);
        add("seminorm", o.seminorm);
        add("center", o.center ? "true" : "false");
    }
    if (command == "fit" || command == "experiment" || command == "bench") {
        add("C", o.cv ? "cv" : fmt(o.C));
        add("nu", o.cv ? "cv" : fmt(o.nu));
    }
    if (command == "fit") {
        add("scale", o.running ? "running" : (o.scale ? fmt(*o.scale) : "max"));
        add("policy", o.policy);
    }
    if (command == "fit" || command == "update" || command == "experiment")
        add("alpha", o.alpha ? fmt(*o.alpha) : "");
    add("seed", std::to_string(o.seed));
    return kv;
}

void write_header(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [k, v] : kv) out << "# " << k << '=' << v << '\n';
}

json config_json(const std::vector<std::pair<std::string, std::string>>& kv) {
    json j = json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

json prediction_json(const PredictionResult& r) {
    json j;
    j["estimate"] = r.estimate;
    if (r.band) {
        j["ci_low"] = r.band->low;
        j["ci_high"] = r.band->high;
        j["half_width"] = r.band->half_width;
        j["zero_variance"] = r.band->zero_variance;
    }
    const auto& d = r.diagnostics;
    json diag;
    diag["n"] = d.n;
    diag["last_bandwidth"] = d.last_bandwidth;
    diag["cdf_at_last_bandwidth"] = d.cdf_at_last_bandwidth;
    diag["effective_sample"] = d.effective_sample;
    if (d.constants) {
        diag["m1"] = d.constants->m1;
        diag["m2"] = d.constants->m2;
        diag["beta1"] = d.constants->beta1;
        diag["sigma2"] = d.constants->sigma2;
    }
    j["diagnostics"] = diag;
    return j;
}

/// Writes to --out when given, otherwise to `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            require(file_.good(), ErrorCode::io, "cannot write " + path);
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

void cmd_simulate(const Options& o, std::ostream& out) {
    require(o.n >= 1, ErrorCode::invalid_argument, "--n must be >= 1");
    require(o.p >= 2, ErrorCode::invalid_argument, "--p must be >= 2");
    require(o.noise >= 0.0, ErrorCode::invalid_argument, "--noise must be >= 0");
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorCode::io, "cannot create directory " + dir.string());
    auto rng = make_stream(o.seed);
    const auto data = simulate_regression_sample(o.n, o.p, o.noise, rng);
    write_curves_csv(dir / "curves.csv", data.curves());
    write_responses_csv(dir / "responses.csv", data.responses());
    write_header(out, resolved("simulate", o));
    out << "wrote " << (dir / "curves.csv").string() << '\n' << "wrote " << (dir / "responses.csv").string() << '\n';
    if (o.queries > 0) {
        const auto q = simulate_brownian(o.queries, o.p, rng);
        write_curves_csv(dir / "query.csv", q);
        out << "wrote " << (dir / "query.csv").string() << '\n';
    }
}

void cmd_fit(const Options& o, std::ostream& out) {
    const auto data = load_dataset(o.curves, fs::path(o.responses));
    const auto queries = read_curves_csv(o.query);
    require(!queries.empty(), ErrorCode::empty_dataset, "query file has no curves");
    require(o.snapshot.empty() || queries.size() == 1, ErrorCode::invalid_argument,
            "--snapshot needs exactly one query curve");
    const auto kernel = kernel_of(o);
    auto seminorm = std::make_shared<const FittedSemiNorm>(fit_seminorm(seminorm_of(o), data));
    double C = o.C, nu = o.nu;
    auto config = config_json(resolved("fit", o));
    if (o.cv) {
        const auto report = cv_select(pairwise_distances(*seminorm, data), data.responses(), CVGrid{}, o.ell, kernel);
        C = report.C;
        nu = report.nu;
        config["C"] = fmt(C);
        config["nu"] = fmt(nu);
    }
    const auto plan = plan_of(o, C, nu);
    StateOptions options;
    options.policy = policy_of(o);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        auto state = init_state(queries[q], data, o.ell, kernel, plan, seminorm, options);
        auto j = prediction_json(make_prediction(state.accumulator(), o.alpha));
        j["query"] = q;
        j["config"] = config;
        out << j.dump() << '\n';
        if (!o.snapshot.empty()) save_state(o.snapshot, state);
    }
}

void cmd_update(const Options& o, std::ostream& out) {
    auto state = load_state(o.snapshot);
    const auto data = load_dataset(o.curves, fs::path(o.responses));
    for (std::size_t i = 0; i < data.size(); ++i) state.update(data.curve(i), data.responses()[i]);
    save_state(o.out.empty() ? fs::path(o.snapshot) : fs::path(o.out), state);
    auto j = prediction_json(make_prediction(state.accumulator(), o.alpha));
    j["config"] = config_json(resolved("update", o));
    out << j.dump() << '\n';
}

void cmd_cv(const Options& o, std::ostream& out) {
    const auto data = load_dataset(o.curves, fs::path(o.responses));
    const auto report = cv_select(data, CVGrid{}, o.ell, kernel_of(o), seminorm_of(o));
    Sink sink(o.out, out);
    write_header(sink.stream(), resolved("cv", o));
    report.write_csv(sink.stream());
    sink.stream() << "# selected," << fmt(report.C) << ',' << fmt(report.nu) << '\n';
}

void cmd_constants(const Options& o, std::ostream& out) {
    require(o.kappa.has_value(), ErrorCode::invalid_argument, "--kappa is required");
    const auto c = asymptotic_constants(kernel_of(o), *o.kappa);
    Sink sink(o.out, out);
    auto& s = sink.stream();
    write_header(s, resolved("constants", o));
    s << "name,value\n";
    s << "kappa," << fmt(c.kappa) << "\nm0," << fmt(c.m0) << "\nm1," << fmt(c.m1) << "\nm2," << fmt(c.m2) << '\n';
    if (o.delta) {
        s << "beta1," << fmt(c.beta(1.0, *o.delta)) << '\n';
        s << "alpha_l," << fmt(c.alpha(o.ell, *o.delta)) << '\n';
        s << "variance_factor," << fmt(c.variance_factor(o.ell, *o.delta)) << '\n';
        s << "bias_factor," << fmt(c.bias_factor(o.ell, *o.delta)) << '\n';
    }
}

ExperimentConfig experiment_config(const Options& o) {
    ExperimentConfig cfg;
    cfg.design.n = o.n;
    cfg.design.p = o.p;
    cfg.design.noise_sd = o.noise;
    if (o.design == "scalar_uniform") cfg.design.kind = DesignKind::scalar_uniform;
    else require(o.design == "brownian", ErrorCode::invalid_argument, "unknown design '" + o.design + "'");
    cfg.replications = o.reps;
    cfg.seed = o.seed;
    cfg.estimator.ell = o.ell;
    cfg.estimator.kernel = kernel_of(o);
    cfg.estimator.seminorm = seminorm_of(o);
    cfg.estimator.C = o.C;
    cfg.estimator.nu = o.nu;
    cfg.estimator.use_cv = o.cv;
    return cfg;
}

void cmd_experiment(const Options& o, std::ostream& out) {
    const auto cfg = experiment_config(o);
    require(cfg.replications >= 1, ErrorCode::invalid_argument, "--reps must be >= 1");
    Sink sink(o.out, out);
    auto& s = sink.stream();
    write_header(s, resolved("experiment", o));
    std::vector<double> px, py;
    if (o.study == "table1" || o.study == "table2" || o.study == "table3") {
        std::vector<StudyCell> cells;
        if (o.study == "table1") {
            const auto ns = o.ns.empty() ? std::vector<std::size_t>{100, 200, 500} : o.ns;
            for (auto n : ns) cells.push_back({"n=" + std::to_string(n), n, cfg.estimator});
        } else if (o.study == "table2") {
            for (const char* spec : {"pca:3", "pls:5", "fou:8", "deriv:8"}) {
                auto st = cfg.estimator;
                st.seminorm = SemiNormSpec::parse(spec);
                st.seminorm.center = o.center;
                cells.push_back({spec, std::nullopt, st});
            }
        } else {
            for (double ell : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                auto st = cfg.estimator;
                st.ell = ell;
                cells.push_back({"l=" + fmt(ell), std::nullopt, st});
            }
        }
        const auto report = mspe_study(cfg, cells);
        report.write_csv(s);
        for (std::size_t k = 0; k < report.cells.size(); ++k) {
            px.push_back(o.study == "table3" ? 0.25 * static_cast<double>(k)
                                             : static_cast<double>(o.study == "table1" ? report.cells[k].n : k));
            py.push_back(report.cells[k].mspe.mean);
        }
    } else if (o.study == "coverage") {
        const auto report = coverage_study(cfg, o.alpha.value_or(0.05));
        report.write_csv(s);
        for (std::size_t k = 0; k < report.pivots.size(); ++k) {
            px.push_back(static_cast<double>(k));
            py.push_back(report.pivots[k]);
        }
    } else if (o.study == "rate") {
        const auto ns = o.ns.empty() ? std::vector<std::size_t>{100, 200, 500, 1000} : o.ns;
        const auto report = rate_check(ns, cfg);
        report.write_csv(s);
        for (const auto& r : report.rows) {
            px.push_back(static_cast<double>(r.n));
            py.push_back(r.mse);
        }
    } else if (o.study == "cvselect") {
        const auto report = cv_selection_study(cfg);
        report.write_csv(s);
    } else {
        fail(ErrorCode::invalid_argument, "unknown study '" + o.study + "' (table1|table2|table3|coverage|rate|cvselect)");
    }
    if (!o.plot.empty()) {
        std::ofstream plot(o.plot);
        require(plot.good(), ErrorCode::io, "cannot write " + o.plot);
        plot << "series,x,y\n";
        write_plot_series(plot, o.study, px, py);
    }
}

void cmd_bench(const Options& o, std::ostream& out) {
    auto cfg = experiment_config(o);
    const auto report = timing_benchmark(o.n0, o.N, cfg, o.repeats);
    Sink sink(o.out, out);
    auto& s = sink.stream();
    write_header(s, resolved("bench", o));
    report.write_csv(s);
    const auto& last = report.rows.back();
    s << "# ratio_batch_over_recursive,N=" << last.N << ',' << fmt(last.batch_seconds / last.recursive_seconds) << '\n';
    if (report.rows.size() >= 2) {
        s << "# recursive_exponent," << fmt(report.recursive_exponent) << '\n';
        s << "# batch_exponent," << fmt(report.batch_exponent) << '\n';
    }
}

void require_flag(const std::string& value, const std::string& flag) {
    if (value.empty()) throw CLI::RequiredError(flag);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"funflow: recursive kernel regression on functional data"};
    app.name("funflow");
    app.set_config("--config", "", "key=value configuration file; flags override file keys");
    app.allow_config_extras(false);
    app.require_subcommand(1);

    auto* data = app.add_option_group("data");
    data->add_option("--curves", o.curves, "training curves CSV");
    data->add_option("--responses", o.responses, "training responses CSV");
    data->add_option("--query", o.query, "query curves CSV");
    data->add_option("--snapshot", o.snapshot, "query-state snapshot file");
    data->add_option("--out", o.out, "output file (or directory for simulate)");
    data->add_option("--plot", o.plot, "plot-data CSV (experiment)");

    auto* est = app.add_option_group("estimator");
    est->add_option("--l", o.ell, "weight exponent l in [0,1]");
    est->add_option("--kernel", o.kernel, "quadratic|uniform");
    est->add_option("--seminorm", o.seminorm, "pca:q|fou:b|deriv:k|pls:K");
    est->add_flag("--center", o.center, "mean-center curves for PCA/PLS");
    est->add_option("--C", o.C, "bandwidth constant C");
    est->add_option("--nu", o.nu, "bandwidth exponent nu");
    est->add_flag("--cv", o.cv, "select (C, nu) by cross-validation");
    est->add_option("--alpha", o.alpha, "confidence level alpha for the band");
    est->add_option("--scale", o.scale, "frozen bandwidth scale S (default: max distance)");
    est->add_flag("--running", o.running, "use the running-max bandwidth scale");
    est->add_option("--policy", o.policy, "CDF policy: frozen|refresh");
    est->add_option("--seed", o.seed, "random seed");

    auto* sim = app.add_option_group("simulation");
    sim->add_option("--n", o.n, "sample size");
    sim->add_option("--p", o.p, "grid points per curve");
    sim->add_option("--noise", o.noise, "noise standard deviation");
    sim->add_option("--queries", o.queries, "extra query curves to simulate");
    sim->add_option("--study", o.study, "table1|table2|table3|coverage|rate|cvselect");
    sim->add_option("--design", o.design, "brownian|scalar_uniform");
    sim->add_option("--reps", o.reps, "Monte Carlo replications");
    sim->add_option("--ns", o.ns, "sample sizes (table1, rate)")->delimiter(',');
    sim->add_option("--kappa", o.kappa, "small-ball exponent");
    sim->add_option("--delta", o.delta, "bandwidth decay exponent for beta/alpha limits");
    sim->add_option("--n0", o.n0, "initial sample size (bench)");
    sim->add_option("--N", o.N, "arrival counts (bench)")->delimiter(',');
    sim->add_option("--repeats", o.repeats, "timing repeats (bench)");

    auto sub = [&](const std::string& name, const std::string& help) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        return s;
    };
    auto* simulate = sub("simulate", "simulate Brownian curves and responses");
    auto* fit = sub("fit", "fit and predict at query curves (JSON lines)");
    fit->alias("fit-predict");
    auto* update = sub("update", "append observations to a snapshot and predict");
    auto* cv = sub("cv", "leave-one-out selection of (C, nu)");
    auto* constants = sub("constants", "asymptotic kernel constants");
    auto* experiment = sub("experiment", "Monte Carlo studies");
    auto* bench = sub("bench", "recursive vs batch timing");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
        if (fit->parsed()) {
            require_flag(o.curves, "--curves");
            require_flag(o.responses, "--responses");
            require_flag(o.query, "--query");
        } else if (update->parsed()) {
            require_flag(o.snapshot, "--snapshot");
            require_flag(o.curves, "--curves");
            require_flag(o.responses, "--responses");
        } else if (cv->parsed()) {
            require_flag(o.curves, "--curves");
            require_flag(o.responses, "--responses");
        }
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ConfigError& e) {
        err << "error[" << error_code_name(ErrorCode::config) << "]: " << e.what() << '\n';
        return error_exit_status(ErrorCode::config);
    } catch (const CLI::FileError& e) {
        err << "error[" << error_code_name(ErrorCode::io) << "]: " << e.what() << '\n';
        return error_exit_status(ErrorCode::io);
    } catch (const CLI::ParseError& e) {
        err << "error[usage]: " << e.what() << '\n';
        return kUsageExit;
    }

    try {
        if (simulate->parsed()) cmd_simulate(o, out);
        else if (fit->parsed()) cmd_fit(o, out);
        else if (update->parsed()) cmd_update(o, out);
        else if (cv->parsed()) cmd_cv(o, out);
        else if (constants->parsed()) cmd_constants(o, out);
        else if (experiment->parsed()) cmd_experiment(o, out);
        else if (bench->parsed()) cmd_bench(o, out);
        out.flush();
        return 0;
    } catch (const Error& e) {
        err << "error[" << error_code_name(e.code()) << "]: " << e.what() << '\n';
        return error_exit_status(e.code());
    } catch (const std::exception& e) {
        err << "error[unexpected]: " << e.what() << '\n';
        return kUnexpectedExit;
    }
}

}  // namespace funflow::cli
