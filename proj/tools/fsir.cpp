// Command-line front end: simulate, fit, cv, predict, diagnose.

#include "fsir/error.hpp"
#include "fsir/io.hpp"
#include "fsir/link.hpp"
#include "fsir/simgen.hpp"
#include "fsir/sir.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fsir;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

// Effective command line, printed so a run can be replayed exactly.
class ConfigEcho {
public:
    explicit ConfigEcho(std::string command) : parts_{"fsir", std::move(command)} {}

    void add(const std::string& flag, const std::string& value) {
        parts_.push_back(flag);
        parts_.push_back(quote(value));
    }
    void add(const std::string& flag, double value) { add(flag, format_real(value)); }
    void add(const std::string& flag, long long value) { add(flag, std::to_string(value)); }
    void add(const std::string& flag, std::uint64_t value) { add(flag, std::to_string(value)); }
    void flag(const std::string& flag) { parts_.push_back(flag); }

    std::string str() const {
        std::string s;
        for (const auto& p : parts_) s += (s.empty() ? "" : " ") + p;
        return s;
    }

private:
    static std::string quote(const std::string& v) {
        const bool plain = !v.empty() && std::all_of(v.begin(), v.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("._-/:,+=").find(c) != std::string_view::npos;
        });
        if (plain) return v;
        std::string q = "'";
        for (char c : v) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
        return q + "'";
    }

    std::vector<std::string> parts_;
};

struct Common {
    std::string data;
    std::string out;
    Index slices = 10;
    std::string transform = "none";
    std::string rows;
    double rel_tol = 1e-10;
    double abs_floor = 0.0;
    std::uint64_t seed = 0;
    bool echo = false;
};

void add_data_options(CLI::App& cmd, Common& c) {
    cmd.add_option("--data", c.data, "Dataset CSV")->required();
    cmd.add_option("--transform", c.transform, "Response transform: none|logit10")->capture_default_str();
    cmd.add_option("--rows", c.rows, "Use only rows a..b (1-based, inclusive)");
}

void add_fit_options(CLI::App& cmd, Common& c) {
    cmd.add_option("--slices", c.slices, "Number of slices S")->capture_default_str();
    cmd.add_option("--rel-tol", c.rel_tol, "Relative eigenvalue cutoff")->capture_default_str();
    cmd.add_option("--abs-floor", c.abs_floor, "Absolute eigenvalue cutoff")->capture_default_str();
}

void echo_common(ConfigEcho& e, const Common& c, bool with_fit_options) {
    e.add("--data", c.data);
    e.add("--transform", c.transform);
    if (!c.rows.empty()) e.add("--rows", c.rows);
    if (with_fit_options) {
        e.add("--slices", static_cast<long long>(c.slices));
        e.add("--rel-tol", c.rel_tol);
        e.add("--abs-floor", c.abs_floor);
    }
}

Dataset select_rows(const Dataset& d, const std::string& spec) {
    if (spec.empty()) return d;
    const auto dots = spec.find("..");
    Index a = 0;
    Index b = 0;
    try {
        std::size_t used = 0;
        if (dots == std::string::npos) throw std::invalid_argument(spec);
        a = std::stoll(spec.substr(0, dots), &used);
        if (used != dots) throw std::invalid_argument(spec);
        const std::string tail = spec.substr(dots + 2);
        b = std::stoll(tail, &used);
        if (used != tail.size()) throw std::invalid_argument(spec);
    } catch (const std::logic_error&) {
        throw ArgumentError("invalid --rows '" + spec + "' (expected a..b)");
    }
    if (a < 1 || b < a) throw ArgumentError("invalid --rows '" + spec + "'");
    if (b > d.size()) {
        throw DataError("--rows " + spec + " exceeds the " + std::to_string(d.size()) + " rows in the data");
    }
    std::vector<Index> rows(static_cast<std::size_t>(b - a + 1));
    std::iota(rows.begin(), rows.end(), a - 1);
    return d.subset(rows);
}

Dataset load(const Common& c) {
    return select_rows(load_dataset(c.data, parse_transform(c.transform)), c.rows);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

fs::path sidecar_path(const fs::path& out) {
    fs::path p = out;
    p.replace_extension();
    p += ".xi.csv";
    return p;
}

std::vector<double> parse_reals(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::logic_error&) {
            throw ArgumentError("cannot parse '" + cell + "' as a real");
        }
    }
    return out;
}

Link parse_link(const std::string& s) {
    if (s == "identity") return Link::identity;
    if (s == "exp") return Link::exp;
    if (s == "arctan") return Link::arctan;
    throw ArgumentError("unknown link '" + s + "' (expected identity|exp|arctan)");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    std::string out;
    Index n = 100;
    Index grid = 100;
    double noise = 0.3;
    std::string link = "identity";
    std::string beta;
    std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
    if (a.n < 2) throw ArgumentError("--n must be >= 2");
    if (a.grid < 1) throw ArgumentError("--grid must be >= 1");
    ConfigEcho echo("simulate");
    echo.add("--model", a.model);
    echo.add("--out", a.out);
    echo.add("--n", static_cast<long long>(a.n));
    SimOutput sim = [&]() {
        if (a.model == "example1") {
            echo.add("--grid", static_cast<long long>(a.grid));
            return gen_example1(a.n, a.grid, a.noise, a.seed);
        }
        if (a.model == "example2") return gen_example2(a.n, a.seed, a.noise);
        if (a.model == "finite-dim") {
            echo.add("--grid", static_cast<long long>(a.grid));
            Vector beta = Vector::Zero(a.grid);
            if (a.beta.empty()) {
                beta(0) = 1.0;
            } else {
                const std::vector<double> b = parse_reals(a.beta);
                beta = Eigen::Map<const Vector>(b.data(), static_cast<Index>(b.size()));
                echo.add("--beta", a.beta);
            }
            echo.add("--link", a.link);
            return gen_finite_dim(a.n, a.grid, beta, parse_link(a.link), a.noise, a.seed);
        }
        if (a.model == "null") {
            echo.add("--grid", static_cast<long long>(a.grid));
            return gen_null_model(a.n, a.grid, a.noise, a.seed);
        }
        throw ArgumentError("unknown model '" + a.model + "' (expected example1|example2|finite-dim|null)");
    }();
    echo.add("--noise", a.noise);
    echo.add("--seed", a.seed);
    print_warnings(sim.warnings);

    save_dataset(a.out, sim.dataset);
    const fs::path side = sidecar_path(a.out);
    write_atomically(side, [&](std::ostream& o) {
        std::vector<std::string> header{"i"};
        for (Index j = 0; j < sim.xi_true.cols(); ++j) header.push_back("xi_" + std::to_string(j + 1));
        Matrix table(sim.xi_true.rows(), sim.xi_true.cols() + 1);
        for (Index i = 0; i < table.rows(); ++i) table(i, 0) = static_cast<double>(i + 1);
        table.rightCols(sim.xi_true.cols()) = sim.xi_true;
        write_table(o, header, table);
    });
    std::cout << "seed: " << a.seed << '\n';
    std::cout << "config: " << echo.str() << '\n';
    std::cout << "wrote " << a.out << " (n = " << sim.dataset.size() << ", J = " << sim.dataset.grid_size()
              << ") and " << side.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    Common c;
    Index rank = 0;
    std::optional<Index> dirs;
};

int run_fit(const FitArgs& a) {
    RunConfig cfg;
    cfg.slices = a.c.slices;
    cfg.rank = a.rank;
    cfg.directions = a.dirs;
    cfg.policy = RankPolicy{a.c.rel_tol, a.c.abs_floor};
    cfg.transform = parse_transform(a.c.transform);
    cfg.seed = a.c.seed;
    cfg.validate();

    ConfigEcho echo("fit");
    echo_common(echo, a.c, true);
    echo.add("--out", a.c.out);
    echo.add("--rank", static_cast<long long>(a.rank));
    if (a.dirs) echo.add("--dirs", static_cast<long long>(*a.dirs));
    echo.add("--seed", a.c.seed);
    if (a.c.echo) std::cout << "config: " << echo.str() << " --echo-config" << '\n';

    const Dataset d = load(a.c);
    FitOptions opts;
    opts.slices = cfg.slices;
    opts.rank = a.rank;
    opts.directions = a.dirs;
    opts.policy = cfg.policy;
    const SirFit f = fit(d, opts);
    print_warnings(f.warnings);

    const FitFile file{f, d.y(), cfg.seed, cfg.transform, cfg.policy};
    write_atomically(a.c.out, [&](std::ostream& o) { write_fit(o, file); });

    std::cout << "covariance eigenvalues (top " << std::min<Index>(10, f.diagnostics.covariance_eigenvalues.size())
              << ")\n";
    std::cout << "j,eigenvalue,cumulative_variance\n";
    for (Index j = 0; j < std::min<Index>(10, f.diagnostics.covariance_eigenvalues.size()); ++j) {
        std::printf("%lld,%.6g,%.4f\n", static_cast<long long>(j + 1), f.diagnostics.covariance_eigenvalues(j),
                    f.diagnostics.cumulative_variance(j));
    }
    std::cout << "sir eigenvalues:";
    for (Index j = 0; j < f.sir_eigenvalues.size(); ++j) std::printf(" %.6g", f.sir_eigenvalues(j));
    std::cout << "\nk = " << f.rank << " (effective " << f.effective_rank << "), p = " << f.directions
              << ", S = " << f.slices << "\nwrote " << a.c.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct CvArgs {
    Common c;
    std::string rank_grid;
    Index dirs = 1;
    std::string scheme;
};

int run_cv(const CvArgs& a) {
    RunConfig cfg;
    cfg.slices = a.c.slices;
    cfg.rank_grid = parse_rank_grid(a.rank_grid);
    cfg.directions = a.dirs;
    if (!a.scheme.empty()) cfg.scheme = a.scheme;
    cfg.policy = RankPolicy{a.c.rel_tol, a.c.abs_floor};
    cfg.transform = parse_transform(a.c.transform);
    cfg.seed = a.c.seed;
    cfg.validate();

    const Dataset d = load(a.c);
    CvOptions opts;
    opts.slices = cfg.slices;
    opts.directions = a.dirs;
    opts.rank_grid = cfg.rank_grid;
    opts.scheme = cfg.scheme ? parse_scheme(*cfg.scheme) : default_scheme(d.size());
    opts.seed = cfg.seed;
    opts.policy = cfg.policy;

    ConfigEcho echo("cv");
    echo_common(echo, a.c, true);
    echo.add("--out", a.c.out);
    echo.add("--rank-grid", a.rank_grid);
    echo.add("--dirs", static_cast<long long>(a.dirs));
    echo.add("--scheme", scheme_name(opts.scheme));
    echo.add("--seed", a.c.seed);
    if (a.c.echo) std::cout << "config: " << echo.str() << " --echo-config" << '\n';

    const CvReport r = cv_select_k(d, opts);
    for (const auto& note : r.fold_notes) std::cerr << "note: " << note << '\n';
    write_atomically(a.c.out, [&](std::ostream& o) { write_cv_report(o, r); });

    std::cout << "scheme: " << scheme_name(r.scheme) << ", folds: " << r.folds_total << " ("
              << r.folds_skipped << " skipped)\n";
    std::cout << "k,cv,paired_se\n";
    for (std::size_t g = 0; g < r.rank_grid.size(); ++g) {
        std::printf("%lld,%.6g,%.3g%s%s\n", static_cast<long long>(r.rank_grid[g]), r.cv_values[g], r.paired_se[g],
                    r.notes[g].empty() ? "" : ",", r.notes[g].c_str());
    }
    std::cout << "k_star: " << r.k_star << (r.significant_minimum ? "" : " (no significant minimum)")
              << "\nwrote " << a.c.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string fit;
    std::string data;
    std::string out;
    std::string rows;
    std::optional<std::string> transform;
    bool echo = false;
};

int run_predict(const PredictArgs& a) {
    const FitFile ff = load_fit(a.fit);
    const ResponseTransform t = a.transform ? parse_transform(*a.transform) : ff.transform;

    ConfigEcho echo("predict");
    echo.add("--fit", a.fit);
    echo.add("--data", a.data);
    echo.add("--out", a.out);
    echo.add("--transform", transform_name(t));
    if (!a.rows.empty()) echo.add("--rows", a.rows);
    if (a.echo) std::cout << "config: " << echo.str() << " --echo-config" << '\n';

    const Dataset d = select_rows(load_dataset(a.data, t), a.rows);
    if (d.grid_size() != ff.fit.grid.size() || d.grid() != ff.fit.grid) {
        throw DataError(a.data + ": grid does not match the grid of " + a.fit);
    }
    const Matrix xi = predict_indices(ff.fit, d.x());
    const SmootherModel smoother = fit_smoother(ff.fit.xi_hat, ff.training_y);
    print_warnings(smoother.warnings());
    const SmootherPrediction pred = predict_smoother(smoother, xi);
    if (pred.fallbacks > 0) {
        std::cerr << "warning: " << pred.fallbacks << " predictions fell back to the nearest training point\n";
    }

    write_atomically(a.out, [&](std::ostream& o) {
        std::vector<std::string> header{"i", "y", "y_hat"};
        for (Index j = 0; j < xi.cols(); ++j) header.push_back("xi_" + std::to_string(j + 1));
        Matrix table(d.size(), 3 + xi.cols());
        for (Index i = 0; i < d.size(); ++i) table(i, 0) = static_cast<double>(i + 1);
        table.col(1) = d.y();
        table.col(2) = pred.values;
        table.rightCols(xi.cols()) = xi;
        write_table(o, header, table);
    });
    std::printf("rmse: %.10g\n", prediction_error(pred.values, d.y()));
    std::cout << "wrote " << a.out << " (" << d.size() << " predictions)\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
    Common c;
    std::optional<Index> kmax;
    bool brownian = false;
};

int run_diagnose(const DiagnoseArgs& a) {
    RunConfig cfg;
    cfg.slices = a.c.slices;
    cfg.rank = a.kmax;
    cfg.policy = RankPolicy{a.c.rel_tol, a.c.abs_floor};
    cfg.transform = parse_transform(a.c.transform);
    cfg.validate();

    const Dataset d = load(a.c);
    const SirProblem problem(d, cfg.slices, EqualFrequency{}, cfg.policy);
    const SpectralDecomp& dr = problem.covariance_decomp();
    const Index retained = dr.retained_rank(cfg.policy);
    const Index kmax = std::min(a.kmax.value_or(20), std::max<Index>(retained, 1));

    ConfigEcho echo("diagnose");
    echo_common(echo, a.c, true);
    echo.add("--out", a.c.out);
    echo.add("--rank", static_cast<long long>(kmax));
    if (a.brownian) echo.flag("--brownian");
    if (a.c.echo) std::cout << "config: " << echo.str() << " --echo-config" << '\n';

    const SirFit f = problem.fit(kmax, 1, true);
    print_warnings(problem.warnings());
    const FitDiagnostics& diag = f.diagnostics;
    const auto grid_size = static_cast<double>(d.grid_size());

    std::ostringstream csv;
    csv << "series,x,y\n";
    auto row = [&](const char* series, Index x, double y) {
        csv << series << ',' << x << ',' << format_real(y) << '\n';
    };
    for (Index m = 1; m <= kmax && m <= diag.residual_trace.size(); ++m) row("residual_trace", m, diag.residual_trace(m - 1));
    for (Index m = 1; m <= kmax; ++m) {
        try {
            row("eigengap_ratio", m, eigengap(dr, m) / grid_size);
        } catch (const NumericalError&) {
        }
    }
    for (Index j = 1; j <= kmax; ++j) row("covariance_eigenvalue", j, dr.eigenvalues(j - 1));
    for (Index j = 1; j <= kmax; ++j) row("cumulative_variance", j, diag.cumulative_variance(j - 1));
    if (a.brownian) {
        for (Index j = 1; j <= kmax; ++j) row("scaled_eigenvalue", j, dr.eigenvalues(j - 1) / grid_size);
        for (Index j = 1; j <= kmax; ++j) row("bm_eigenvalue", j, bm_eigenvalue(j));
    }
    write_atomically(a.c.out, [&](std::ostream& o) { o << csv.str(); });

    std::cout << "m,residual_trace,eigengap_ratio,cumulative_variance\n";
    for (Index m = 1; m <= kmax; ++m) {
        double gap = std::numeric_limits<double>::quiet_NaN();
        try {
            gap = eigengap(dr, m) / grid_size;
        } catch (const NumericalError&) {
        }
        const double rt = m <= diag.residual_trace.size() ? diag.residual_trace(m - 1)
                                                          : std::numeric_limits<double>::quiet_NaN();
        std::printf("%lld,%.6g,%.6g,%.4f\n", static_cast<long long>(m), rt, gap, diag.cumulative_variance(m - 1));
    }
    if (a.brownian) {
        std::cout << "j,lambda_j/J,bm_eigenvalue,ratio\n";
        for (Index j = 1; j <= kmax; ++j) {
            const double s = dr.eigenvalues(j - 1) / grid_size;
            std::printf("%lld,%.6g,%.6g,%.4f\n", static_cast<long long>(j), s, bm_eigenvalue(j), s / bm_eigenvalue(j));
        }
    }
    std::cout << "wrote " << a.c.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional sliced inverse regression"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "fsir 0.1.0");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset and its true indices");
    simulate->add_option("--model", sim.model, "example1|example2|finite-dim|null")->required();
    simulate->add_option("--out", sim.out, "Dataset CSV to write")->required();
    simulate->add_option("--n", sim.n, "Sample size")->capture_default_str();
    simulate->add_option("--grid", sim.grid, "Grid size J (dimension for finite-dim)")->capture_default_str();
    simulate->add_option("--noise", sim.noise, "Noise standard deviation")->capture_default_str();
    simulate->add_option("--link", sim.link, "finite-dim link: identity|exp|arctan")->capture_default_str();
    simulate->add_option("--beta", sim.beta, "finite-dim direction as a comma list");
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_flag("--echo-config", "Accepted for symmetry; simulate always echoes its configuration");

    FitArgs fa;
    auto* fitcmd = app.add_subcommand("fit", "Estimate directions and write a fit file");
    add_data_options(*fitcmd, fa.c);
    add_fit_options(*fitcmd, fa.c);
    fitcmd->add_option("--out", fa.c.out, "Fit file to write")->required();
    fitcmd->add_option("--rank", fa.rank, "Truncation rank k")->required();
    fitcmd->add_option("--dirs", fa.dirs, "Number of directions p (default min(S-1, k))");
    fitcmd->add_option("--seed", fa.c.seed, "Seed recorded in the fit file")->capture_default_str();
    fitcmd->add_flag("--echo-config", fa.c.echo, "Print the effective configuration");

    CvArgs ca;
    auto* cvcmd = app.add_subcommand("cv", "Select the rank k by cross-validation");
    add_data_options(*cvcmd, ca.c);
    add_fit_options(*cvcmd, ca.c);
    cvcmd->add_option("--out", ca.c.out, "CV report CSV to write")->required();
    cvcmd->add_option("--rank-grid", ca.rank_grid, "Candidate ranks, a..b or a comma list")->required();
    cvcmd->add_option("--dirs", ca.dirs, "Number of directions p")->capture_default_str();
    cvcmd->add_option("--scheme", ca.scheme, "loo|holdout:FRAC|first:N (default loo for n <= 200)");
    cvcmd->add_option("--seed", ca.c.seed, "Seed for the holdout split")->capture_default_str();
    cvcmd->add_flag("--echo-config", ca.c.echo, "Print the effective configuration");

    PredictArgs pa;
    auto* predict = app.add_subcommand("predict", "Predict responses from a fit file");
    predict->add_option("--fit", pa.fit, "Fit file")->required();
    predict->add_option("--data", pa.data, "Dataset CSV with curves to predict")->required();
    predict->add_option("--out", pa.out, "Predictions CSV to write")->required();
    predict->add_option("--rows", pa.rows, "Use only rows a..b (1-based, inclusive)");
    predict->add_option("--transform", pa.transform, "Response transform (default from the fit file)");
    predict->add_flag("--echo-config", pa.echo, "Print the effective configuration");

    DiagnoseArgs da;
    auto* diagnose = app.add_subcommand("diagnose", "Write plot-ready spectral diagnostics");
    add_data_options(*diagnose, da.c);
    add_fit_options(*diagnose, da.c);
    diagnose->add_option("--out", da.c.out, "Diagnostics CSV to write")->required();
    diagnose->add_option("--rank", da.kmax, "Largest rank in the sweep (default 20)");
    diagnose->add_flag("--brownian", da.brownian, "Compare scaled eigenvalues with Brownian motion");
    diagnose->add_flag("--echo-config", da.c.echo, "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (fitcmd->parsed()) return run_fit(fa);
        if (cvcmd->parsed()) return run_cv(ca);
        if (predict->parsed()) return run_predict(pa);
        if (diagnose->parsed()) return run_diagnose(da);
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
