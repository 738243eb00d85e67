#include "waveduo/cli.hpp"

#include "waveduo/format.hpp"
#include "waveduo/harness.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fnmatch.h>
#include <iostream>
#include <mutex>
#include <thread>

namespace waveduo::cli {

namespace fs = std::filesystem;

namespace {

fs::path default_output_root() {
    if (const char* env = std::getenv("WAVEDUO_OUT"); env && *env) return env;
    return "waveduo-out";
}

std::string report_block(const DecayReport& r) {
    std::string out = r.summary_line() + "\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "  window          [%.6g, %.6g]\n", r.t_lo, r.t_hi);
    out += buf;
    const auto& d = r.diagnostics;
    std::snprintf(buf, sizeof buf, "  E_last/E_first  %.6g\n", 1.0 + d.relative_change);
    out += buf;
    std::snprintf(buf, sizeof buf, "  -ln(E/E0)/t     tail mean %.6g, band %.4g, tail/peak %.4g\n", d.exp_tail_mean,
                  d.exp_band, d.tail_to_peak);
    out += buf;
    if (d.alpha_fit) {
        std::snprintf(buf, sizeof buf, "  log-log fit     alpha %.6g (alt window %.6g), r2 %.6g\n", *d.alpha_fit,
                      d.alpha_fit_alt.value_or(NAN), d.r2_fit.value_or(NAN));
        out += buf;
    }
    if (d.alpha_tail) {
        std::snprintf(buf, sizeof buf, "  -ln(E/E0)/ln t  at t_max %.6g\n", *d.alpha_tail);
        out += buf;
    }
    return out;
}

/// Runs `body`, translating the error taxonomy into exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const InstabilityError& e) {
        err << "instability: " << e.what() << '\n';
        return kInstability;
    } catch (const DissipationCheckError& e) {
        err << "dissipation check failed: " << e.what() << '\n';
        return kInstability;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    }
}

struct RunFlags {
    std::string config;
    std::string name;
    std::optional<double> a, T, cfl_factor;
    std::optional<int> N;
    std::optional<std::string> b, c, initial, stride, mode;
    bool check_dissipation = false;
    std::string out;
};

struct PaperFlags {
    std::string out;
    std::string only;
    int workers = 1;
    bool short_only = false;
};

struct AnalyzeFlags {
    std::string in;
    std::optional<double> window;
};

ExperimentSpec spec_from_flags(const RunFlags& f) {
    ExperimentSpec s = f.config.empty() ? ExperimentSpec{} : load_experiment_spec(f.config);
    if (!f.name.empty()) s.name = f.name;
    if (f.a) s.a = *f.a;
    if (f.N) s.N = *f.N;
    if (f.T) s.T = *f.T;
    if (f.cfl_factor) s.cfl_factor = *f.cfl_factor;
    if (f.b) s.b_spec = *f.b;
    if (f.c) s.c_spec = *f.c;
    if (f.initial) s.initial = *f.initial;
    if (f.stride) {
        if (*f.stride == "auto")
            s.stride.reset();
        else
            s.stride = parse_integer(*f.stride, "stride");
    }
    if (f.mode) s.mode = step_mode_from_string(*f.mode);
    if (f.check_dissipation) s.check_dissipation = true;
    return s;
}

int cmd_run(const RunFlags& f, std::ostream& out) {
    const ExperimentSpec spec = spec_from_flags(f);
    const fs::path dir = f.out.empty() ? default_output_root() / spec.name : fs::path(f.out);
    const RunManifest m = run_experiment(spec, dir);
    emit_plots(dir);
    out << m.report.summary_line() << '\n';
    out << "  output " << dir.string() << ", " << m.steps << " steps, dt " << format_number(m.dt) << ", "
        << format_number(m.wall_seconds) << " s\n";
    if (m.max_dissipation_residual)
        out << "  max |dissipation residual| " << format_number(*m.max_dissipation_residual) << '\n';
    return kOk;
}

int cmd_paper(const PaperFlags& f, std::ostream& out, std::ostream& err) {
    if (f.workers < 1) throw ValidationError("--workers must be >= 1");
    std::vector<ExperimentSpec> cases;
    for (auto& s : paper_catalog()) {
        const bool is_short = s.name.ends_with("-short");
        const bool long_horizon = s.T > 500.0;
        if (f.short_only && long_horizon) continue;
        if (!f.only.empty() && fnmatch(f.only.c_str(), s.name.c_str(), 0) != 0) continue;
        // The short run stands in for its long sibling; keep names aligned with the case.
        if (f.short_only && is_short) s.name.resize(s.name.size() - 6);
        cases.push_back(std::move(s));
    }
    if (cases.empty()) throw ValidationError("no catalog case matches '" + f.only + "'");

    const fs::path root = f.out.empty() ? default_output_root() : fs::path(f.out);
    std::vector<std::optional<RunManifest>> results(cases.size());
    std::atomic<std::size_t> next{0};
    std::atomic<int> failure{kOk};
    std::mutex err_mutex;

    auto worker = [&] {
        while (failure.load() == kOk) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cases.size()) return;
            std::ostringstream local_err;
            const int code = guarded(local_err, [&] {
                results[i] = run_experiment(cases[i], root / cases[i].name);
                emit_plots(root / cases[i].name);
                return int{kOk};
            });
            if (code != kOk) {
                int expected = kOk;
                failure.compare_exchange_strong(expected, code);
                std::lock_guard lock(err_mutex);
                err << cases[i].name << ": " << local_err.str();
            }
        }
    };
    const int n_workers = std::min<int>(f.workers, static_cast<int>(cases.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure.load() != kOk) return failure.load();

    char buf[256];
    std::snprintf(buf, sizeof buf, "%-22s %6s %9s  %-13s %8s %8s %s\n", "case", "a", "T", "class", "alpha", "r2",
                  "method");
    out << buf;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& r = results[i]->report;
        std::snprintf(buf, sizeof buf, "%-22s %6g %9g  %-13s %8s %8.3f %s\n", cases[i].name.c_str(), cases[i].a,
                      cases[i].T, std::string(to_string(r.classification)).c_str(),
                      r.alpha ? format_number(std::round(*r.alpha * 1000.0) / 1000.0).c_str() : "-", r.r2,
                      r.alpha_method ? std::string(to_string(*r.alpha_method)).c_str() : "-");
        out << buf;
    }
    return kOk;
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
    DecayThresholds th;
    if (f.window) {
        if (!(*f.window > 0.0 && *f.window < 1.0)) throw ValidationError("--window must lie in (0, 1)");
        th.poly_window = *f.window;
    }
    const auto samples = read_energy_csv(f.in);
    out << report_block(classify(diagnostics(samples), th));
    return kOk;
}

int cmd_list_cases(std::ostream& out) {
    for (const auto& s : paper_catalog()) {
        const auto b = parse_profile(s.b_spec, ProfileRole::Coupling);
        const auto c = parse_profile(s.c_spec, ProfileRole::Damping);
        out << s.name << "  " << s.b_spec << " = " << b.describe() << "  " << s.c_spec << " = " << c.describe()
            << "  a=" << format_number(s.a) << "  T=" << format_number(s.T) << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulator for two 1D wave equations coupled by velocities with local damping"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Run one experiment and classify its energy decay");
    run->add_option("--config", run_flags.config, "Experiment config file (JSON key-value tree)");
    run->add_option("--name", run_flags.name, "Experiment name");
    run->add_option("--a", run_flags.a, "Speed-squared ratio a > 0 of the u equation");
    run->add_option("--N", run_flags.N, "Interior node count");
    run->add_option("--T", run_flags.T, "Final time");
    run->add_option("--cfl-factor", run_flags.cfl_factor, "Fraction of the maximal stable time step, in (0,1]");
    run->add_option("--b", run_flags.b, "Coupling profile: catalog name or indicator:lo-hi,...@amp");
    run->add_option("--c", run_flags.c, "Damping profile: catalog name or indicator:lo-hi,...@amp");
    run->add_option("--initial", run_flags.initial, "Initial data: paper, or 'u0;u1;y0;y1' shapes");
    run->add_option("--stride", run_flags.stride, "Energy recording stride in steps, or auto");
    run->add_option("--mode", run_flags.mode, "Step implementation: closed-form or solve");
    run->add_flag("--check-dissipation", run_flags.check_dissipation, "Check the dissipation identity every step");
    run->add_option("--out", run_flags.out, "Output directory (default $WAVEDUO_OUT/<name>)");

    PaperFlags paper_flags;
    auto* paper = app.add_subcommand("paper", "Run the experiment catalog");
    paper->add_option("--out", paper_flags.out, "Output root (default $WAVEDUO_OUT or ./waveduo-out)");
    paper->add_option("--only", paper_flags.only, "Glob over case names");
    paper->add_option("--workers", paper_flags.workers, "Concurrent cases");
    paper->add_flag("--short", paper_flags.short_only, "Use the T=500 variants");

    AnalyzeFlags analyze_flags;
    auto* analyze = app.add_subcommand("analyze", "Classify the decay recorded in an energy CSV");
    analyze->add_option("--in", analyze_flags.in, "Energy CSV")->required();
    analyze->add_option("--window", analyze_flags.window, "Tail window fraction for the log-log fit");

    auto* list = app.add_subcommand("list-cases", "Print the experiment catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        // Subcommand help requests surface as CallForHelp on the subcommand.
        if (e.get_exit_code() == 0) {
            for (auto* sub : app.get_subcommands()) out << sub->help();
            if (app.get_subcommands().empty()) out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << '\n';
        return kValidation;
    }

    if (run->parsed()) return guarded(err, [&] { return cmd_run(run_flags, out); });
    if (paper->parsed()) return guarded(err, [&] { return cmd_paper(paper_flags, out, err); });
    if (analyze->parsed()) return guarded(err, [&] { return cmd_analyze(analyze_flags, out); });
    if (list->parsed()) return guarded(err, [&] { return cmd_list_cases(out); });
    return kValidation;
}

}  // namespace waveduo::cli
