// Acceptance suite: one PASS/FAIL line per criterion. Pass --skip-long to
// leave out the T = 500000 runs of criteria 6 and 7 during development.

#include "waveduo/analysis.hpp"
#include "waveduo/energy.hpp"
#include "waveduo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace waveduo;
namespace fs = std::filesystem;

namespace {

constexpr double kConservationTol = 1e-9;
constexpr double kDissipationTol = 1e-12;
constexpr long kDissipationSteps = 10000;
constexpr long kDualPathSteps = 1000;
constexpr double kDualPathTol = 1e-12;
constexpr double kLeapfrogTol = 1e-10;
constexpr double kLongAlphaTol = 0.2;
constexpr double kSmokeAlphaTol = 0.35;
constexpr double kLongT = 500000.0;
constexpr double kSmokeT = 100000.0;
constexpr double kStallRatio = 0.01;
constexpr double kPlantedAlphaTol = 1e-6;
constexpr double kPlantedR2 = 1.0 - 1e-9;

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        pass = false;
        note(why);
    }
    void note(const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

PhysicalConfig cfg(double a, const std::string& b, const std::string& c) {
    return PhysicalConfig::make(a, named_case(b), named_case(c));
}

/// Energy at every step of a run.
std::vector<EnergyRecord<double>> energies(const PhysicalConfig& config, const GridSpec& g, const TimeSpec& time,
                                           const InitialData& d) {
    const auto c = sample_profile(config.c, g);
    std::vector<EnergyRecord<double>> out;
    out.reserve(static_cast<std::size_t>(time.steps));
    run<double>(config, g, time, d, [&](const StepEvent<double>& ev) {
        out.push_back(compute_energy(ev, c, g, time.dt, config.a));
    });
    return out;
}

Outcome conservation() {
    Outcome o;
    const auto g = GridSpec::make(100);
    const auto recs = energies(cfg(1.0, "b3", "c1"), g, TimeSpec::make(1.0, g, 500.0), default_initial_data());
    const double e0 = recs.front().e_total;
    double worst = 0.0;
    for (const auto& r : recs) worst = std::max(worst, std::abs(r.e_total - e0) / e0);
    o.note("max |E-E0|/E0 = " + fmt("%.3g", worst) + " over " + std::to_string(recs.size()) + " steps");
    if (!(worst <= kConservationTol)) o.fail("exceeds " + fmt("%g", kConservationTol));
    return o;
}

Outcome dissipation() {
    Outcome o;
    const auto g = GridSpec::make(100);
    struct Case {
        const char *b, *c;
        double a;
    };
    for (const Case k : {Case{"b4", "c3", 1.0}, Case{"b4", "c5", 2.0}, Case{"b5", "c4", 0.5}}) {
        auto time = TimeSpec::make(k.a, g, 1.0);
        time.steps = kDissipationSteps;
        time.T = time.steps * time.dt;
        const auto recs = energies(cfg(k.a, k.b, k.c), g, time, default_initial_data());
        const double tol = kDissipationTol * std::max(recs.front().e_total, 1.0);
        double worst = 0.0, rise = 0.0;
        for (std::size_t i = 1; i < recs.size(); ++i) {
            worst = std::max(worst, std::abs(dissipation_residual(recs[i], recs[i - 1])));
            rise = std::max(rise, recs[i].e_total - recs[i - 1].e_total);
        }
        const std::string tag = std::string(k.b) + "-" + k.c + "-a" + fmt("%g", k.a);
        o.note(tag + " residual " + fmt("%.2g", worst) + " (tol " + fmt("%.2g", tol) + ")");
        if (recs.size() != static_cast<std::size_t>(kDissipationSteps)) o.fail(tag + " wrong record count");
        if (!(worst <= tol)) o.fail(tag + " identity violated");
        if (rise > tol) o.fail(tag + " energy increased by " + fmt("%.3g", rise));
    }
    return o;
}

Outcome dual_path() {
    Outcome o;
    const auto g = GridSpec::make(100);
    const double a = 2.0;
    const auto config = cfg(a, "b4", "c3");
    const auto time = TimeSpec::make(a, g, 1.0);
    const auto coef = SampledCoefficients<double>::make(config, g);
    const auto k = precompute_coefficients(coef, a, g, time.dt);
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    WaveState<double> s;
    for (auto* v : {&s.u_prev, &s.u_curr, &s.y_prev, &s.y_curr}) {
        *v = Vector<double>::Zero(g.size());
        for (int j = 1; j <= g.N; ++j) (*v)[j] = d(rng);
    }
    double worst = 0.0;
    Level<double> x{Vector<double>::Zero(g.size()), Vector<double>::Zero(g.size())};
    Level<double> y = x;
    for (long n = 0; n < kDualPathSteps; ++n) {
        step_closed_form(s, k, time.lambda, x);
        step_reference_solve(s, coef, time.lambda, a, time.dt, y);
        worst = std::max({worst, (x.u - y.u).cwiseAbs().maxCoeff(), (x.y - y.y).cwiseAbs().maxCoeff()});
        s.advance(x, time.dt);
    }
    o.note("max-norm difference " + fmt("%.3g", worst) + " over " + std::to_string(kDualPathSteps) + " steps");
    if (!(worst <= kDualPathTol)) o.fail("exceeds " + fmt("%g", kDualPathTol));
    return o;
}

Outcome leapfrog() {
    Outcome o;
    const auto g = GridSpec::make(100);
    const auto time = TimeSpec::make(1.0, g, 10.0);
    const InitialData d{InitialShape::sine(1), {}, {}, {}};
    Vector<double> shape(g.size());
    for (int j = 0; j < g.size(); ++j) shape[j] = std::sin(std::numbers::pi * g.node(j));
    shape[0] = shape[g.N + 1] = 0.0;
    double worst = 0.0;
    long checked = 0;
    run<double>(cfg(1.0, "b1", "c1"), g, time, d, [&](const StepEvent<double>& ev) {
        const double t1 = static_cast<double>(ev.n + 1) * time.dt;
        worst = std::max(worst, (ev.next.u - shape * std::cos(std::numbers::pi * t1)).cwiseAbs().maxCoeff());
        ++checked;
    });
    o.note("max-norm error " + fmt("%.3g", worst) + " over " + std::to_string(checked) + " steps");
    if (!(worst <= kLeapfrogTol)) o.fail("exceeds " + fmt("%g", kLeapfrogTol));
    return o;
}

ExperimentSpec catalog_spec(const std::string& b, const std::string& c, double a, double T) {
    ExperimentSpec s;
    s.name = b + "-" + c + "-a" + fmt("%g", a) + "-T" + fmt("%g", T);
    s.a = a;
    s.T = T;
    s.b_spec = b;
    s.c_spec = c;
    return s;
}

Outcome exponential(const fs::path& root) {
    Outcome o;
    for (const auto& [b, c] : {std::pair{"b4", "c3"}, {"b4", "c5"}, {"b5", "c4"}}) {
        const auto m = run_experiment(catalog_spec(b, c, 1.0, 500.0), root / "exp" / (std::string(b) + c));
        const auto& r = m.report;
        o.note(std::string(b) + "-" + c + " " + std::string(to_string(r.classification)) + " band " +
               fmt("%.3f", r.diagnostics.exp_band));
        if (r.classification != DecayClass::Exponential) o.fail(std::string(b) + "-" + c + " not Exponential");
    }
    return o;
}

struct Target {
    const char *b, *c;
    double alpha;
};

struct PolyRun {
    Target target;
    double T;
    double tol;
    std::future<RunManifest> result;
};

Outcome polynomial(std::vector<PolyRun>& runs, bool skipped_long) {
    Outcome o;
    if (skipped_long) o.fail("long-horizon runs skipped");
    for (auto& r : runs) {
        const auto m = r.result.get();
        const std::string tag = std::string(r.target.b) + "-" + r.target.c + " T=" + fmt("%g", r.T);
        const auto& rep = m.report;
        const bool poly = rep.classification == DecayClass::Polynomial;
        const double alpha = rep.alpha.value_or(NAN);
        o.note(tag + " " + std::string(to_string(rep.classification)) + " alpha " + fmt("%.3f", alpha) + " vs " +
               fmt("%g", r.target.alpha));
        if (!poly) o.fail(tag + " not Polynomial");
        else if (!(std::abs(alpha - r.target.alpha) <= r.tol))
            o.fail(tag + " off by " + fmt("%.3f", alpha - r.target.alpha) + " (tol " + fmt("%g", r.tol) + ")");
    }
    return o;
}

Outcome stall(const fs::path& root) {
    Outcome o;
    const auto m = run_experiment(catalog_spec("b4", "c3", 2.0, 500.0), root / "stall");
    const double ratio = m.energy_final / m.energy_initial;
    o.note("E(500)/E(0) = " + fmt("%.4f", ratio));
    if (!(ratio >= kStallRatio)) o.fail("below " + fmt("%g", kStallRatio));
    return o;
}

Outcome analyzer_self_test() {
    Outcome o;
    std::vector<EnergySample> planted;
    for (int i = 0; i < 1000; ++i) {
        const double t = 10.0 * std::pow(1e4, i / 999.0);
        planted.push_back({t, 5.0 * std::pow(t, -1.4)});
    }
    const auto rep = classify(diagnostics(planted));
    const auto fit = fit_polynomial_exponent(diagnostics(planted), 0.1);
    o.note("planted alpha " + fmt("%.10f", fit ? fit->alpha : NAN) + " r2 " + fmt("%.12f", fit ? fit->r2 : NAN));
    if (!fit || !(std::abs(fit->alpha - 1.4) <= kPlantedAlphaTol) || !(fit->r2 >= kPlantedR2))
        o.fail("planted power law not recovered");
    if (rep.classification != DecayClass::Polynomial) o.fail("planted power law not classified Polynomial");

    int exp_cases = 0;
    for (double rate : {1e-3, 1e-2, 0.05, 0.2})
        for (double t_max : {500.0, 5000.0, 500000.0})
            for (double wobble : {0.0, 0.05}) {
                std::vector<EnergySample> s;
                for (int i = 0; i < 10000; ++i) {
                    const double t = t_max * i / 9999.0;
                    s.push_back({t, 40.0 * std::exp(-rate * t) * (1.0 + wobble * std::cos(3.0 * t))});
                }
                ++exp_cases;
                if (classify(diagnostics(s)).classification == DecayClass::Polynomial)
                    o.fail("exponential rate " + fmt("%g", rate) + " horizon " + fmt("%g", t_max) +
                           " classified Polynomial");
            }
    o.note(std::to_string(exp_cases) + " exponential series checked");

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> amp(-2.0, 2.0), pos(0.0, 1.0);
    const auto g = GridSpec::make(100);
    const std::vector<double> speeds{0.5, 1.0, 2.0};
    int property_cases = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const double a = speeds[trial % 3];
        const double lo = pos(rng) * 0.8;
        const auto b = CoefficientProfile::make({{lo, lo + 0.2 * pos(rng), amp(rng)}});
        const double clo = pos(rng) * 0.8;
        const auto c = CoefficientProfile::make({{clo, clo + 0.2, 2.0 * pos(rng)}}, ProfileRole::Damping);
        const InitialData d{InitialShape::parabola(amp(rng)), InitialShape::sine(1 + trial % 3, amp(rng)),
                            InitialShape::sine(2, amp(rng)), InitialShape::parabola(amp(rng))};
        const auto time = TimeSpec::make(a, g, 20.0);
        const auto e1 = energies(PhysicalConfig::make(a, b, c), g, time, d);
        const auto e2 = energies(PhysicalConfig::make(a, b.negated(), c), g, time, d.with_y_negated());
        const double s = 0.5 + 3.0 * pos(rng);
        const auto e3 = energies(PhysicalConfig::make(a, b, c), g, time, d.scaled(s));
        ++property_cases;
        bool sym = e1.size() == e2.size();
        for (std::size_t i = 0; sym && i < e1.size(); ++i) sym = e1[i].e_total == e2[i].e_total;
        if (!sym) o.fail("sign symmetry broken in trial " + std::to_string(trial));
        double worst = 0.0;
        for (std::size_t i = 0; i < e1.size(); ++i)
            worst = std::max(worst, std::abs(e3[i].e_total - s * s * e1[i].e_total) / (s * s * e1[i].e_total));
        if (!(worst <= 1e-10)) o.fail("s^2 scaling off by " + fmt("%.3g", worst) + " in trial " + std::to_string(trial));
    }
    o.note(std::to_string(property_cases) + " randomized symmetry/scaling configs");
    return o;
}

template <typename F>
Outcome guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        Outcome o;
        o.fail(std::string("exception: ") + e.what());
        return o;
    }
}

}  // namespace

int main(int argc, char** argv) {
    bool skip_long = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--skip-long") skip_long = true;

    const fs::path root = fs::temp_directory_path() / ("waveduo-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(root);
    const auto started = std::chrono::steady_clock::now();

    // The long runs go first so they overlap with the quick criteria.
    auto launch = [&](std::vector<Target> targets, double a, const std::string& tag) {
        std::vector<PolyRun> runs;
        for (double T : {kLongT, kSmokeT}) {
            if (skip_long && T == kLongT) continue;
            for (const auto& t : targets) {
                auto spec = catalog_spec(t.b, t.c, a, T);
                runs.push_back({t, T, T == kLongT ? kLongAlphaTol : kSmokeAlphaTol,
                                std::async(std::launch::async, [spec, dir = root / tag / spec.name] {
                                    return run_experiment(spec, dir);
                                })});
            }
        }
        return runs;
    };
    auto runs_a2 = launch({{"b4", "c3", 1.4}, {"b4", "c5", 0.9}, {"b5", "c4", 1.19}}, 2.0, "a2");
    auto runs_a05 = launch({{"b4", "c3", 1.5}, {"b4", "c5", 1.25}, {"b5", "c4", 1.15}}, 0.5, "a05");

    std::vector<std::pair<std::string, Outcome>> results;
    results.emplace_back("conservation", guarded(conservation));
    results.emplace_back("dissipation identity", guarded(dissipation));
    results.emplace_back("dual-path oracle", guarded(dual_path));
    results.emplace_back("leapfrog exactness", guarded(leapfrog));
    results.emplace_back("exponential regime a=1", guarded([&] { return exponential(root); }));
    results.emplace_back("polynomial exponents a=2", guarded([&] { return polynomial(runs_a2, skip_long); }));
    results.emplace_back("polynomial exponents a=0.5", guarded([&] { return polynomial(runs_a05, skip_long); }));
    results.emplace_back("short-horizon stall", guarded([&] { return stall(root); }));
    results.emplace_back("analyzer self-test", guarded(analyzer_self_test));

    int failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& [name, o] = results[i];
        std::printf("criterion %zu %-28s %s  %s\n", i + 1, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        failed += o.pass ? 0 : 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(results.size()) - failed, results.size(), secs);
    std::error_code ec;
    fs::remove_all(root, ec);
    return failed == 0 ? 0 : 1;
}
