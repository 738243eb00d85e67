#include "waveduo/harness.hpp"

#include "waveduo/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace waveduo {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

long auto_stride(long steps) {
    return std::max(1L, (steps + kTargetEnergyRows - 1) / kTargetEnergyRows);
}

ExperimentSpec::Elaborated ExperimentSpec::elaborate() const {
    if (stride && *stride < 1) throw ValidationError("stride must be >= 1");
    if (!(T >= 0.0)) throw ValidationError("T must be >= 0");
    Elaborated e;
    e.grid = GridSpec::make(N);
    e.config = PhysicalConfig::make(a, parse_profile(b_spec, ProfileRole::Coupling),
                                    parse_profile(c_spec, ProfileRole::Damping));
    e.time = TimeSpec::make(a, e.grid, T, cfl_factor);
    e.initial = InitialData::parse(initial);
    e.stride = stride.value_or(auto_stride(e.time.steps));
    return e;
}

std::string_view to_string(StepMode m) { return m == StepMode::ClosedForm ? "closed_form" : "reference_solve"; }

StepMode step_mode_from_string(std::string_view s) {
    if (s == "closed_form" || s == "closed-form") return StepMode::ClosedForm;
    if (s == "reference_solve" || s == "solve") return StepMode::ReferenceSolve;
    throw ValidationError("unknown step mode '" + std::string(s) + "'; expected closed_form or reference_solve");
}

std::vector<ExperimentSpec> paper_catalog() {
    std::vector<ExperimentSpec> out;
    auto add = [&](const char* b, const char* c, double a, double T, std::string suffix, std::string comment = {}) {
        ExperimentSpec s;
        std::string a_text = format_number(a);
        s.name = std::string(b) + "-" + c + "-a" + a_text + suffix;
        s.a = a;
        s.N = 100;
        s.T = T;
        s.cfl_factor = 1.0;
        s.b_spec = b;
        s.c_spec = c;
        s.comment = std::move(comment);
        out.push_back(std::move(s));
    };
    add("b3", "c1", 1.0, 500.0, "", "no damping: energy conserved");
    add("b4", "c3", 1.0, 500.0, "", "coupling and damping regions intersect");
    add("b4", "c5", 1.0, 500.0, "", "disjoint coupling and damping regions");
    add("b5", "c4", 1.0, 500.0, "", "disjoint coupling and damping regions");
    for (double a : {2.0, 0.5}) {
        const std::string b5c4_note =
            "disjoint coupling and damping regions; the published energy-figure caption for this case "
            "lists b4/c5, the narrative and convergence figures use b5/c4, which is what runs here";
        add("b4", "c3", a, 500000.0, "", "coupling and damping regions intersect");
        add("b4", "c5", a, 500000.0, "", "disjoint coupling and damping regions");
        add("b5", "c4", a, 500000.0, "", b5c4_note);
        add("b4", "c3", a, 500.0, "-short", "short horizon: energy appears not to decay");
        add("b4", "c5", a, 500.0, "-short", "short horizon: energy appears not to decay");
        add("b5", "c4", a, 500.0, "-short", "short horizon: energy appears not to decay");
    }
    return out;
}

// CSV ---------------------------------------------------------------------------

namespace {

void append_optional(std::string& line, const std::optional<double>& v) {
    line += ',';
    if (v) line += format_number(*v);
}

std::string energy_row(const EnergyRecord<double>& r) {
    const auto d = diagnostic_row(r.t, r.e_total);
    std::string line = format_number(r.t);
    for (double v : {r.e_total, r.e_ku, r.e_pu, r.e_ky, r.e_py}) line += "," + format_number(v);
    append_optional(line, d.neg_ln_e_over_t);
    append_optional(line, d.t_times_e);
    append_optional(line, d.neg_ln_e_over_ln_t);
    line += '\n';
    return line;
}

void write_profile_csv(const fs::path& path, const GridSpec& grid, const Vector<double>& u, const Vector<double>& y) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(path, "cannot open profile CSV for writing");
    f << kProfileCsvHeader << '\n';
    for (int j = 0; j < grid.size(); ++j)
        f << format_number(grid.node(j)) << ',' << format_number(u[j]) << ',' << format_number(y[j]) << '\n';
    if (!f) throw IoError(path, "failed writing profile CSV");
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::vector<EnergySample> read_energy_csv(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(path, "cannot open energy CSV");
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();

    std::vector<EnergySample> out;
    std::size_t pos = 0;
    long line_no = 0;
    const std::size_t expected_fields = split_fields(kEnergyCsvHeader).size();
    while (pos < text.size()) {
        ++line_no;
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos)
            throw ValidationError("energy CSV line " + std::to_string(line_no) + " is truncated (no line end)");
        std::string_view line(text.data() + pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;
        if (line_no == 1) {
            if (line != kEnergyCsvHeader)
                throw ValidationError("energy CSV line 1: unexpected header '" + std::string(line) + "'");
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != expected_fields)
            throw ValidationError("energy CSV line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected_fields) + " fields, got " + std::to_string(fields.size()));
        try {
            out.push_back({parse_number(fields[0], "t"), parse_number(fields[1], "E")});
        } catch (const ValidationError& e) {
            throw ValidationError("energy CSV line " + std::to_string(line_no) + ": " + e.what());
        }
        if (out.size() > 1 && !(out.back().t > out[out.size() - 2].t))
            throw ValidationError("energy CSV line " + std::to_string(line_no) + ": time is not increasing");
    }
    if (line_no == 0) throw ValidationError("energy CSV line 1: file is empty");
    if (out.empty()) throw ValidationError("energy CSV line 2: no data rows");
    return out;
}

// Run ---------------------------------------------------------------------------

RunManifest run_experiment(const ExperimentSpec& spec, const fs::path& out_dir) {
    const auto e = spec.elaborate();
    const auto started = std::chrono::steady_clock::now();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError(out_dir, "cannot create output directory (" + ec.message() + ")");

    RunManifest m;
    m.spec = spec;
    m.spec.stride = e.stride;
    m.dx = e.grid.dx;
    m.dt = e.time.dt;
    m.lambda = e.time.lambda;
    m.steps = e.time.steps;

    const fs::path energy_path = out_dir / m.energy_file;
    std::ofstream energy_csv(energy_path, std::ios::binary);
    if (!energy_csv) throw IoError(energy_path, "cannot open energy CSV for writing");
    energy_csv << kEnergyCsvHeader << '\n';

    const Vector<double> c = sample_profile<double>(e.config.c, e.grid);
    const double a = e.config.a;
    const double dt = e.time.dt;
    std::vector<EnergySample> samples;
    std::optional<EnergyRecord<double>> previous;
    double max_residual = 0.0;
    double tolerance = 0.0;

    auto record = [&](const EnergyRecord<double>& r, bool write) {
        if (r.n == 0) {
            m.energy_initial = r.e_total;
            tolerance = kDissipationTolerance * std::max(r.e_total, 1.0);
        }
        if (spec.check_dissipation && previous) {
            const double res = std::abs(dissipation_residual(r, *previous));
            max_residual = std::max(max_residual, res);
            if (res > tolerance)
                throw DissipationCheckError("dissipation identity residual " + format_number(res) + " exceeds " +
                                            format_number(tolerance) + " at step " + std::to_string(r.n));
        }
        previous = r;
        if (write) {
            energy_csv << energy_row(r);
            samples.push_back({r.t, r.e_total});
            m.energy_final = r.e_total;
        }
    };

    const auto init = SampledInitial<double>::make(e.initial, e.grid);
    write_profile_csv(out_dir / m.initial_profile_file, e.grid, init.u0, init.y0);

    WaveState<double> final_state;
    if (e.time.steps == 0) {
        const auto coef = SampledCoefficients<double>::make(e.config, e.grid);
        const auto level1 = first_step(init, coef, a, e.grid, dt);
        final_state = initial_state(init, level1, dt);
        auto r = compute_energy(final_state.u_prev, final_state.u_curr, level1.u, final_state.y_prev,
                                final_state.y_curr, level1.y, c, e.grid, dt, a, spec.summation);
        record(r, true);
    } else {
        RunOptions opts;
        opts.mode = spec.mode;
        opts.stride = spec.check_dissipation ? 1 : e.stride;
        opts.check_every_step = spec.check_dissipation;
        const Observer<double> observer = [&](const StepEvent<double>& ev) {
            const bool write = ev.n % e.stride == 0 || ev.last;
            record(compute_energy(ev, c, e.grid, dt, a, spec.summation), write);
        };
        final_state = run<double>(e.config, e.grid, e.time, e.initial, observer, opts);
    }
    energy_csv.flush();
    if (!energy_csv) throw IoError(energy_path, "failed writing energy CSV");
    energy_csv.close();

    write_profile_csv(out_dir / m.final_profile_file, e.grid, final_state.u_curr, final_state.y_curr);
    if (spec.check_dissipation) m.max_dissipation_residual = max_residual;

    m.report = classify(diagnostics(samples), spec.thresholds);
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(m, out_dir / "manifest.json");
    return m;
}

// Plots -------------------------------------------------------------------------

namespace {

struct Panel {
    const char* file;
    const char* output;
    const char* ylabel;
    std::string using_clause;
    const char* source;
    bool logscale_y;
};

std::string plot_script(const Panel& p, const std::string& title) {
    std::string s;
    s += "# gnuplot script; run from this directory: gnuplot " + std::string(p.file) + "\n";
    s += "set terminal svg size 800,600 dynamic enhanced\n";
    s += "set output '" + std::string(p.output) + "'\n";
    s += "set datafile separator ','\n";
    s += "set title \"" + title + "\" noenhanced\n";
    s += "set grid\n";
    s += "set key top right\n";
    if (p.logscale_y) s += "set logscale y\n";
    s += "set ylabel '" + std::string(p.ylabel) + "'\n";
    s += std::string("set xlabel '") + (std::string(p.source) == "energy.csv" ? "t" : "x") + "'\n";
    s += "plot " + p.using_clause + "\n";
    return s;
}

}  // namespace

std::vector<fs::path> emit_plots(const fs::path& run_dir) {
    const fs::path manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw IoError(manifest_path, "missing manifest");
    const RunManifest m = load_manifest(manifest_path);
    for (const auto& f : {m.energy_file, m.final_profile_file})
        if (!fs::exists(run_dir / f)) throw IoError(run_dir / f, "missing run artifact");

    const std::string title = m.spec.name + ": a=" + format_number(m.spec.a) + ", b=" + m.spec.b_spec +
                              ", c=" + m.spec.c_spec + ", T=" + format_number(m.spec.T);
    const std::string ef = "'" + m.energy_file + "'";
    const std::string pf = "'" + m.final_profile_file + "'";
    const std::vector<Panel> panels{
        {"energy.gp", "energy.svg", "E(t)", ef + " using 1:2 every ::1 with lines title 'E'", "energy.csv", false},
        {"exp_rate.gp", "exp_rate.svg", "-ln(E)/t",
         ef + " using 1:7 every ::1 with lines title '-ln(E)/t'", "energy.csv", false},
        {"t_times_e.gp", "t_times_e.svg", "t E(t)", ef + " using 1:8 every ::1 with lines title 't E'",
         "energy.csv", false},
        {"exponent.gp", "exponent.svg", "-ln(E)/ln(t)",
         ef + " using 1:9 every ::1 with lines title '-ln(E)/ln(t)'", "energy.csv", false},
        {"profile_final.gp", "profile_final.svg", "u, y",
         pf + " using 1:2 every ::1 with lines title 'u', " + pf + " using 1:3 every ::1 with lines title 'y'",
         "profile", false},
    };

    std::vector<fs::path> written;
    for (const auto& p : panels) {
        const fs::path path = run_dir / p.file;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError(path, "cannot write plot script");
        f << plot_script(p, title);
        if (!f) throw IoError(path, "failed writing plot script");
        written.push_back(path);
    }
    return written;
}

// JSON --------------------------------------------------------------------------

namespace {

ordered_json thresholds_json(const DecayThresholds& t) {
    return ordered_json{{"conserved_rel", t.conserved_rel},     {"exp_band", t.exp_band},
                        {"exp_window", t.exp_window},           {"collapse_ratio", t.collapse_ratio},
                        {"poly_r2", t.poly_r2},                 {"poly_stability", t.poly_stability},
                        {"poly_window", t.poly_window},         {"poly_window_alt", t.poly_window_alt}};
}

DecayThresholds thresholds_from_json(const json& j) {
    DecayThresholds t;
    t.conserved_rel = j.value("conserved_rel", t.conserved_rel);
    t.exp_band = j.value("exp_band", t.exp_band);
    t.exp_window = j.value("exp_window", t.exp_window);
    t.collapse_ratio = j.value("collapse_ratio", t.collapse_ratio);
    t.poly_r2 = j.value("poly_r2", t.poly_r2);
    t.poly_stability = j.value("poly_stability", t.poly_stability);
    t.poly_window = j.value("poly_window", t.poly_window);
    t.poly_window_alt = j.value("poly_window_alt", t.poly_window_alt);
    return t;
}

template <typename T>
void put_optional(ordered_json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> get_optional(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

ordered_json to_json(const ExperimentSpec& s) {
    ordered_json j;
    j["name"] = s.name;
    j["a"] = s.a;
    j["N"] = s.N;
    j["T"] = s.T;
    j["cfl_factor"] = s.cfl_factor;
    j["b"] = s.b_spec;
    j["c"] = s.c_spec;
    j["initial"] = s.initial;
    j["stride"] = s.stride ? ordered_json(*s.stride) : ordered_json("auto");
    j["mode"] = to_string(s.mode);
    j["check_dissipation"] = s.check_dissipation;
    j["summation"] = s.summation == Summation::Plain ? "plain" : "compensated";
    j["comment"] = s.comment;
    j["analysis"] = thresholds_json(s.thresholds);
    return j;
}

ExperimentSpec spec_from_json(const json& j) {
    try {
        if (!j.is_object()) throw ValidationError("experiment config must be a key-value object");
        ExperimentSpec s;
        s.name = j.value("name", s.name);
        s.a = j.value("a", s.a);
        s.N = j.value("N", s.N);
        s.T = j.value("T", s.T);
        s.cfl_factor = j.value("cfl_factor", s.cfl_factor);
        s.b_spec = j.value("b", s.b_spec);
        s.c_spec = j.value("c", s.c_spec);
        s.initial = j.value("initial", s.initial);
        if (j.contains("stride")) {
            const auto& st = j.at("stride");
            if (st.is_string()) {
                if (st.get<std::string>() != "auto") throw ValidationError("stride must be an integer or \"auto\"");
                s.stride.reset();
            } else {
                s.stride = st.get<long>();
            }
        }
        if (j.contains("mode")) s.mode = step_mode_from_string(j.at("mode").get<std::string>());
        s.check_dissipation = j.value("check_dissipation", s.check_dissipation);
        if (j.contains("summation")) {
            const auto sum = j.at("summation").get<std::string>();
            if (sum != "plain" && sum != "compensated") throw ValidationError("summation must be plain or compensated");
            s.summation = sum == "plain" ? Summation::Plain : Summation::Compensated;
        }
        s.comment = j.value("comment", s.comment);
        if (j.contains("analysis")) s.thresholds = thresholds_from_json(j.at("analysis"));
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed experiment config: ") + e.what());
    }
}

ordered_json to_json(const DecayReport& r) {
    ordered_json j;
    j["classification"] = to_string(r.classification);
    put_optional(j, "alpha", r.alpha);
    j["alpha_method"] = r.alpha_method ? ordered_json(to_string(*r.alpha_method)) : ordered_json(nullptr);
    put_optional(j, "exp_rate", r.exp_rate);
    j["window"] = {r.t_lo, r.t_hi};
    j["r2"] = r.r2;
    j["summary"] = r.summary_line();
    const auto& d = r.diagnostics;
    ordered_json dj;
    dj["relative_change"] = d.relative_change;
    dj["exp_band"] = d.exp_band;
    dj["exp_tail_mean"] = d.exp_tail_mean;
    dj["d1_peak"] = d.d1_peak;
    dj["tail_to_peak"] = d.tail_to_peak;
    put_optional(dj, "alpha_fit", d.alpha_fit);
    put_optional(dj, "alpha_fit_alt", d.alpha_fit_alt);
    put_optional(dj, "r2_fit", d.r2_fit);
    put_optional(dj, "alpha_tail", d.alpha_tail);
    j["diagnostics"] = dj;
    return j;
}

namespace {
// JSON has no infinity; nlohmann writes it as null.
double finite_or_inf(const json& j, const char* key) {
    return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<double>() : INFINITY;
}
}  // namespace

DecayReport report_from_json(const json& j) {
    DecayReport r;
    const auto cls = decay_class_from_string(j.at("classification").get<std::string>());
    if (!cls) throw ValidationError("unknown classification in report");
    r.classification = *cls;
    r.alpha = get_optional(j, "alpha");
    if (j.contains("alpha_method") && !j.at("alpha_method").is_null())
        r.alpha_method = alpha_method_from_string(j.at("alpha_method").get<std::string>());
    r.exp_rate = get_optional(j, "exp_rate");
    r.t_lo = j.at("window").at(0).get<double>();
    r.t_hi = j.at("window").at(1).get<double>();
    r.r2 = j.at("r2").get<double>();
    const auto& dj = j.at("diagnostics");
    auto& d = r.diagnostics;
    d.relative_change = dj.at("relative_change").get<double>();
    d.exp_band = finite_or_inf(dj, "exp_band");
    d.exp_tail_mean = dj.at("exp_tail_mean").get<double>();
    d.d1_peak = dj.at("d1_peak").get<double>();
    d.tail_to_peak = dj.at("tail_to_peak").get<double>();
    d.alpha_fit = get_optional(dj, "alpha_fit");
    d.alpha_fit_alt = get_optional(dj, "alpha_fit_alt");
    d.r2_fit = get_optional(dj, "r2_fit");
    d.alpha_tail = get_optional(dj, "alpha_tail");
    return r;
}

ordered_json to_json(const RunManifest& m) {
    ordered_json j;
    j["format_version"] = m.format_version;
    j["spec"] = to_json(m.spec);
    j["derived"] = {{"dx", m.dx}, {"dt", m.dt}, {"lambda", m.lambda}, {"steps", m.steps}};
    ordered_json en;
    en["initial"] = m.energy_initial;
    en["final"] = m.energy_final;
    put_optional(en, "max_dissipation_residual", m.max_dissipation_residual);
    j["energy"] = en;
    j["report"] = to_json(m.report);
    j["wall_seconds"] = m.wall_seconds;
    j["files"] = {{"energy", m.energy_file},
                  {"initial_profile", m.initial_profile_file},
                  {"final_profile", m.final_profile_file}};
    j["comment"] = m.spec.comment;
    return j;
}

RunManifest manifest_from_json(const json& j) {
    try {
        RunManifest m;
        m.format_version = j.at("format_version").get<std::string>();
        if (m.format_version != kManifestFormatVersion)
            throw ValidationError("unsupported manifest format version '" + m.format_version + "'");
        m.spec = spec_from_json(j.at("spec"));
        const auto& d = j.at("derived");
        m.dx = d.at("dx").get<double>();
        m.dt = d.at("dt").get<double>();
        m.lambda = d.at("lambda").get<double>();
        m.steps = d.at("steps").get<long>();
        const auto& en = j.at("energy");
        m.energy_initial = en.at("initial").get<double>();
        m.energy_final = en.at("final").get<double>();
        m.max_dissipation_residual = get_optional(en, "max_dissipation_residual");
        m.report = report_from_json(j.at("report"));
        m.wall_seconds = j.value("wall_seconds", 0.0);
        const auto& f = j.at("files");
        m.energy_file = f.at("energy").get<std::string>();
        m.initial_profile_file = f.at("initial_profile").get<std::string>();
        m.final_profile_file = f.at("final_profile").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

namespace {
json read_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError(path, "cannot open file");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ValidationError("cannot parse " + path.string() + ": " + e.what());
    }
}
}  // namespace

ExperimentSpec load_experiment_spec(const fs::path& path) {
    const json j = read_json_file(path);
    // Accept a bare spec or a whole manifest.
    return spec_from_json(j.contains("spec") ? j.at("spec") : j);
}

RunManifest load_manifest(const fs::path& path) { return manifest_from_json(read_json_file(path)); }

void write_manifest(const RunManifest& m, const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(path, "cannot open manifest for writing");
    f << to_json(m).dump(2) << '\n';
    if (!f) throw IoError(path, "failed writing manifest");
}

}  // namespace waveduo
