#pragma once

#include "waveduo/analysis.hpp"
#include "waveduo/energy.hpp"
#include "waveduo/model.hpp"
#include "waveduo/scheme.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace waveduo {

/// File-system failure; the message names the path.
class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(what + ": " + path.string()), path_(path) {}
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// The per-step dissipation identity failed its tolerance.
class DissipationCheckError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kEnergyCsvHeader =
    "t,E,E_ku,E_pu,E_ky,E_py,neg_lnE_over_t,t_times_E,neg_lnE_over_lnt";
inline constexpr const char* kProfileCsvHeader = "x,u,y";
inline constexpr const char* kManifestFormatVersion = "1";
inline constexpr long kTargetEnergyRows = 10000;
/// |E^n - E^{n-1} + damping^n| <= kDissipationTolerance * max(E^0, 1).
inline constexpr double kDissipationTolerance = 1e-12;

struct ExperimentSpec {
    std::string name = "run";
    double a = 1.0;
    int N = 100;
    double T = 500.0;
    double cfl_factor = 1.0;
    std::string b_spec = "b1";
    std::string c_spec = "c1";
    std::string initial = "paper";
    std::optional<long> stride;  // empty: auto, about kTargetEnergyRows rows
    StepMode mode = StepMode::ClosedForm;
    bool check_dissipation = false;
    Summation summation = Summation::Plain;
    std::string comment;
    DecayThresholds thresholds;

    struct Elaborated {
        PhysicalConfig config;
        GridSpec grid;
        TimeSpec time;
        InitialData initial;
        long stride = 1;
    };

    /// Builds and validates every component object.
    Elaborated elaborate() const;
};

long auto_stride(long steps);

struct RunManifest {
    ExperimentSpec spec;  // stride resolved
    double dx = 0.0;
    double dt = 0.0;
    double lambda = 0.0;
    long steps = 0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    std::optional<double> max_dissipation_residual;
    DecayReport report;
    double wall_seconds = 0.0;
    std::string energy_file = "energy.csv";
    std::string initial_profile_file = "profile_initial.csv";
    std::string final_profile_file = "profile_final.csv";
    std::string format_version = kManifestFormatVersion;
};

/// Conservation, three same-speed cases, and the three a != 1 cases at
/// a = 2 and a = 0.5, long horizon plus T = 500 "-short" variants.
std::vector<ExperimentSpec> paper_catalog();

RunManifest run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

/// Writes energy.gp, exp_rate.gp, t_times_e.gp, exponent.gp, profile_final.gp.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& run_dir);

// Serialization ---------------------------------------------------------------

nlohmann::ordered_json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const DecayReport& report);
DecayReport report_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// Reads the (t, E) columns of an energy CSV. Malformed content raises
/// ValidationError naming the 1-based line number.
std::vector<EnergySample> read_energy_csv(const std::filesystem::path& path);

std::string_view to_string(StepMode m);
StepMode step_mode_from_string(std::string_view s);

}  // namespace waveduo
