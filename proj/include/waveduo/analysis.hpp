#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace waveduo {

struct EnergySample {
    double t = 0.0;
    double E = 0.0;
};

/// One energy sample with the three decay probes. A probe is absent where it
/// is undefined: -ln E / t needs t > 0 and E > 0, -ln E / ln t needs t > 1
/// and E > 0.
struct DiagnosticRow {
    double t = 0.0;
    double E = 0.0;
    std::optional<double> neg_ln_e_over_t;
    std::optional<double> t_times_e;
    std::optional<double> neg_ln_e_over_ln_t;
};

struct DecaySeries {
    std::vector<DiagnosticRow> rows;
};

DiagnosticRow diagnostic_row(double t, double E);
DecaySeries diagnostics(std::span<const EnergySample> samples);

struct PowerLawFit {
    double alpha = 0.0;  // minus the slope of ln E against ln t
    double r2 = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t samples_used = 0;
    bool degenerate = false;  // ln E has no spread, r2 carries no information
};

/// Least-squares line through (ln t, ln E) over the tail [w * t_max, t_max],
/// after resampling the tail uniformly in ln t. Empty when fewer than 10
/// usable samples (t > 1, E > 0) fall in the window.
std::optional<PowerLawFit> fit_polynomial_exponent(const DecaySeries& series, double window_fraction);

enum class DecayClass { Conserved, Exponential, Polynomial, Undetermined };
std::string_view to_string(DecayClass c);
std::optional<DecayClass> decay_class_from_string(std::string_view s);

/// How a polynomial exponent was obtained: the log-log slope, or the value of
/// -ln(E/E0)/ln t at the end of the horizon once -ln(E/E0)/t has collapsed
/// toward zero (the energy decays, but slower than any visible exponential).
enum class AlphaMethod { LogLogFit, TailReadout };
std::string_view to_string(AlphaMethod m);
std::optional<AlphaMethod> alpha_method_from_string(std::string_view s);

struct DecayThresholds {
    double conserved_rel = 1e-8;
    double exp_band = 0.15;
    double exp_window = 0.7;
    double collapse_ratio = 0.01;
    double poly_r2 = 0.98;
    double poly_stability = 0.10;
    double poly_window = 0.1;
    double poly_window_alt = 0.3;
};

struct DecayDiagnostics {
    double relative_change = 0.0;   // (E_last - E_first) / E_first
    double exp_band = 0.0;          // (max - min) / mean of -ln(E/E0)/t over the exponential window
    double exp_tail_mean = 0.0;
    double d1_peak = 0.0;           // max of -ln(E/E0)/t over the whole series
    double tail_to_peak = 0.0;
    std::optional<double> alpha_fit;
    std::optional<double> alpha_fit_alt;
    std::optional<double> r2_fit;
    std::optional<double> alpha_tail;
};

struct DecayReport {
    DecayClass classification = DecayClass::Undetermined;
    std::optional<double> alpha;
    std::optional<AlphaMethod> alpha_method;
    std::optional<double> exp_rate;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double r2 = 0.0;
    DecayDiagnostics diagnostics;

    /// e.g. "CLASS=Polynomial ALPHA=1.40 R2=0.998 METHOD=tail"
    std::string summary_line() const;
};

/// Decision order: Conserved, Exponential, Polynomial, otherwise Undetermined.
/// Every test works on E / E(first sample), so rescaling the series changes nothing.
DecayReport classify(const DecaySeries& series, const DecayThresholds& thresholds = {});

}  // namespace waveduo
