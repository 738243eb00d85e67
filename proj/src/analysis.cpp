#include "waveduo/analysis.hpp"

#include "waveduo/model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace waveduo {

namespace {

constexpr std::size_t kMinFitSamples = 10;
constexpr Eigen::Index kResampleCount = 256;
constexpr std::size_t kMinBandSamples = 3;

}  // namespace

DiagnosticRow diagnostic_row(double t, double E) {
    DiagnosticRow r{t, E, {}, t * E, {}};
    if (E > 0.0) {
        const double ln_e = std::log(E);
        if (t > 0.0) r.neg_ln_e_over_t = -ln_e / t;
        if (t > 1.0) r.neg_ln_e_over_ln_t = -ln_e / std::log(t);
    }
    return r;
}

DecaySeries diagnostics(std::span<const EnergySample> samples) {
    if (samples.empty()) throw ValidationError("decay diagnostics need at least one sample");
    DecaySeries out;
    out.rows.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (i > 0 && !(s.t > samples[i - 1].t))
            throw ValidationError("sample times must be strictly increasing (row " + std::to_string(i) + ")");
        out.rows.push_back(diagnostic_row(s.t, s.E));
    }
    return out;
}

std::optional<PowerLawFit> fit_polynomial_exponent(const DecaySeries& series, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction < 1.0))
        throw ValidationError("fit window fraction must lie in (0, 1)");
    if (series.rows.empty()) return std::nullopt;
    const double t_max = series.rows.back().t;

    std::vector<double> log_t, log_e;
    for (const auto& r : series.rows) {
        if (r.t >= window_fraction * t_max && r.t > 1.0 && r.E > 0.0) {
            log_t.push_back(std::log(r.t));
            log_e.push_back(std::log(r.E));
        }
    }
    if (log_t.size() < kMinFitSamples || log_t.front() == log_t.back()) return std::nullopt;

    // Piecewise-linear interpolation of ln E on a uniform ln t grid.
    Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(kResampleCount, log_t.front(), log_t.back());
    Eigen::ArrayXd y(kResampleCount);
    std::size_t seg = 0;
    for (Eigen::Index k = 0; k < kResampleCount; ++k) {
        while (seg + 2 < log_t.size() && log_t[seg + 1] < x[k]) ++seg;
        const double x0 = log_t[seg], x1 = log_t[seg + 1];
        const double w = std::clamp((x[k] - x0) / (x1 - x0), 0.0, 1.0);
        y[k] = log_e[seg] + w * (log_e[seg + 1] - log_e[seg]);
    }

    const Eigen::ArrayXd xc = x - x.mean();
    const Eigen::ArrayXd yc = y - y.mean();
    const double sxx = xc.square().sum();
    const double slope = (xc * yc).sum() / sxx;
    const double ss_tot = yc.square().sum();
    const double ss_res = (yc - slope * xc).square().sum();

    PowerLawFit fit;
    fit.alpha = -slope;
    fit.t_lo = std::exp(log_t.front());
    fit.t_hi = std::exp(log_t.back());
    fit.samples_used = log_t.size();
    // Relative to the magnitude of ln E, a spread this small is rounding noise.
    const double scale = std::max(1.0, y.abs().maxCoeff());
    if (ss_tot <= 1e-24 * scale * scale * static_cast<double>(kResampleCount)) {
        fit.degenerate = true;
        fit.alpha = 0.0;
        fit.r2 = 1.0;
    } else {
        fit.r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    }
    return fit;
}

std::string_view to_string(DecayClass c) {
    switch (c) {
    case DecayClass::Conserved: return "Conserved";
    case DecayClass::Exponential: return "Exponential";
    case DecayClass::Polynomial: return "Polynomial";
    case DecayClass::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::optional<DecayClass> decay_class_from_string(std::string_view s) {
    for (auto c : {DecayClass::Conserved, DecayClass::Exponential, DecayClass::Polynomial, DecayClass::Undetermined})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::string_view to_string(AlphaMethod m) { return m == AlphaMethod::LogLogFit ? "fit" : "tail"; }

std::optional<AlphaMethod> alpha_method_from_string(std::string_view s) {
    if (s == "fit") return AlphaMethod::LogLogFit;
    if (s == "tail") return AlphaMethod::TailReadout;
    return std::nullopt;
}

std::string DecayReport::summary_line() const {
    char buf[160];
    std::string out = "CLASS=" + std::string(to_string(classification));
    if (alpha) {
        std::snprintf(buf, sizeof buf, " ALPHA=%.2f", *alpha);
        out += buf;
    }
    if (exp_rate) {
        std::snprintf(buf, sizeof buf, " RATE=%.4g", *exp_rate);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, " R2=%.3f", r2);
    out += buf;
    if (alpha_method) out += " METHOD=" + std::string(to_string(*alpha_method));
    return out;
}

DecayReport classify(const DecaySeries& series, const DecayThresholds& th) {
    DecayReport rep;
    if (series.rows.empty()) return rep;
    const auto& first = series.rows.front();
    const auto& last = series.rows.back();
    rep.t_lo = first.t;
    rep.t_hi = last.t;

    auto& diag = rep.diagnostics;
    const double e0 = first.E;
    diag.relative_change = e0 > 0.0 ? (last.E - e0) / e0 : 0.0;
    if (std::abs(last.E - e0) <= th.conserved_rel * e0) {
        rep.classification = DecayClass::Conserved;
        return rep;
    }
    if (!(e0 > 0.0) || series.rows.size() < 2) return rep;

    // -ln(E/E0)/t, the exponential-rate probe on the normalized energy.
    const double t_max = last.t;
    double peak = -INFINITY;
    double band_min = INFINITY, band_max = -INFINITY, band_sum = 0.0;
    std::size_t band_count = 0;
    for (const auto& r : series.rows) {
        if (!(r.t > 0.0) || !(r.E > 0.0)) continue;
        const double d1 = -std::log(r.E / e0) / r.t;
        peak = std::max(peak, d1);
        if (r.t >= th.exp_window * t_max) {
            band_min = std::min(band_min, d1);
            band_max = std::max(band_max, d1);
            band_sum += d1;
            ++band_count;
        }
    }

    const auto fit = fit_polynomial_exponent(series, th.poly_window);
    const auto fit_alt = fit_polynomial_exponent(series, th.poly_window_alt);
    if (fit) {
        diag.alpha_fit = fit->alpha;
        diag.r2_fit = fit->r2;
        rep.r2 = fit->r2;
    }
    if (fit_alt) diag.alpha_fit_alt = fit_alt->alpha;

    bool collapsed = false;
    if (band_count >= kMinBandSamples) {
        const double mean = band_sum / static_cast<double>(band_count);
        diag.exp_tail_mean = mean;
        diag.exp_band = mean != 0.0 ? (band_max - band_min) / std::abs(mean) : INFINITY;
        diag.d1_peak = peak;
        diag.tail_to_peak = peak > 0.0 ? mean / peak : 0.0;
        collapsed = peak > 0.0 && diag.tail_to_peak < th.collapse_ratio;
        if (mean > 0.0 && diag.exp_band <= th.exp_band && !collapsed) {
            rep.classification = DecayClass::Exponential;
            rep.exp_rate = mean;
            rep.t_lo = th.exp_window * t_max;
            return rep;
        }
    }

    if (fit && fit_alt && !fit->degenerate && fit->r2 >= th.poly_r2 && fit->alpha > 0.0 &&
        std::abs(fit->alpha - fit_alt->alpha) <= th.poly_stability * fit->alpha) {
        rep.classification = DecayClass::Polynomial;
        rep.alpha = fit->alpha;
        rep.alpha_method = AlphaMethod::LogLogFit;
        rep.t_lo = fit->t_lo;
        rep.t_hi = fit->t_hi;
        return rep;
    }

    if (t_max > 1.0 && last.E > 0.0 && last.E < e0) {
        diag.alpha_tail = -std::log(last.E / e0) / std::log(t_max);
        if (collapsed && *diag.alpha_tail > 0.0) {
            rep.classification = DecayClass::Polynomial;
            rep.alpha = diag.alpha_tail;
            rep.alpha_method = AlphaMethod::TailReadout;
            rep.t_lo = th.exp_window * t_max;
            return rep;
        }
    }
    return rep;
}

}  // namespace waveduo
