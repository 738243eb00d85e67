#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace waveduo {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Thrown for any input that violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform grid on [0,1] with N interior nodes: x_j = j*dx, j = 0 .. N+1.
struct GridSpec {
    int N = 0;
    double dx = 0.0;

    static GridSpec make(int interior_nodes);

    int size() const { return N + 2; }
    double node(int j) const { return j == N + 1 ? 1.0 : j * dx; }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double amplitude = 1.0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class ProfileRole { Coupling, Damping };

/// Finite sum of amplitude-weighted indicators of closed intervals.
/// Overlapping pieces add up; a node sitting exactly on an endpoint is inside.
class CoefficientProfile {
public:
    CoefficientProfile() = default;

    static CoefficientProfile make(std::vector<Interval> pieces, ProfileRole role = ProfileRole::Coupling);

    double operator()(double x) const;

    const std::vector<Interval>& pieces() const { return pieces_; }
    ProfileRole role() const { return role_; }
    bool is_zero() const;

    /// "indicator:0.1-0.2,0.8-0.9@1" form, or "zero" for the empty profile.
    std::string to_text() const;
    /// Human-readable support, e.g. "[0.1,0.2] u [0.8,0.9]".
    std::string describe() const;

    CoefficientProfile negated() const;

    friend bool operator==(const CoefficientProfile&, const CoefficientProfile&) = default;

private:
    std::vector<Interval> pieces_;
    ProfileRole role_ = ProfileRole::Coupling;
};

template <typename Scalar = double>
Vector<Scalar> sample_profile(const CoefficientProfile& profile, const GridSpec& grid) {
    Vector<Scalar> v(grid.size());
    for (int j = 0; j < grid.size(); ++j) v[j] = static_cast<Scalar>(profile(grid.node(j)));
    return v;
}

/// Catalog coefficients b1..b5 / c1..c5.
CoefficientProfile named_case(std::string_view name);
std::vector<std::string> named_case_list();

/// Accepts a catalog name ("b4") or "indicator:lo-hi[,lo-hi...][@amplitude]".
CoefficientProfile parse_profile(std::string_view text, ProfileRole role);

struct PhysicalConfig {
    double a = 1.0;
    CoefficientProfile b;
    CoefficientProfile c;

    static PhysicalConfig make(double a, CoefficientProfile b, CoefficientProfile c);
};

/// One closed-form initial profile: scale * x(x-1), scale * sin(k pi x), zero,
/// or tabulated node values (which must match the grid they are sampled on).
class InitialShape {
public:
    enum class Kind { Zero, Parabola, Sine, Table };

    static InitialShape zero() { return {}; }
    static InitialShape parabola(double scale);
    static InitialShape sine(int mode, double scale = 1.0);
    static InitialShape table(std::vector<double> node_values);

    /// "zero", "parabola@s", "sine:k@s", "table:v0,v1,...".
    static InitialShape parse(std::string_view text);
    std::string to_text() const;

    Kind kind() const { return kind_; }
    double scale() const { return scale_; }
    int mode() const { return mode_; }
    const std::vector<double>& table_values() const { return table_; }

    /// Pointwise value. Not defined for tables, which only exist at nodes.
    double operator()(double x) const;

    template <typename Scalar = double>
    Vector<Scalar> sample(const GridSpec& grid) const;

    InitialShape scaled(double s) const;

    friend bool operator==(const InitialShape&, const InitialShape&) = default;

private:
    Kind kind_ = Kind::Zero;
    double scale_ = 0.0;
    int mode_ = 0;
    std::vector<double> table_;
};

struct InitialData {
    InitialShape u0, u1, y0, y1;

    InitialData scaled(double s) const { return {u0.scaled(s), u1.scaled(s), y0.scaled(s), y1.scaled(s)}; }
    InitialData with_y_negated() const { return {u0, u1, y0.scaled(-1.0), y1.scaled(-1.0)}; }

    /// "paper", or four shapes "u0;u1;y0;y1".
    static InitialData parse(std::string_view text);
    /// Positions must be compatible with the Dirichlet boundary.
    void validate() const;
    std::string to_text() const;

    friend bool operator==(const InitialData&, const InitialData&) = default;
};

/// u0 = u1 = x(x-1), y0 = y1 = -x(x-1).
InitialData default_initial_data();

template <typename Scalar>
Vector<Scalar> InitialShape::sample(const GridSpec& grid) const {
    Vector<Scalar> v(grid.size());
    if (kind_ == Kind::Table) {
        if (static_cast<int>(table_.size()) != grid.size())
            throw ValidationError("tabulated initial data has " + std::to_string(table_.size()) +
                                  " values, grid needs " + std::to_string(grid.size()));
        for (int j = 0; j < grid.size(); ++j) v[j] = static_cast<Scalar>(table_[j]);
    } else {
        for (int j = 0; j < grid.size(); ++j) v[j] = static_cast<Scalar>((*this)(grid.node(j)));
    }
    // Dirichlet nodes; sin(k pi) is not exactly zero in floating point.
    v[0] = Scalar(0);
    v[grid.size() - 1] = Scalar(0);
    return v;
}

}  // namespace waveduo
