#include "waveduo/model.hpp"

#include "waveduo/format.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace waveduo {

GridSpec GridSpec::make(int interior_nodes) {
    if (interior_nodes < 2)
        throw ValidationError("grid needs at least 2 interior nodes, got " + std::to_string(interior_nodes));
    return {interior_nodes, 1.0 / (interior_nodes + 1)};
}

CoefficientProfile CoefficientProfile::make(std::vector<Interval> pieces, ProfileRole role) {
    for (const auto& p : pieces) {
        if (!(p.lo >= 0.0 && p.hi <= 1.0 && p.lo <= p.hi))
            throw ValidationError("interval [" + format_number(p.lo) + "," + format_number(p.hi) +
                                  "] must satisfy 0 <= lo <= hi <= 1");
        if (!std::isfinite(p.amplitude)) throw ValidationError("profile amplitude must be finite");
    }
    CoefficientProfile out;
    out.pieces_ = std::move(pieces);
    out.role_ = role;
    if (role == ProfileRole::Damping) {
        // A sum of indicators attains its minimum on some cell of the endpoint
        // partition; checking every endpoint and every cell midpoint is exhaustive.
        std::vector<double> cuts{0.0, 1.0};
        for (const auto& p : out.pieces_) {
            cuts.push_back(p.lo);
            cuts.push_back(p.hi);
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            if (out(cuts[i]) < 0.0 || (i + 1 < cuts.size() && out(0.5 * (cuts[i] + cuts[i + 1])) < 0.0))
                throw ValidationError("damping profile must be nonnegative on [0,1]");
        }
    }
    return out;
}

double CoefficientProfile::operator()(double x) const {
    double v = 0.0;
    for (const auto& p : pieces_)
        if (x >= p.lo && x <= p.hi) v += p.amplitude;
    return v;
}

bool CoefficientProfile::is_zero() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Interval& p) { return p.amplitude == 0.0; });
}

std::string CoefficientProfile::to_text() const {
    if (pieces_.empty()) return "zero";
    // The text syntax has one amplitude per profile; mixed amplitudes are
    // written as '+'-joined groups.
    std::string out;
    std::size_t i = 0;
    while (i < pieces_.size()) {
        if (!out.empty()) out += '+';
        out += "indicator:";
        const double amp = pieces_[i].amplitude;
        bool first = true;
        for (; i < pieces_.size() && pieces_[i].amplitude == amp; ++i) {
            if (!first) out += ',';
            first = false;
            out += format_number(pieces_[i].lo) + "-" + format_number(pieces_[i].hi);
        }
        out += "@" + format_number(amp);
    }
    return out;
}

std::string CoefficientProfile::describe() const {
    if (pieces_.empty()) return "0";
    std::string out;
    for (const auto& p : pieces_) {
        if (!out.empty()) out += " u ";
        out += "[" + format_number(p.lo) + "," + format_number(p.hi) + "]";
        if (p.amplitude != 1.0) out += "*" + format_number(p.amplitude);
    }
    return out;
}

CoefficientProfile CoefficientProfile::negated() const {
    CoefficientProfile out = *this;
    for (auto& p : out.pieces_) p.amplitude = -p.amplitude;
    return out;
}

namespace {

std::vector<Interval> catalog_support(int index) {
    switch (index) {
    case 1: return {};
    case 2: return {{0.0, 1.0, 1.0}};
    case 3: return {{0.1, 0.2, 1.0}, {0.8, 0.9, 1.0}};
    case 4: return {{0.1, 0.2, 1.0}};
    case 5: return {{0.4, 0.6, 1.0}};
    default: return {};
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<Interval> parse_indicator_group(std::string_view body, std::string_view whole) {
    double amplitude = 1.0;
    if (const auto at = body.find('@'); at != std::string_view::npos) {
        amplitude = parse_number(trim(body.substr(at + 1)), "profile amplitude");
        body = body.substr(0, at);
    }
    std::vector<Interval> out;
    for (auto part : split(body, ',')) {
        part = trim(part);
        // Allow a leading sign-free "lo-hi"; the dash after the first character separates.
        const auto dash = part.find('-', 1);
        if (part.empty() || dash == std::string_view::npos)
            throw ValidationError("malformed interval '" + std::string(part) + "' in profile '" + std::string(whole) + "'");
        out.push_back({parse_number(trim(part.substr(0, dash)), "interval bound"),
                       parse_number(trim(part.substr(dash + 1)), "interval bound"), amplitude});
    }
    return out;
}

}  // namespace

std::vector<std::string> named_case_list() {
    std::vector<std::string> out;
    for (char family : {'b', 'c'})
        for (int i = 1; i <= 5; ++i) out.push_back(std::string(1, family) + std::to_string(i));
    return out;
}

CoefficientProfile named_case(std::string_view name) {
    if (name.size() == 2 && (name[0] == 'b' || name[0] == 'c') && name[1] >= '1' && name[1] <= '5') {
        const auto role = name[0] == 'c' ? ProfileRole::Damping : ProfileRole::Coupling;
        return CoefficientProfile::make(catalog_support(name[1] - '0'), role);
    }
    std::string valid;
    for (const auto& n : named_case_list()) valid += (valid.empty() ? "" : ", ") + n;
    throw ValidationError("unknown coefficient case '" + std::string(name) + "'; valid names: " + valid);
}

CoefficientProfile parse_profile(std::string_view text, ProfileRole role) {
    text = trim(text);
    if (text == "zero" || text == "0") return CoefficientProfile::make({}, role);
    if (text.rfind("indicator:", 0) != 0) {
        auto p = named_case(text);
        // A catalog name is a support; its role comes from where it is used.
        return CoefficientProfile::make(p.pieces(), role);
    }
    std::vector<Interval> pieces;
    for (auto group : split(text, '+')) {
        group = trim(group);
        if (group.rfind("indicator:", 0) != 0)
            throw ValidationError("profile group '" + std::string(group) + "' must start with 'indicator:'");
        auto more = parse_indicator_group(group.substr(10), text);
        pieces.insert(pieces.end(), more.begin(), more.end());
    }
    return CoefficientProfile::make(std::move(pieces), role);
}

PhysicalConfig PhysicalConfig::make(double a, CoefficientProfile b, CoefficientProfile c) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("a must be a positive finite number");
    if (c.role() != ProfileRole::Damping) c = CoefficientProfile::make(c.pieces(), ProfileRole::Damping);
    return {a, std::move(b), std::move(c)};
}

InitialShape InitialShape::parabola(double scale) {
    InitialShape s;
    s.kind_ = Kind::Parabola;
    s.scale_ = scale;
    return s;
}

InitialShape InitialShape::sine(int mode, double scale) {
    if (mode < 1) throw ValidationError("sine mode must be >= 1");
    InitialShape s;
    s.kind_ = Kind::Sine;
    s.mode_ = mode;
    s.scale_ = scale;
    return s;
}

InitialShape InitialShape::table(std::vector<double> node_values) {
    InitialShape s;
    s.kind_ = Kind::Table;
    s.scale_ = 1.0;
    s.table_ = std::move(node_values);
    return s;
}

double InitialShape::operator()(double x) const {
    switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Parabola: return scale_ * x * (x - 1.0);
    case Kind::Sine: return scale_ * std::sin(mode_ * std::numbers::pi * x);
    case Kind::Table: break;
    }
    throw ValidationError("tabulated initial data has no pointwise value");
}

InitialShape InitialShape::scaled(double s) const {
    InitialShape out = *this;
    if (kind_ == Kind::Table)
        for (auto& v : out.table_) v *= s;
    else
        out.scale_ *= s;
    return out;
}

InitialShape InitialShape::parse(std::string_view text) {
    text = trim(text);
    double scale = 1.0;
    std::string_view head = text;
    if (text.rfind("table:", 0) != 0) {
        if (const auto at = text.find('@'); at != std::string_view::npos) {
            scale = parse_number(trim(text.substr(at + 1)), "initial-data scale");
            head = trim(text.substr(0, at));
        }
    }
    if (head == "zero") return zero();
    if (head == "parabola") return parabola(scale);
    if (head.rfind("sine:", 0) == 0) {
        const double k = parse_number(head.substr(5), "sine mode");
        if (k != std::floor(k)) throw ValidationError("sine mode must be an integer");
        return sine(static_cast<int>(k), scale);
    }
    if (head.rfind("table:", 0) == 0) {
        std::vector<double> values;
        for (auto part : split(head.substr(6), ',')) values.push_back(parse_number(trim(part), "table value"));
        return table(std::move(values));
    }
    throw ValidationError("unknown initial shape '" + std::string(text) +
                          "'; expected zero, parabola@s, sine:k@s or table:v0,...");
}

std::string InitialShape::to_text() const {
    switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Parabola: return "parabola@" + format_number(scale_);
    case Kind::Sine: return "sine:" + std::to_string(mode_) + "@" + format_number(scale_);
    case Kind::Table: {
        std::string out = "table:";
        for (std::size_t i = 0; i < table_.size(); ++i) out += (i ? "," : "") + format_number(table_[i]);
        return out;
    }
    }
    return "zero";
}

InitialData default_initial_data() {
    return {InitialShape::parabola(1.0), InitialShape::parabola(1.0), InitialShape::parabola(-1.0),
            InitialShape::parabola(-1.0)};
}

InitialData InitialData::parse(std::string_view text) {
    text = trim(text);
    if (text.empty() || text == "paper") return default_initial_data();
    const auto parts = split(text, ';');
    if (parts.size() != 4)
        throw ValidationError("initial data must be 'paper' or four shapes 'u0;u1;y0;y1'");
    InitialData d{InitialShape::parse(parts[0]), InitialShape::parse(parts[1]), InitialShape::parse(parts[2]),
                  InitialShape::parse(parts[3])};
    d.validate();
    return d;
}

void InitialData::validate() const {
    for (const InitialShape* s : {&u0, &y0}) {
        if (s->kind() == InitialShape::Kind::Table) {
            const auto& t = s->table_values();
            if (t.size() < 4 || t.front() != 0.0 || t.back() != 0.0)
                throw ValidationError("tabulated initial positions must vanish at x=0 and x=1");
        }
    }
}

std::string InitialData::to_text() const {
    if (*this == default_initial_data()) return "paper";
    return u0.to_text() + ";" + u1.to_text() + ";" + y0.to_text() + ";" + y1.to_text();
}

}  // namespace waveduo
