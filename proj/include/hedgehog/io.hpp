#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hedgehog/analysis.hpp"
#include "hedgehog/model.hpp"
#include "hedgehog/perturbation.hpp"
#include "hedgehog/profile.hpp"

namespace hedgehog::io {

inline constexpr const char* version = "1.0.0";

/// All floating-point output goes through one formatter: 17 significant
/// digits, which round-trips IEEE doubles exactly and is locale-independent.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

class JVal;
using JArr = std::vector<JVal>;
using JObj = std::vector<std::pair<std::string, JVal>>;

/// Minimal JSON value with insertion-ordered objects, so emitted documents
/// are byte-stable across runs and field order mirrors the docs.
class JVal {
public:
    std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, JArr, JObj> v;
    JVal() : v(nullptr) {}
    JVal(bool b) : v(b) {}
    JVal(int i) : v(static_cast<std::int64_t>(i)) {}
    JVal(std::int64_t i) : v(i) {}
    JVal(std::size_t n) : v(static_cast<std::int64_t>(n)) {}
    JVal(double d) : v(d) {}
    JVal(const char* s) : v(std::string(s)) {}
    JVal(std::string s) : v(std::move(s)) {}
    JVal(JArr a) : v(std::move(a)) {}
    JVal(JObj o) : v(std::move(o)) {}
};

namespace detail {

inline void escape_to(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void dump_to(const JVal& val, std::string& out, int depth) {
    const std::string pad(2 * depth, ' ');
    const std::string pad1(2 * (depth + 1), ' ');
    if (std::holds_alternative<std::nullptr_t>(val.v)) {
        out += "null";
    } else if (std::holds_alternative<bool>(val.v)) {
        out += std::get<bool>(val.v) ? "true" : "false";
    } else if (std::holds_alternative<std::int64_t>(val.v)) {
        out += std::to_string(std::get<std::int64_t>(val.v));
    } else if (std::holds_alternative<double>(val.v)) {
        const double d = std::get<double>(val.v);
        out += std::isfinite(d) ? fmt17(d) : "null";
    } else if (std::holds_alternative<std::string>(val.v)) {
        escape_to(std::get<std::string>(val.v), out);
    } else if (std::holds_alternative<JArr>(val.v)) {
        const JArr& a = std::get<JArr>(val.v);
        if (a.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < a.size(); ++i) {
            out += pad1;
            dump_to(a[i], out, depth + 1);
            if (i + 1 < a.size()) out += ',';
            out += '\n';
        }
        out += pad + ']';
    } else {
        const JObj& o = std::get<JObj>(val.v);
        if (o.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        for (std::size_t i = 0; i < o.size(); ++i) {
            out += pad1;
            escape_to(o[i].first, out);
            out += ": ";
            dump_to(o[i].second, out, depth + 1);
            if (i + 1 < o.size()) out += ',';
            out += '\n';
        }
        out += pad + '}';
    }
}

}  // namespace detail

inline std::string dump(const JVal& v) {
    std::string out;
    detail::dump_to(v, out, 0);
    out += '\n';
    return out;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hash_hex(std::string_view s) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(s)));
    return std::string(buf);
}

// ---- struct serializers ----

inline JObj to_json(const ModelParams& m) {
    return {{"t", m.t},
            {"h_plus", m.h_plus},
            {"lambda_t_sq", m.lambda_t_sq},
            {"C_t", m.C_t},
            {"farfield_coeff", m.farfield_coeff}};
}

inline JObj to_json(const ReducedGeometry& g) {
    return {{"xi", g.xi}, {"R_bar", g.R_bar}, {"R_tilde", g.R_tilde}};
}

inline JObj to_json(const Domain& d) {
    return {{"kind", d.kind == Domain::Kind::finite_ball ? "finite_ball" : "truncated_infinite"},
            {"radius", d.radius}};
}

inline JObj to_json(const SolverMeta& s) {
    return {{"method", s.method},
            {"integrator_rel_tol", s.integrator_rel_tol},
            {"integrator_abs_tol", s.integrator_abs_tol},
            {"bisection_tol", s.bisection_tol},
            {"bracket_width", s.bracket_width},
            {"bisection_iterations", s.bisection_iterations},
            {"scan_points", s.scan_points},
            {"launch_radius", s.launch_radius},
            {"series_order", s.series_order},
            {"series_truncation", s.series_truncation},
            {"event_margin", s.event_margin},
            {"tail_start", s.tail_start},
            {"tail_mismatch", s.tail_mismatch},
            {"boundary_residual", s.boundary_residual},
            {"boundary_layer", s.boundary_layer},
            {"root_candidates", s.root_candidates},
            {"total_steps", s.total_steps}};
}

inline JObj to_json(const ShotOutcome& s) {
    JObj o{{"class", to_string(s.cls)}, {"a2", s.a2}};
    if (s.witness_r)
        o.emplace_back("witness_r", *s.witness_r);
    else
        o.emplace_back("witness_r", nullptr);
    o.emplace_back("h_end", s.h_end);
    o.emplace_back("dh_end", s.dh_end);
    return o;
}

inline JObj to_json(const EnergyReport& e) {
    return {{"I_h", e.I_h},
            {"I_tensor", e.I_tensor},
            {"bound_3R", e.bound_3R},
            {"quadrature_error", e.quadrature_error}};
}

inline JObj to_json(const BoundCheck& b) {
    return {{"lower_ok", b.lower_ok},
            {"upper_ok", b.upper_ok},
            {"max_lower_violation", b.max_lower_violation},
            {"max_upper_violation", b.max_upper_violation},
            {"checked_range", JArr{b.checked_range.lo, b.checked_range.hi}},
            {"regime_warning", b.regime_warning}};
}

inline JObj to_json(const FarFieldFit& f) {
    return {{"coeff_empirical", f.coeff_empirical},
            {"coeff_closed_form", f.coeff_closed_form},
            {"window", JArr{f.window.lo, f.window.hi}},
            {"residual_d2h", f.residual_d2h},
            {"residual_dh", f.residual_dh},
            {"residual_alg", f.residual_alg}};
}

inline JObj to_json(const PerturbationReport& p) {
    return {{"delta_I_exact", p.delta_I_exact},
            {"delta_I_bound", p.delta_I_bound},
            {"quadratic_part", p.quadratic_part},
            {"quadrature_error", p.quadrature_error},
            {"verdict", p.verdict}};
}

inline JObj to_json(const StabilityVerdict& s) {
    return {{"R_threshold", s.R_threshold},
            {"R_threshold_real", s.R_threshold_real},
            {"stable", s.stable}};
}

/// Profile metadata sidecar (everything except the bulk arrays).
inline JObj profile_sidecar(const Profile& p) {
    return {{"a2", p.a2},
            {"t", p.t},
            {"domain", to_json(p.domain)},
            {"grid_points", p.grid.size()},
            {"solver_meta", to_json(p.solver_meta)}};
}

/// Provenance block embedded in every output document.
inline JObj provenance(const std::string& config_hash, const JObj& tolerances) {
    return {{"version", version}, {"config_hash", config_hash}, {"tolerances", tolerances}};
}

namespace detail {

inline std::string flat_value(const JVal& v) {
    if (std::holds_alternative<double>(v.v)) return fmt17(std::get<double>(v.v));
    if (std::holds_alternative<std::int64_t>(v.v))
        return std::to_string(std::get<std::int64_t>(v.v));
    if (std::holds_alternative<bool>(v.v)) return std::get<bool>(v.v) ? "true" : "false";
    if (std::holds_alternative<std::string>(v.v)) return std::get<std::string>(v.v);
    return "";
}

inline void write_provenance_comments(std::ostream& os, const JObj& prov) {
    for (const auto& [k, v] : prov) {
        if (std::holds_alternative<JObj>(v.v)) {
            for (const auto& [k2, v2] : std::get<JObj>(v.v))
                os << "# " << k << "." << k2 << " = " << flat_value(v2) << "\n";
        } else {
            os << "# " << k << " = " << flat_value(v) << "\n";
        }
    }
}

}  // namespace detail

/// CSV profile: provenance as '#' comment lines, then r,h,dh rows.
/// Comma delimiter, '.' decimal point, 17 significant digits.
inline void write_profile_csv(std::ostream& os, const Profile& p, const JObj& prov) {
    detail::write_provenance_comments(os, prov);
    os << "# a2 = " << fmt17(p.a2) << "\n";
    os << "# t = " << fmt17(p.t) << "\n";
    os << "r,h,dh\n";
    for (std::size_t i = 0; i < p.grid.size(); ++i)
        os << fmt17(p.grid[i]) << ',' << fmt17(p.h[i]) << ',' << fmt17(p.dh[i]) << "\n";
}

/// CSV stability map: t, R, threshold_flag (1 = below the closed-form
/// threshold), delta_sign (-1 instability witnessed, +1 nonnegative,
/// 0 cell failed).
inline void write_map_csv(std::ostream& os, const std::vector<MapCell>& cells,
                          const JObj& prov) {
    detail::write_provenance_comments(os, prov);
    os << "t,R,threshold_flag,delta_sign\n";
    for (const MapCell& c : cells) {
        const bool failed = c.status.rfind("solver-failure", 0) == 0;
        os << fmt17(c.t) << ',' << fmt17(c.R) << ',' << (c.below_threshold ? 1 : 0) << ','
           << (failed ? 0 : c.delta_sign) << "\n";
    }
}

}  // namespace hedgehog::io
