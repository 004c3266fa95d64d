// Batch command-line surface: JSON config ingestion and validation,
// computation dispatch, and deterministic CSV / JSON / SVG emission.
//
// Exit codes: 0 success, 2 config/schema violation (nothing is written),
// 3 computation error (nothing is written).  All output files are buffered
// and flushed only after the computation succeeds.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uniformizer.hpp"

namespace uniformizer::cli {

using nlohmann::json;

inline constexpr const char* version_string = "0.1.0";

// Convention strings embedded in every CSV header row: conventions are data.
inline constexpr const char* lambda_tag = "lambda[1/(1-|z|^2)]";
inline constexpr const char* length_tag = "length[curvature=-1]";
inline constexpr const char* area_tag = "area[curvature=-1]";
inline constexpr const char* weight_tag = "weight[euclidean_area]";

// A config that fails validation; reported with exit code 2 before any
// computation starts.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// config access: every read is type/range checked and echoed, so the emitted
// report always shows the full effective configuration including defaults.

namespace detail {

inline const json* find(const json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline cplx parse_complex(const json& v, const std::string& what) {
    if (v.is_number()) return cplx(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return cplx(v[0].get<double>(), v[1].get<double>());
    throw SchemaError(what + ": expected a number or [re, im]");
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

} // namespace detail

class Cfg {
public:
    Cfg(const json& in, std::string scope) : in_(in), scope_(std::move(scope)) {
        if (!in.is_object()) throw SchemaError(scope_ + ": expected an object");
    }

    bool has(const std::string& key) const { return detail::find(in_, key) != nullptr; }

    double num(const std::string& key, std::optional<double> fallback, double lo, double hi) {
        const json* v = detail::find(in_, key);
        if (!v) {
            if (!fallback) throw SchemaError(path(key) + ": required");
            echo_[key] = *fallback;
            return *fallback;
        }
        if (!v->is_number()) throw SchemaError(path(key) + ": expected a number");
        double x = v->get<double>();
        if (!(x >= lo && x <= hi))
            throw SchemaError(path(key) + ": value " + std::to_string(x) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        echo_[key] = x;
        return x;
    }

    long integer(const std::string& key, std::optional<long> fallback, long lo, long hi) {
        const json* v = detail::find(in_, key);
        if (!v) {
            if (!fallback) throw SchemaError(path(key) + ": required");
            echo_[key] = *fallback;
            return *fallback;
        }
        if (!v->is_number_integer()) throw SchemaError(path(key) + ": expected an integer");
        long x = v->get<long>();
        if (x < lo || x > hi)
            throw SchemaError(path(key) + ": value " + std::to_string(x) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        echo_[key] = x;
        return x;
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = detail::find(in_, key);
        if (!v) {
            echo_[key] = fallback;
            return fallback;
        }
        if (!v->is_boolean()) throw SchemaError(path(key) + ": expected a boolean");
        echo_[key] = v->get<bool>();
        return v->get<bool>();
    }

    std::string str(const std::string& key, std::optional<std::string> fallback) {
        const json* v = detail::find(in_, key);
        if (!v) {
            if (!fallback) throw SchemaError(path(key) + ": required");
            echo_[key] = *fallback;
            return *fallback;
        }
        if (!v->is_string()) throw SchemaError(path(key) + ": expected a string");
        echo_[key] = v->get<std::string>();
        return v->get<std::string>();
    }

    cplx complex_value(const std::string& key, std::optional<cplx> fallback,
                       double max_abs = 1e12) {
        const json* v = detail::find(in_, key);
        cplx z;
        if (!v) {
            if (!fallback) throw SchemaError(path(key) + ": required");
            z = *fallback;
        } else {
            z = detail::parse_complex(*v, path(key));
        }
        if (!(std::abs(z) <= max_abs)) throw SchemaError(path(key) + ": magnitude too large");
        echo_[key] = detail::complex_json(z);
        return z;
    }

    std::vector<cplx> complex_list(const std::string& key, bool required,
                                   std::size_t min_len, std::size_t max_len) {
        const json* v = detail::find(in_, key);
        if (!v) {
            if (required) throw SchemaError(path(key) + ": required");
            echo_[key] = json::array();
            return {};
        }
        if (!v->is_array()) throw SchemaError(path(key) + ": expected an array");
        if (v->size() < min_len || v->size() > max_len)
            throw SchemaError(path(key) + ": expected between " + std::to_string(min_len) +
                              " and " + std::to_string(max_len) + " entries");
        std::vector<cplx> out;
        json echo = json::array();
        for (std::size_t i = 0; i < v->size(); ++i) {
            cplx z = detail::parse_complex((*v)[i], path(key) + "[" + std::to_string(i) + "]");
            out.push_back(z);
            echo.push_back(detail::complex_json(z));
        }
        echo_[key] = echo;
        return out;
    }

    // list of polynomials, each a nonempty list of complex coefficients
    std::vector<std::vector<cplx>> seeds(const std::string& key, std::size_t min_polys,
                                         std::size_t max_polys, std::size_t max_deg = 32,
                                         std::optional<std::vector<std::vector<cplx>>>
                                             fallback = std::nullopt) {
        const json* v = detail::find(in_, key);
        std::vector<std::vector<cplx>> out;
        if (!v) {
            if (!fallback) throw SchemaError(path(key) + ": required");
            out = *fallback;
        } else {
            if (!v->is_array()) throw SchemaError(path(key) + ": expected an array of polynomials");
            for (std::size_t i = 0; i < v->size(); ++i) {
                const json& p = (*v)[i];
                std::string what = path(key) + "[" + std::to_string(i) + "]";
                if (!p.is_array() || p.empty())
                    throw SchemaError(what + ": expected a nonempty coefficient array");
                if (p.size() > max_deg + 1) throw SchemaError(what + ": polynomial degree too large");
                std::vector<cplx> coeffs;
                for (std::size_t k = 0; k < p.size(); ++k)
                    coeffs.push_back(detail::parse_complex(p[k], what + "[" + std::to_string(k) + "]"));
                out.push_back(std::move(coeffs));
            }
        }
        if (out.size() < min_polys || out.size() > max_polys)
            throw SchemaError(path(key) + ": expected between " + std::to_string(min_polys) +
                              " and " + std::to_string(max_polys) + " polynomials");
        json echo = json::array();
        for (const auto& p : out) {
            json pe = json::array();
            for (cplx c : p) pe.push_back(detail::complex_json(c));
            echo.push_back(pe);
        }
        echo_[key] = echo;
        return out;
    }

    Cfg sub(const std::string& key) {
        const json* v = detail::find(in_, key);
        static const json empty = json::object();
        return Cfg(v ? *v : empty, path(key));
    }

    const json& raw(const std::string& key) const {
        const json* v = detail::find(in_, key);
        if (!v) throw SchemaError(path(key) + ": required");
        return *v;
    }

    void adopt(const std::string& key, Cfg& child) { echo_[key] = child.echo_; }
    void note(const std::string& key, json value) { echo_[key] = std::move(value); }
    const json& echo() const { return echo_; }

private:
    std::string path(const std::string& key) const {
        return scope_.empty() ? key : scope_ + "." + key;
    }
    const json& in_;
    std::string scope_;
    json echo_ = json::object();
};

// ---------------------------------------------------------------------------
// deterministic CSV (RFC-4180: CRLF-free LF rows, quoting only when needed,
// complex numbers as two columns)

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

class CsvWriter {
public:
    CsvWriter& field(const std::string& s) {
        sep();
        bool quote = s.find_first_of(",\"\n\r") != std::string::npos;
        if (!quote) {
            buf_ += s;
        } else {
            buf_ += '"';
            for (char ch : s) {
                if (ch == '"') buf_ += '"';
                buf_ += ch;
            }
            buf_ += '"';
        }
        return *this;
    }
    CsvWriter& field(const char* s) { return field(std::string(s)); }
    CsvWriter& field(double v) { sep(); buf_ += detail::fmt(v); return *this; }
    CsvWriter& field(long v) { sep(); buf_ += std::to_string(v); return *this; }
    CsvWriter& field(int v) { return field(static_cast<long>(v)); }
    CsvWriter& field(bool v) { sep(); buf_ += v ? "1" : "0"; return *this; }
    CsvWriter& field(cplx z) { field(z.real()); return field(z.imag()); }
    void end_row() { buf_ += '\n'; row_open_ = false; }
    const std::string& str() const { return buf_; }

private:
    void sep() {
        if (row_open_) buf_ += ',';
        row_open_ = true;
    }
    std::string buf_;
    bool row_open_ = false;
};

// ---------------------------------------------------------------------------
// SVG point clouds: plain elements, view box [-1.05, 1.05]^2, boundary circle

inline std::string svg_point_cloud(const std::vector<cplx>& pts, double point_radius = 0.005,
                                   const std::string& color = "#1f6feb") {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.05 -1.05 2.1 2.1\">\n";
    s += "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#000000\" "
         "stroke-width=\"0.004\"/>\n";
    for (cplx z : pts) {
        // mathematical orientation: SVG y runs downward, so flip the sign
        s += "<circle cx=\"" + detail::fmt(z.real()) + "\" cy=\"" + detail::fmt(-z.imag()) +
             "\" r=\"" + detail::fmt(point_radius) + "\" fill=\"" + color + "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

// ---------------------------------------------------------------------------
// shared builders

namespace detail {

inline std::string word_text(const Word& w) {
    std::string s;
    for (int letter : w) {
        int idx = std::abs(letter) - 1;
        if (idx >= 26) return "(word beyond letter range)";
        s += static_cast<char>((letter > 0 ? 'a' : 'A') + idx);
    }
    return s;
}

inline GroupPresentation build_group(Cfg& c) {
    Cfg g = c.sub("group");
    std::string kind = g.str("kind", std::nullopt);
    GroupPresentation out;
    if (kind == "trivial") {
        out = trivial_group();
    } else if (kind == "torus") {
        double x = g.num("x", 3.0, std::nextafter(2.0, 3.0), 1e6);
        double y = g.num("y", 3.0, std::nextafter(2.0, 3.0), 1e6);
        out = punctured_torus_group(x, y);
    } else if (kind == "pinch") {
        double u = g.num("u", std::nullopt, 1e-12, 1.0);
        out = pinch_path(u);
    } else if (kind == "generators") {
        const json& mats = g.raw("matrices");
        if (!mats.is_array() || mats.empty() || mats.size() > 26)
            throw SchemaError("group.matrices: expected 1..26 generator matrices");
        json echo = json::array();
        for (std::size_t i = 0; i < mats.size(); ++i) {
            std::string what = "group.matrices[" + std::to_string(i) + "]";
            Cfg m(mats[i], what);
            cplx a = m.complex_value("a", std::nullopt);
            cplx b = m.complex_value("b", std::nullopt);
            cplx cc = m.complex_value("c", std::nullopt);
            cplx d = m.complex_value("d", std::nullopt);
            if (std::abs(a * d - b * cc) < 1e-14)
                throw SchemaError(what + ": matrix is singular");
            out.generators.push_back(make_moebius(a, b, cc, d));
            echo.push_back(m.echo());
        }
        g.note("matrices", echo);
        long surface_genus = g.integer("surface_genus", 0, 0, 64);
        out.genus = static_cast<int>(g.integer("genus", surface_genus, 0, 64));
        out.punctures = static_cast<int>(g.integer("punctures", 0, 0, 1024));
        out.kind = surface_genus > 0 ? GroupKind::surface_genus : GroupKind::free_rank;
        if (surface_genus > 0) out.genus = static_cast<int>(surface_genus);
        out.basepoint = g.complex_value("basepoint", cplx{0.0, 0.0}, 0.999);
        validate_presentation(out);
    } else {
        throw SchemaError("group.kind: expected one of trivial|torus|pinch|generators");
    }
    c.adopt("group", g);
    return out;
}

struct DiscSpec {
    bool monte_carlo = false;
    int radial = 120;
    int angular = 128;
    double pitch = default_radial_pitch;
    long samples = 200000;
};

inline DiscSpec read_disc_spec(Cfg& c, const std::string& key = "quadrature") {
    Cfg q = c.sub(key);
    DiscSpec spec;
    std::string mode = q.str("mode", "grid");
    if (mode != "grid" && mode != "monte-carlo")
        throw SchemaError(key + ".mode: expected grid or monte-carlo");
    spec.monte_carlo = mode == "monte-carlo";
    spec.radial = static_cast<int>(q.integer("radial", 120, 8, 4000));
    spec.angular = static_cast<int>(q.integer("angular", 128, 8, 4000));
    spec.pitch = q.num("pitch", default_radial_pitch, 1e-4, 0.5);
    spec.samples = q.integer("samples", 200000, 100, 100000000);
    c.adopt(key, q);
    return spec;
}

inline QuadratureDomain build_disc(const DiscSpec& spec, std::optional<unsigned long> seed) {
    if (spec.monte_carlo) return monte_carlo_grid(static_cast<int>(spec.samples), seed.value_or(1));
    return disc_grid(spec.radial, spec.angular, spec.pitch);
}

struct DomainSpec {
    int radial = 96;
    int angular = 192;
    double cusp_cutoff = 0.005;
};

inline DomainSpec read_domain_spec(Cfg& c, const std::string& key = "domain",
                                   int radial_def = 96, int angular_def = 192,
                                   double cutoff_def = 0.005) {
    Cfg d = c.sub(key);
    DomainSpec spec;
    spec.radial = static_cast<int>(d.integer("radial", radial_def, 16, 4000));
    spec.angular = static_cast<int>(d.integer("angular", angular_def, 16, 4000));
    spec.cusp_cutoff = d.num("cusp_cutoff", cutoff_def, 1e-9, 0.999);
    c.adopt(key, d);
    return spec;
}

// canonical factor, optionally multiplied by a flat factor given on the
// generators ("flat_values"); the combined factor must still be an s-factor,
// which validate_form enforces downstream.
inline std::shared_ptr<AutomorphyFactor> build_factor(Cfg& c, std::shared_ptr<GroupPresentation> gp,
                                                      double s) {
    auto canon = canonical_factor(gp, s);
    if (!c.has("flat_values")) {
        c.note("flat_values", json::array());
        return std::make_shared<AutomorphyFactor>(std::move(canon));
    }
    std::vector<cplx> values =
        c.complex_list("flat_values", false, gp->generators.size(), gp->generators.size());
    auto flat = flat_factor(gp, values);
    return std::make_shared<AutomorphyFactor>(factor_product(canon, flat));
}

inline json value_error(double v, double e) { return json{{"value", v}, {"error", e}}; }
inline json value_error(cplx v, double e) {
    return json{{"value", complex_json(v)}, {"error", e}};
}

// deterministic interior sample points on a golden-angle spiral
inline std::vector<cplx> spiral_points(int n, double rmax) {
    std::vector<cplx> pts;
    const double golden = 2.39996322972865332; // 2 pi (1 - 1/phi)
    for (int k = 0; k < n; ++k) {
        double r = rmax * std::sqrt((k + 0.5) / n);
        double th = golden * k;
        pts.emplace_back(r * std::cos(th), r * std::sin(th));
    }
    return pts;
}

} // namespace detail

// ---------------------------------------------------------------------------
// one command's buffered artifacts

struct Artifacts {
    json results = json::object();
    std::string csv;
    std::optional<std::pair<std::string, std::string>> svg; // filename, content
};

struct RunOptions {
    std::string command; // may be empty: taken from config["command"]
    json config;
    std::filesystem::path out_dir = ".";
    std::optional<unsigned long> seed;
};

// ---------------------------------------------------------------------------
// command handlers

namespace handlers {

inline Artifacts orbit(Cfg& c, const RunOptions& opt) {
    GroupPresentation gp = detail::build_group(c);
    int L = static_cast<int>(c.integer("word_length", 6, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    cplx z0 = c.complex_value("z0", cplx{0.0, 0.0}, 0.999999);
    bool want_svg = c.boolean("svg", true);
    (void)opt;

    EnumeratedGroup e = enumerate_elements(gp, L, static_cast<std::size_t>(cap));
    std::vector<cplx> pts = orbit(e, z0);

    CsvWriter csv;
    csv.field("word").field("re").field("im").field(lambda_tag);
    csv.end_row();
    double max_abs = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        csv.field(detail::word_text(e.words[i])).field(pts[i].real()).field(pts[i].imag());
        csv.field(poincare_density(pts[i]));
        csv.end_row();
        max_abs = std::max(max_abs, std::abs(pts[i]));
    }

    Artifacts a;
    a.results["count"] = pts.size();
    a.results["max_abs"] = detail::value_error(max_abs, 0.0);
    a.csv = csv.str();
    if (want_svg) a.svg = {"orbit.svg", svg_point_cloud(pts)};
    return a;
}

inline Artifacts limit_set(Cfg& c, const RunOptions& opt) {
    GroupPresentation gp = detail::build_group(c);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    bool want_svg = c.boolean("svg", true);
    (void)opt;

    EnumeratedGroup e = enumerate_elements(gp, L, static_cast<std::size_t>(cap));
    std::vector<cplx> pts = limit_set_sample(e);
    // limit points lie on the unit circle: count distinct angles
    std::vector<double> angles;
    angles.reserve(pts.size());
    for (cplx z : pts) angles.push_back(std::arg(z));
    std::sort(angles.begin(), angles.end());
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < angles.size(); ++i)
        if (i == 0 || angles[i] - angles[i - 1] > 1e-9) ++distinct;
    if (distinct > 1 && (angles.back() - angles.front()) > 2.0 * pi - 1e-9) --distinct;

    CsvWriter csv;
    csv.field("re").field("im").field("abs[unit_circle]");
    csv.end_row();
    for (cplx z : pts) {
        csv.field(z.real()).field(z.imag()).field(std::abs(z));
        csv.end_row();
    }

    Artifacts a;
    a.results["count"] = pts.size();
    a.results["distinct_count"] = distinct;
    a.csv = csv.str();
    if (want_svg) a.svg = {"limit-set.svg", svg_point_cloud(pts, 0.004, "#d62728")};
    return a;
}

inline Artifacts fundamental_domain(Cfg& c, const RunOptions& opt) {
    GroupPresentation gp = detail::build_group(c);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    detail::DomainSpec ds = detail::read_domain_spec(c);
    bool want_svg = c.boolean("svg", true);
    (void)opt;

    EnumeratedGroup e = enumerate_elements(gp, L, static_cast<std::size_t>(cap));
    QuadratureDomain dom = fundamental_domain_grid(e, ds.radial, ds.angular, ds.cusp_cutoff);

    CsvWriter csv;
    csv.field("re").field("im").field(weight_tag).field(lambda_tag);
    csv.end_row();
    for (std::size_t i = 0; i < dom.nodes.size(); ++i) {
        csv.field(dom.nodes[i].real()).field(dom.nodes[i].imag());
        csv.field(dom.weights[i]).field(dom.lambda[i]);
        csv.end_row();
    }

    auto lambda2_mass = [](const QuadratureDomain& q) {
        double m = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i)
            m += q.weights[i] * q.lambda[i] * q.lambda[i];
        return m;
    };
    double mass = lambda2_mass(dom);
    double mass_err = dom.coarse ? std::abs(mass - lambda2_mass(*dom.coarse)) : 0.0;

    Artifacts a;
    a.results["node_count"] = dom.nodes.size();
    a.results["total_weight"] = detail::value_error(dom.total_weight(), 0.0);
    a.results["lambda2_mass"] = detail::value_error(mass, mass_err);
    a.results["excluded_mass_bound"] = dom.excluded_mass_bound;
    a.results["tail_note"] = dom.tail_note;
    SurfaceType t{gp.genus, gp.punctures};
    if (is_stable(t))
        a.results["lambda2_mass_reference"] = hyperbolic_area(t) / 4.0; // curvature bridge
    a.csv = csv.str();
    if (want_svg) a.svg = {"fundamental-domain.svg", svg_point_cloud(dom.nodes, 0.003, "#2ca02c")};
    return a;
}

inline Artifacts theta_eval(Cfg& c, const RunOptions& opt) {
    auto gp = std::make_shared<GroupPresentation>(detail::build_group(c));
    double s = c.num("s", 2.0, 2.0, 50.0);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    std::vector<cplx> seed = c.complex_list("seed", true, 1, 33);
    std::vector<cplx> points = c.complex_list("points", true, 1, 10000);
    (void)opt;

    FormSpec f;
    f.seed = seed;
    f.enumeration = std::make_shared<EnumeratedGroup>(
        enumerate_elements(*gp, L, static_cast<std::size_t>(cap)));
    f.factor = detail::build_factor(c, gp, s);
    f.s = s;

    CsvWriter csv;
    csv.field("z_re").field("z_im").field(lambda_tag).field("theta_re").field("theta_im");
    csv.field("tail_estimate").field("converged");
    csv.end_row();
    json values = json::array();
    double max_tail = 0.0;
    bool all_conv = true;
    for (cplx z : points) {
        if (abs2(z) >= 1.0) throw SchemaError("points: every point must lie in the open unit disc");
        ThetaValue tv = theta_series(f, z);
        csv.field(z.real()).field(z.imag()).field(poincare_density(z));
        csv.field(tv.value.real()).field(tv.value.imag());
        csv.field(tv.tail_estimate).field(tv.converged);
        csv.end_row();
        values.push_back({{"z", detail::complex_json(z)},
                          {"value", detail::complex_json(tv.value)},
                          {"error", tv.tail_estimate},
                          {"converged", tv.converged}});
        max_tail = std::max(max_tail, tv.tail_estimate);
        all_conv = all_conv && tv.converged;
    }

    Artifacts a;
    a.results["values"] = values;
    a.results["max_tail"] = max_tail;
    a.results["all_converged"] = all_conv;
    a.csv = csv.str();
    return a;
}

inline Artifacts automorphy_check(Cfg& c, const RunOptions& opt) {
    auto gp = std::make_shared<GroupPresentation>(detail::build_group(c));
    double s = c.num("s", 2.0, 2.0, 50.0);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    std::vector<cplx> seed;
    if (c.has("seed")) {
        seed = c.complex_list("seed", true, 1, 33);
    } else {
        seed = {cplx{1.0, 0.0}};
        c.note("seed", json::array({detail::complex_json(seed[0])}));
    }
    std::vector<cplx> points = c.complex_list("points", false, 0, 10000);
    if (points.empty()) {
        int n = static_cast<int>(c.integer("num_points", 20, 1, 10000));
        points = detail::spiral_points(n, 0.7);
    }
    long triples = c.integer("cocycle_triples", 0, 0, 100000);
    (void)opt;

    FormSpec f;
    f.seed = seed;
    f.enumeration = std::make_shared<EnumeratedGroup>(
        enumerate_elements(*gp, L, static_cast<std::size_t>(cap)));
    f.factor = detail::build_factor(c, gp, s);
    f.s = s;

    CsvWriter csv;
    csv.field("z_re").field("z_im").field(lambda_tag).field("generator").field("residual");
    csv.field("tail").field("bound[10*tail]").field("ok");
    csv.end_row();
    double worst_ratio = 0.0;
    bool all_ok = true;
    for (cplx z : points) {
        if (abs2(z) >= 1.0) throw SchemaError("points: every point must lie in the open unit disc");
        ThetaValue at_z = theta_series(f, z);
        for (std::size_t gi = 0; gi < gp->generators.size(); ++gi) {
            Word w{static_cast<std::int8_t>(gi + 1)};
            cplx gz = gp->generators[gi](z);
            ThetaValue at_gz = theta_series(f, gz);
            cplx rho = f.factor->evaluate(w, z);
            double residual = std::abs(at_gz.value - rho * at_z.value);
            double tail = at_gz.tail_estimate + std::abs(rho) * at_z.tail_estimate;
            double bound = 10.0 * tail;
            bool ok = residual <= bound;
            all_ok = all_ok && ok;
            if (tail > 0.0) worst_ratio = std::max(worst_ratio, residual / tail);
            csv.field(z.real()).field(z.imag()).field(poincare_density(z));
            csv.field(detail::word_text(w)).field(residual).field(tail).field(bound).field(ok);
            csv.end_row();
        }
    }

    Artifacts a;
    a.results["all_ok"] = all_ok;
    a.results["worst_residual_to_tail_ratio"] = worst_ratio;

    if (triples > 0) {
        // deterministic word/point sampling for the cocycle and s-factor checks
        const auto& words = f.enumeration->words;
        std::size_t nw = words.size();
        if (nw < 2) throw SchemaError("cocycle_triples: group enumeration has fewer than 2 words");
        double max_cocycle = 0.0, max_sfac = 0.0;
        std::vector<cplx> zs = detail::spiral_points(static_cast<int>(triples), 0.8);
        std::vector<FactorSample> samples;
        for (long k = 0; k < triples; ++k) {
            std::size_t i1 = static_cast<std::size_t>((k * 2654435761u) % nw);
            std::size_t i2 = static_cast<std::size_t>((k * 40503u + 7) % nw);
            max_cocycle = std::max(max_cocycle,
                                   cocycle_residual(*f.factor, words[i1], words[i2], zs[k]));
            samples.push_back({words[i1], zs[k]});
        }
        max_sfac = s_factor_check(*f.factor, s, samples);
        a.results["max_cocycle_residual"] = max_cocycle;
        a.results["max_s_factor_residual"] = max_sfac;
    }
    a.csv = csv.str();
    return a;
}

inline Artifacts kernel_mass_cmd(Cfg& c, const RunOptions& opt) {
    double s = c.num("s", 2.0, std::nextafter(1.0, 2.0), 50.0);
    cplx w = c.complex_value("w", cplx{0.0, 0.0}, 0.999999);
    detail::DiscSpec spec = detail::read_disc_spec(c);

    QuadratureDomain q = detail::build_disc(spec, opt.seed);
    KernelMass km = kernel_mass(w, s, q);
    double rel = std::abs(km.value - km.reference) / km.reference;

    CsvWriter csv;
    csv.field("s").field("w_re").field("w_im").field("mass").field("reference[c_s*lambda(w)^s]");
    csv.field("error_estimate").field("relative_deviation");
    csv.end_row();
    csv.field(s).field(w.real()).field(w.imag()).field(km.value).field(km.reference);
    csv.field(km.error).field(rel);
    csv.end_row();

    Artifacts a;
    a.results["mass"] = detail::value_error(km.value, km.error);
    a.results["reference"] = km.reference;
    a.results["relative_deviation"] = rel;
    a.csv = csv.str();
    return a;
}

inline Artifacts norms(Cfg& c, const RunOptions& opt) {
    auto gp = std::make_shared<GroupPresentation>(detail::build_group(c));
    double s = c.num("s", 2.0, 2.0, 50.0);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    std::vector<cplx> seed = c.complex_list("seed", true, 1, 33);
    detail::DomainSpec ds = detail::read_domain_spec(c);
    (void)opt;

    FormSpec f;
    f.seed = seed;
    f.enumeration = std::make_shared<EnumeratedGroup>(
        enumerate_elements(*gp, L, static_cast<std::size_t>(cap)));
    f.factor = detail::build_factor(c, gp, s);
    f.s = s;

    QuadratureDomain dom = fundamental_domain_grid(*f.enumeration, ds.radial, ds.angular,
                                                   ds.cusp_cutoff);
    ThetaField field = theta_on_domain(f, dom);

    // Minkowski: the truncation shifts the p-norm by at most the p-norm of
    // the pointwise tail field, and the cusp cutoff by the weighted sup
    // times the omitted mass (to the matching power).
    auto tail_norm = [&](int p) {
        if (p <= 0) {
            double best = 0.0;
            for (std::size_t i = 0; i < dom.nodes.size(); ++i)
                best = std::max(best, field.fine_tail[i] / std::pow(dom.lambda[i], s));
            return best;
        }
        double sum = block_sum<double>(dom.nodes.size(), [&](std::size_t i) {
            double t = field.fine_tail[i];
            return dom.weights[i] * std::pow(dom.lambda[i], 2.0 - p * s) * (p == 1 ? t : t * t);
        });
        return p == 1 ? sum : std::sqrt(sum);
    };
    double sup_weighted = 0.0;
    for (std::size_t i = 0; i < dom.nodes.size(); ++i)
        sup_weighted = std::max(sup_weighted, (std::abs(field.fine[i]) + field.fine_tail[i]) /
                                                  std::pow(dom.lambda[i], s));

    CsvWriter csv;
    csv.field("p").field("norm").field("error_estimate").field(lambda_tag);
    csv.end_row();
    json entries = json::object();
    for (int p : {1, 2, 0}) { // 0 encodes the weighted sup norm
        RealIntegral n = lp_norm(field.fine, field.coarse, p, s, dom);
        double excluded = p == 1   ? sup_weighted * dom.excluded_mass_bound
                          : p == 2 ? sup_weighted * std::sqrt(dom.excluded_mass_bound)
                                   : 0.0;
        double err = n.error + tail_norm(p) + excluded;
        std::string label = p == 0 ? "inf" : std::to_string(p);
        csv.field(label).field(n.value).field(err).field("");
        csv.end_row();
        entries[label] = detail::value_error(n.value, err);
    }

    Artifacts a;
    a.results["norms"] = entries;
    a.results["tail_estimate"] = field.max_tail;
    a.results["converged"] = field.converged;
    a.results["excluded_mass_bound"] = dom.excluded_mass_bound;
    a.csv = csv.str();
    return a;
}

inline Artifacts pairing(Cfg& c, const RunOptions& opt) {
    auto gp = std::make_shared<GroupPresentation>(detail::build_group(c));
    double s = c.num("s", 2.0, 2.0, 50.0);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    auto seeds = c.seeds("seeds", 2, 2);
    detail::DomainSpec ds = detail::read_domain_spec(c);
    detail::DiscSpec disc_spec = detail::read_disc_spec(c);

    auto enumeration = std::make_shared<EnumeratedGroup>(
        enumerate_elements(*gp, L, static_cast<std::size_t>(cap)));
    auto factor = detail::build_factor(c, gp, s);
    FormSpec f1{seeds[0], enumeration, factor, s};
    FormSpec f2{seeds[1], enumeration, factor, s};

    QuadratureDomain dom = fundamental_domain_grid(*enumeration, ds.radial, ds.angular,
                                                   ds.cusp_cutoff);
    QuadratureDomain disc = detail::build_disc(disc_spec, opt.seed);
    PairingRoutes pr = pairing_two_routes(f1, f2, dom, disc);

    double combined = pr.domain_route.error + pr.disc_route.error + pr.domain_tail +
                      pr.disc_tail + pr.excluded_term;
    double disagreement = std::abs(pr.domain_route.value - pr.disc_route.value);

    CsvWriter csv;
    csv.field("route").field("value_re").field("value_im").field("error_estimate");
    csv.field("tail_estimate").field("excluded_term").field(lambda_tag);
    csv.end_row();
    csv.field("fundamental_domain").field(pr.domain_route.value.real())
        .field(pr.domain_route.value.imag()).field(pr.domain_route.error)
        .field(pr.domain_tail).field(pr.excluded_term).field("");
    csv.end_row();
    csv.field("unfolded_disc").field(pr.disc_route.value.real())
        .field(pr.disc_route.value.imag()).field(pr.disc_route.error)
        .field(pr.disc_tail).field(0.0).field("");
    csv.end_row();

    Artifacts a;
    a.results["domain_route"] = detail::value_error(pr.domain_route.value,
                                                    pr.domain_route.error + pr.domain_tail +
                                                        pr.excluded_term);
    a.results["disc_route"] = detail::value_error(pr.disc_route.value,
                                                  pr.disc_route.error + pr.disc_tail);
    a.results["disagreement"] = disagreement;
    a.results["combined_error"] = combined;
    a.results["agree_within_error"] = disagreement <= combined;
    a.csv = csv.str();
    return a;
}

inline Artifacts gram(Cfg& c, const RunOptions& opt) {
    GroupPresentation gp = detail::build_group(c);
    double s = c.num("s", 2.0, 2.0, 50.0);
    int L = static_cast<int>(c.integer("word_length", 8, 0, 24));
    long cap = c.integer("element_cap", 4000000, 1, 100000000);
    auto seed_polys = c.seeds("seeds", 1, 16);
    detail::DomainSpec ds = detail::read_domain_spec(c);
    detail::DiscSpec disc_spec = detail::read_disc_spec(c);
    double rank_tol = c.num("rank_tolerance", 1e-8, 1e-15, 0.5);
    (void)opt;

    FamilyPath path;
    path.u_min = 1.0;
    path.u_max = 1.0;
    path.group_at = [gp](double) { return gp; };
    path.s = s;
    path.seeds = seed_polys;
    path.word_length = L;
    path.element_cap = static_cast<std::size_t>(cap);

    GramOptions go;
    go.radial_nodes = ds.radial;
    go.angular_nodes = ds.angular;
    go.cusp_cutoff = ds.cusp_cutoff;
    go.disc_radial = disc_spec.radial;
    go.disc_angular = disc_spec.angular;
    go.rank_tolerance = rank_tol;

    Fibre fibre = build_fibre(path, 1.0);
    GramReport rep = gram_matrix(path, fibre, go);

    CsvWriter csv;
    csv.field("i").field("j").field("gram_re").field("gram_im");
    csv.field("unfolded_re").field("unfolded_im").field(lambda_tag);
    csv.end_row();
    for (int i = 0; i < rep.n; ++i)
        for (int j = 0; j < rep.n; ++j) {
            csv.field(i).field(j);
            csv.field(rep.gram[i * rep.n + j].real()).field(rep.gram[i * rep.n + j].imag());
            csv.field(rep.disc_route[i * rep.n + j].real())
                .field(rep.disc_route[i * rep.n + j].imag()).field("");
            csv.end_row();
        }

    Artifacts a;
    json eigs = json::array();
    for (double ev : rep.eigenvalues) eigs.push_back(ev);
    a.results["eigenvalues"] = eigs;
    a.results["rank"] = rep.rank;
    a.results["rank_tolerance"] = rep.rank_tolerance;
    a.results["error_estimate"] = rep.error_estimate;
    a.results["tail_estimate"] = rep.tail_estimate;
    a.results["converged"] = rep.converged;
    a.results["route_disagreement"] = rep.route_disagreement;
    SurfaceType t{gp.genus, gp.punctures};
    if (is_stable(t)) a.results["fibre_dimension"] = dim_cusp_forms(t, s);
    a.csv = csv.str();
    return a;
}

inline Artifacts dimension(Cfg& c, const RunOptions& opt) {
    SurfaceType t{};
    t.genus = static_cast<int>(c.integer("genus", std::nullopt, 0, 1000000));
    t.punctures = static_cast<int>(c.integer("punctures", std::nullopt, 0, 1000000));
    double s = c.num("s", 2.0, std::nextafter(1.0, 2.0), 1e6);
    (void)opt;

    long dim = dim_cusp_forms(t, s);
    double area = hyperbolic_area(t);

    CsvWriter csv;
    csv.field("genus").field("punctures").field("s").field("floor_strict");
    csv.field("dimension").field(area_tag);
    csv.end_row();
    csv.field(static_cast<long>(t.genus)).field(static_cast<long>(t.punctures)).field(s);
    csv.field(floor_strict(s)).field(dim).field(area);
    csv.end_row();

    Artifacts a;
    a.results["dimension"] = detail::value_error(static_cast<double>(dim), 0.0);
    a.results["floor_strict"] = floor_strict(s);
    a.results["area"] = detail::value_error(area, 0.0);
    if (c.has("riemann_roch_deg")) {
        long deg = c.integer("riemann_roch_deg", std::nullopt, -1000000, 1000000);
        a.results["riemann_roch_h0"] = riemann_roch_h0(deg, t.genus);
    }
    a.csv = csv.str();
    return a;
}

inline Artifacts boundary_dimension_cmd(Cfg& c, const RunOptions& opt) {
    SurfaceType t{};
    t.genus = static_cast<int>(c.integer("genus", std::nullopt, 0, 1000000));
    t.punctures = static_cast<int>(c.integer("punctures", std::nullopt, 0, 1000000));
    long s = c.integer("s", 2, 2, 1000);
    (void)opt;

    const json& plan_json = c.raw("plan");
    if (!plan_json.is_array()) throw SchemaError("plan: expected an array of pinch moves");
    PinchPlan plan;
    json plan_echo = json::array();
    for (std::size_t i = 0; i < plan_json.size(); ++i) {
        std::string what = "plan[" + std::to_string(i) + "]";
        Cfg mv(plan_json[i], what);
        PinchMove move;
        move.separating = mv.boolean("separating", false);
        move.part = static_cast<int>(mv.integer("part", 0, 0, 1000000));
        if (move.separating) {
            Cfg c1 = mv.sub("child1"), c2 = mv.sub("child2");
            move.child1.genus = static_cast<int>(c1.integer("genus", std::nullopt, 0, 1000000));
            move.child1.punctures =
                static_cast<int>(c1.integer("punctures", std::nullopt, 0, 1000000));
            move.child2.genus = static_cast<int>(c2.integer("genus", std::nullopt, 0, 1000000));
            move.child2.punctures =
                static_cast<int>(c2.integer("punctures", std::nullopt, 0, 1000000));
            mv.adopt("child1", c1);
            mv.adopt("child2", c2);
        }
        plan.push_back(move);
        plan_echo.push_back(mv.echo());
    }
    c.note("plan", plan_echo);

    long top_down = boundary_dimension(t, static_cast<int>(s), plan);
    std::vector<SurfaceType> parts = apply_pinch_plan(t, plan);
    long bottom_up = 0;
    for (SurfaceType part : parts) bottom_up += dim_cusp_forms(part, static_cast<double>(s));
    bool area_ok = area_conservation_check(t, plan);

    CsvWriter csv;
    csv.field("part").field("genus").field("punctures").field("dimension").field(area_tag);
    csv.end_row();
    double area_total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        double pa = hyperbolic_area(parts[i]);
        area_total += pa;
        csv.field(static_cast<long>(i)).field(static_cast<long>(parts[i].genus));
        csv.field(static_cast<long>(parts[i].punctures));
        csv.field(dim_cusp_forms(parts[i], static_cast<double>(s))).field(pa);
        csv.end_row();
    }

    Artifacts a;
    a.results["top_down"] = top_down;
    a.results["bottom_up"] = bottom_up;
    a.results["equal"] = top_down == bottom_up;
    a.results["area_conserved"] = area_ok;
    a.results["area_total"] = detail::value_error(area_total, 0.0);
    a.results["part_count"] = parts.size();
    a.csv = csv.str();
    return a;
}

inline Artifacts flat_solve(Cfg& c, const RunOptions& opt) {
    const json& tau_json = c.raw("tau");
    if (!tau_json.is_array() || tau_json.empty())
        throw SchemaError("tau: expected a nonempty g x g matrix (array of rows)");
    std::size_t g = tau_json.size();
    if (g > 64) throw SchemaError("tau: genus too large");
    PeriodData p;
    p.g = static_cast<int>(g);
    json tau_echo = json::array();
    for (std::size_t i = 0; i < g; ++i) {
        const json& row = tau_json[i];
        if (!row.is_array() || row.size() != g)
            throw SchemaError("tau: row " + std::to_string(i) + " must have " +
                              std::to_string(g) + " entries");
        json row_echo = json::array();
        for (std::size_t j = 0; j < g; ++j) {
            cplx v = detail::parse_complex(row[j], "tau[" + std::to_string(i) + "][" +
                                                        std::to_string(j) + "]");
            p.tau.push_back(v);
            row_echo.push_back(detail::complex_json(v));
        }
        tau_echo.push_back(row_echo);
    }
    c.note("tau", tau_echo);
    p.sigma = c.complex_list("sigma", true, g, g);
    p.sigma_prime = c.complex_list("sigma_prime", true, g, g);
    (void)opt;

    validate_period_data(p);
    FlatSolveResult sol = unitary_flat_solve(p);

    CsvWriter csv;
    csv.field("i").field("j").field("C_re").field("C_im");
    csv.end_row();
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            csv.field(static_cast<long>(i)).field(static_cast<long>(j));
            csv.field(sol.C[i * g + j].real()).field(sol.C[i * g + j].imag());
            csv.end_row();
        }

    Artifacts a;
    json cm = json::array();
    for (cplx v : sol.C) cm.push_back(detail::complex_json(v));
    a.results["C"] = cm;
    a.results["residual"] = detail::value_error(sol.residual, 0.0);
    a.results["rank_deficient"] = sol.rank_deficient;
    a.csv = csv.str();
    return a;
}

inline Artifacts schwarzian_check(Cfg& c, const RunOptions& opt) {
    Cfg mc = c.sub("map");
    std::string kind = mc.str("kind", std::nullopt);
    Sampler f;
    if (kind == "koebe") {
        f = [](cplx z) { return z / ((1.0 - z) * (1.0 - z)); };
    } else if (kind == "square") {
        f = [](cplx z) { return z * z; };
    } else if (kind == "polynomial") {
        std::vector<cplx> coeffs = mc.complex_list("coeffs", true, 1, 33);
        f = [coeffs](cplx z) {
            cplx acc{};
            for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
            return acc;
        };
    } else if (kind == "moebius") {
        cplx a = mc.complex_value("a", std::nullopt), b = mc.complex_value("b", std::nullopt);
        cplx cc = mc.complex_value("c", std::nullopt), d = mc.complex_value("d", std::nullopt);
        if (std::abs(a * d - b * cc) < 1e-14) throw SchemaError("map: matrix is singular");
        MoebiusMap m = make_moebius(a, b, cc, d);
        f = [m](cplx z) { return m(z); };
    } else {
        throw SchemaError("map.kind: expected one of koebe|square|polynomial|moebius");
    }
    c.adopt("map", mc);

    std::vector<cplx> points = c.complex_list("points", false, 0, 100000);
    if (points.empty()) {
        Cfg gc = c.sub("grid");
        int rays = static_cast<int>(gc.integer("rays", 24, 1, 4096));
        int per_ray = static_cast<int>(gc.integer("per_ray", 17, 1, 4096));
        double rmax = gc.num("rmax", 0.9, 0.01, 0.999);
        c.adopt("grid", gc);
        std::vector<cplx> g = make_radial_grid(rays, per_ray, rmax);
        points.assign(g.begin(), g.end());
    }
    Cfg cc2 = c.sub("contour");
    double shrink = cc2.num("shrink", 0.4, 0.01, 0.9);
    int nodes = static_cast<int>(cc2.integer("nodes", 64, 8, 4096));
    c.adopt("contour", cc2);
    (void)opt;

    CsvWriter csv;
    csv.field("z_re").field("z_im").field("S_re").field("S_im").field("error_estimate");
    csv.field("b2_weight[(1-|z|^2)^2*|S|]");
    csv.end_row();
    double b2 = 0.0, max_err = 0.0, max_abs = 0.0;
    for (cplx z : points) {
        if (abs2(z) >= 1.0) throw SchemaError("points: every point must lie in the open unit disc");
        double r = shrink * (1.0 - std::abs(z));
        SchwarzianValue sv = schwarzian(f, z, r, nodes);
        double wgt = sqr(1.0 - abs2(z)) * std::abs(sv.value);
        b2 = std::max(b2, wgt);
        max_err = std::max(max_err, sv.error);
        max_abs = std::max(max_abs, std::abs(sv.value));
        csv.field(z.real()).field(z.imag()).field(sv.value.real()).field(sv.value.imag());
        csv.field(sv.error).field(wgt);
        csv.end_row();
    }

    Artifacts a;
    a.results["b2_norm"] = detail::value_error(b2, max_err);
    a.results["max_abs_schwarzian"] = max_abs;
    a.results["point_count"] = points.size();
    a.csv = csv.str();
    return a;
}

inline Artifacts pinch_sweep(Cfg& c, const RunOptions& opt) {
    double u_min = c.num("u_min", 1e-3, 1e-12, 1.0);
    double u_max = c.num("u_max", 1.0, u_min, 1.0);
    long samples = c.integer("samples", 25, 2, 100000);
    (void)opt;

    CsvWriter csv;
    csv.field("u").field("trace_sq").field(length_tag).field("length_reference");
    csv.field("plumbing_t").field("roundtrip_error");
    csv.end_row();
    double max_roundtrip = 0.0, max_dev = 0.0;
    bool trace_monotone = true, length_monotone = true;
    double prev_tr = 0.0, prev_len = 0.0;
    for (long i = 0; i < samples; ++i) {
        double frac = static_cast<double>(i) / (samples - 1);
        double u = u_max * std::pow(u_min / u_max, frac);
        GroupPresentation gp = pinch_path(u);
        const MoebiusMap& gen = gp.generators[0];
        double tr2 = (gen.trace() * gen.trace()).real();
        double len = geodesic_length(gen);
        double ref = 2.0 * std::acosh((2.0 + u) / 2.0);
        double t = plumbing_parameter(len);
        double roundtrip = std::abs(plumbing_length(cplx(t, 0.0)) - len);
        max_roundtrip = std::max(max_roundtrip, roundtrip);
        max_dev = std::max(max_dev, std::abs(len - ref));
        if (i > 0) {
            trace_monotone = trace_monotone && tr2 < prev_tr;
            length_monotone = length_monotone && len < prev_len;
        }
        prev_tr = tr2;
        prev_len = len;
        csv.field(u).field(tr2).field(len).field(ref).field(t).field(roundtrip);
        csv.end_row();
    }

    Artifacts a;
    a.results["trace_sq_monotone_decreasing"] = trace_monotone;
    a.results["length_monotone_decreasing"] = length_monotone;
    a.results["max_roundtrip_error"] = max_roundtrip;
    a.results["max_length_deviation"] = detail::value_error(max_dev, 0.0);
    a.csv = csv.str();
    return a;
}

inline Artifacts asymptotic_sweep_cmd(Cfg& c, const RunOptions& opt) {
    double s = c.num("s", 2.0, 2.0, 50.0);
    auto seed_polys = c.seeds("seeds", 2, 16, 32,
                              std::vector<std::vector<cplx>>{{cplx{1.0, 0.0}},
                                                             {cplx{0.0, 0.0}, cplx{1.0, 0.0}}});
    int L = static_cast<int>(c.integer("word_length", 6, 0, 24));
    double u_min = c.num("u_min", 1e-3, 1e-12, 1.0);
    double u_max = c.num("u_max", 1.0, u_min, 1.0);
    long samples = c.integer("samples", 25, 2, 10000);
    detail::DomainSpec ds = detail::read_domain_spec(c);
    detail::DiscSpec disc_spec = detail::read_disc_spec(c);
    long probe_cap = c.integer("probe_cap", 400, 8, 100000);
    (void)opt;

    FamilyPath path = make_pinch_family(s, seed_polys, L, u_min, u_max);
    SweepOptions so;
    so.gram.radial_nodes = ds.radial;
    so.gram.angular_nodes = ds.angular;
    so.gram.cusp_cutoff = ds.cusp_cutoff;
    so.gram.disc_radial = disc_spec.radial;
    so.gram.disc_angular = disc_spec.angular;
    so.probe_cap = static_cast<int>(probe_cap);
    so.disc_radial = disc_spec.radial;
    so.disc_angular = disc_spec.angular;

    std::vector<SweepRow> rows = asymptotic_sweep(path, static_cast<int>(samples), so);

    CsvWriter csv;
    csv.field("u").field("trace_sq").field(length_tag).field("plumbing_t").field("embedding_m");
    csv.field("g11_re").field("g11_im").field("g12_re").field("g12_im");
    csv.field("g22_re").field("g22_im").field("seed_norm_1").field("seed_norm_2");
    csv.field("bound_lhs").field("bound_rhs").field("bound_margin").field("bound_ok");
    csv.field("converged");
    csv.end_row();
    bool all_ok = true, trace_monotone = true;
    double prev_tr = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        csv.field(r.u).field(r.trace_sq).field(r.length).field(r.plumbing_t).field(r.embedding_m);
        csv.field(r.g11.real()).field(r.g11.imag()).field(r.g12.real()).field(r.g12.imag());
        csv.field(r.g22.real()).field(r.g22.imag()).field(r.seed_norm_1).field(r.seed_norm_2);
        csv.field(r.bound_lhs).field(r.bound_rhs).field(r.bound_margin).field(r.bound_ok);
        csv.field(r.converged);
        csv.end_row();
        all_ok = all_ok && r.bound_ok;
        if (i > 0) trace_monotone = trace_monotone && r.trace_sq < prev_tr;
        prev_tr = r.trace_sq;
    }

    Artifacts a;
    a.results["sample_count"] = rows.size();
    a.results["all_bounds_ok"] = all_ok;
    a.results["trace_sq_monotone_decreasing"] = trace_monotone;
    a.csv = csv.str();
    return a;
}

} // namespace handlers

// ---------------------------------------------------------------------------
// dispatch and file emission

using Handler = Artifacts (*)(Cfg&, const RunOptions&);

// Top-level keys each command accepts; anything else in the config is a
// schema violation, caught before any computation starts.
inline const std::map<std::string, std::vector<std::string>>& allowed_keys() {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"orbit", {"group", "word_length", "element_cap", "z0", "svg"}},
        {"limit-set", {"group", "word_length", "element_cap", "svg"}},
        {"fundamental-domain", {"group", "word_length", "element_cap", "domain", "svg"}},
        {"theta-eval", {"group", "s", "word_length", "element_cap", "seed", "flat_values", "points"}},
        {"automorphy-check", {"group", "s", "word_length", "element_cap", "seed", "flat_values",
                              "points", "num_points", "cocycle_triples"}},
        {"kernel-mass", {"s", "w", "quadrature"}},
        {"norms", {"group", "s", "word_length", "element_cap", "seed", "flat_values", "domain"}},
        {"pairing", {"group", "s", "word_length", "element_cap", "seeds", "flat_values", "domain",
                     "quadrature"}},
        {"gram", {"group", "s", "word_length", "element_cap", "seeds", "domain", "quadrature",
                  "rank_tolerance"}},
        {"dimension", {"genus", "punctures", "s", "riemann_roch_deg"}},
        {"boundary-dimension", {"genus", "punctures", "s", "plan"}},
        {"flat-solve", {"tau", "sigma", "sigma_prime"}},
        {"schwarzian-check", {"map", "points", "grid", "contour"}},
        {"pinch-sweep", {"u_min", "u_max", "samples"}},
        {"asymptotic-sweep", {"s", "seeds", "word_length", "u_min", "u_max", "samples", "domain",
                              "quadrature", "probe_cap"}},
    };
    return table;
}

inline const std::map<std::string, Handler>& command_table() {
    static const std::map<std::string, Handler> table = {
        {"orbit", handlers::orbit},
        {"limit-set", handlers::limit_set},
        {"fundamental-domain", handlers::fundamental_domain},
        {"theta-eval", handlers::theta_eval},
        {"automorphy-check", handlers::automorphy_check},
        {"kernel-mass", handlers::kernel_mass_cmd},
        {"norms", handlers::norms},
        {"pairing", handlers::pairing},
        {"gram", handlers::gram},
        {"dimension", handlers::dimension},
        {"boundary-dimension", handlers::boundary_dimension_cmd},
        {"flat-solve", handlers::flat_solve},
        {"schwarzian-check", handlers::schwarzian_check},
        {"pinch-sweep", handlers::pinch_sweep},
        {"asymptotic-sweep", handlers::asymptotic_sweep_cmd},
    };
    return table;
}

inline int run(const RunOptions& opt, std::ostream& err) {
    auto t0 = std::chrono::steady_clock::now();

    std::string command;
    Artifacts artifacts;
    json inputs_echo;
    try {
        if (!opt.config.is_object()) throw SchemaError("config: expected a JSON object");
        command = opt.command;
        const json* in_cfg = detail::find(opt.config, "command");
        if (in_cfg) {
            if (!in_cfg->is_string()) throw SchemaError("command: expected a string");
            std::string from_cfg = in_cfg->get<std::string>();
            if (command.empty()) command = from_cfg;
            else if (command != from_cfg)
                throw SchemaError("command: config says '" + from_cfg +
                                  "' but the command line says '" + command + "'");
        }
        if (command.empty()) throw SchemaError("command: required (argv or config)");
        auto it = command_table().find(command);
        if (it == command_table().end()) throw SchemaError("command: unknown command '" + command + "'");

        const std::vector<std::string>& keys = allowed_keys().at(command);
        for (auto kv = opt.config.begin(); kv != opt.config.end(); ++kv) {
            if (kv.key() == "command") continue;
            if (std::find(keys.begin(), keys.end(), kv.key()) == keys.end())
                throw SchemaError(kv.key() + ": unknown key for command '" + command + "'");
        }

        Cfg cfg(opt.config, "");
        artifacts = it->second(cfg, opt);
        inputs_echo = cfg.echo();
    } catch (const SchemaError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "computation error: " << e.what() << "\n";
        return 3;
    }

    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["version"] = version_string;
    report["command"] = command;
    report["inputs"] = inputs_echo;
    report["seed"] = opt.seed ? json(*opt.seed) : json(nullptr);
    report["results"] = artifacts.results;
    report["timing_seconds"] = seconds;
    json outputs;
    outputs["csv"] = "data.csv";
    outputs["report"] = "report.json";
    if (artifacts.svg) outputs["svg"] = artifacts.svg->first;
    report["outputs"] = outputs;

    try {
        std::filesystem::create_directories(opt.out_dir);
        auto write_file = [&](const std::filesystem::path& name, const std::string& content) {
            std::ofstream f(opt.out_dir / name, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open output file " + name.string());
            f << content;
            if (!f) throw std::runtime_error("failed writing output file " + name.string());
        };
        write_file("data.csv", artifacts.csv);
        write_file("report.json", report.dump(2) + "\n");
        if (artifacts.svg) write_file(artifacts.svg->first, artifacts.svg->second);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

// argv surface: uniformizer [<command>] [--config FILE|-] [--out DIR] [--seed N]
inline int main_entry(int argc, char** argv, std::istream& in, std::ostream& out,
                      std::ostream& err) {
    RunOptions opt;
    std::optional<std::string> config_path;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        auto next = [&](const char* what) -> std::string {
            if (i + 1 >= argc) {
                throw SchemaError(std::string(what) + ": missing value");
            }
            return argv[++i];
        };
        try {
            if (arg == "--config") config_path = next("--config");
            else if (arg == "--out") opt.out_dir = next("--out");
            else if (arg == "--seed") opt.seed = std::stoul(next("--seed"));
            else if (arg == "--help" || arg == "-h") {
                out << "usage: uniformizer [<command>] [--config FILE|-] [--out DIR] [--seed N]\n"
                       "commands:";
                for (const auto& [name, fn] : command_table()) out << " " << name;
                out << "\nconfig is a JSON document (path or '-' for stdin); see docs/config_schema.json\n";
                return 0;
            } else if (!arg.empty() && arg[0] == '-') {
                err << "config error: unknown flag " << arg << "\n";
                return 2;
            } else if (opt.command.empty()) {
                opt.command = arg;
            } else {
                err << "config error: more than one command given\n";
                return 2;
            }
        } catch (const std::exception& e) {
            err << "config error: " << e.what() << "\n";
            return 2;
        }
    }

    std::string config_text;
    if (!config_path || *config_path == "-") {
        std::ostringstream ss;
        ss << in.rdbuf();
        config_text = ss.str();
        if (config_text.empty()) config_text = "{}";
    } else {
        std::ifstream f(*config_path);
        if (!f) {
            err << "config error: cannot open config file " << *config_path << "\n";
            return 2;
        }
        std::ostringstream ss;
        ss << f.rdbuf();
        config_text = ss.str();
    }
    json parsed = json::parse(config_text, nullptr, false);
    if (parsed.is_discarded()) {
        err << "config error: config is not valid JSON\n";
        return 2;
    }
    opt.config = std::move(parsed);
    return run(opt, err);
}

} // namespace uniformizer::cli
