#include "hybridcq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hybridcq/errors.hpp"

namespace hybridcq {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    //! Object check plus rejection of keys outside `allowed`.
    bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        for (const auto& [key, value] : j.items()) {
            (void)value;
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                fail(join(path, key), "unknown key");
        }
        return true;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    const json* member(const json& j, const std::string& path, const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(join(path, key), "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = member(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(join(path, key), "expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<long long> integer(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = member(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            fail(join(path, key), "expected an integer");
            return std::nullopt;
        }
        return v->get<long long>();
    }

    std::optional<std::string> string(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = member(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(join(path, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<Vector> vector(const json& j, const std::string& path) {
        if (!j.is_array() || j.empty()) {
            fail(path, "expected a non-empty array of numbers");
            return std::nullopt;
        }
        Vector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) {
                fail(path + "[" + std::to_string(i) + "]", "expected a number");
                return std::nullopt;
            }
            v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        }
        return v;
    }

    std::optional<Vector> vector(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = member(j, path, key, required);
        if (!v) return std::nullopt;
        return vector(*v, join(path, key));
    }

    template <typename F> auto guarded(const std::string& path, F&& f) -> std::optional<decltype(f())> {
        try {
            return f();
        } catch (const Error& e) {
            fail(path, e.what());
            return std::nullopt;
        }
    }
};

std::optional<SpaceGeometry> parse_geometry(Reader& r, const json& j, const std::string& path) {
    if (!r.object(j, path, {"kind", "dim", "p"})) return std::nullopt;
    auto kind = r.string(j, path, "kind", true);
    auto dim = r.integer(j, path, "dim", true);
    if (!kind || !dim) return std::nullopt;
    if (*dim <= 0 || *dim > 1'000'000) {
        r.fail(path + ".dim", "must be a positive integer");
        return std::nullopt;
    }
    const int d = static_cast<int>(*dim);
    if (*kind == "euclidean") {
        if (j.contains("p")) r.fail(path + ".p", "only allowed for kind p_norm");
        return SpaceGeometry::euclidean(d);
    }
    if (*kind == "p_norm") {
        auto p = r.number(j, path, "p", true);
        if (!p) return std::nullopt;
        // The |x|^{p-1} powers lose too much precision outside this range.
        if (!(*p > 1.05 && *p < 20.0)) {
            r.fail(path + ".p", "must lie in (1.05, 20)");
            return std::nullopt;
        }
        return r.guarded(path + ".p", [&] { return SpaceGeometry::p_norm(d, *p); });
    }
    r.fail(path + ".kind", "unknown geometry kind '" + *kind + "' (expected euclidean or p_norm)");
    return std::nullopt;
}

std::optional<ConvexSet> parse_set(Reader& r, const json& j, const std::string& path) {
    if (!j.is_object()) {
        r.fail(path, "expected an object");
        return std::nullopt;
    }
    auto type = r.string(j, path, "type", true);
    if (!type) return std::nullopt;
    if (*type == "box") {
        if (!r.object(j, path, {"type", "lower", "upper"})) return std::nullopt;
        auto lo = r.vector(j, path, "lower", true);
        auto hi = r.vector(j, path, "upper", true);
        if (!lo || !hi) return std::nullopt;
        if (lo->size() != hi->size()) {
            r.fail(path, "lower and upper differ in length");
            return std::nullopt;
        }
        if ((hi->array() < lo->array()).any()) {
            r.fail(path, "lower exceeds upper (empty box)");
            return std::nullopt;
        }
        return r.guarded(path, [&] { return ConvexSet(Box{*lo, *hi}); });
    }
    if (*type == "ball") {
        if (!r.object(j, path, {"type", "center", "radius"})) return std::nullopt;
        auto c = r.vector(j, path, "center", true);
        auto rad = r.number(j, path, "radius", true);
        if (!c || !rad) return std::nullopt;
        return r.guarded(path, [&] { return ConvexSet(Ball{*c, *rad}); });
    }
    if (*type == "halfspace") {
        if (!r.object(j, path, {"type", "normal", "offset"})) return std::nullopt;
        auto a = r.vector(j, path, "normal", true);
        auto b = r.number(j, path, "offset", true);
        if (!a || !b) return std::nullopt;
        return r.guarded(path, [&] { return ConvexSet(DualHalfSpace{DualVector{*a}, *b}); });
    }
    if (*type == "intersection") {
        if (!r.object(j, path, {"type", "parts"})) return std::nullopt;
        const json* parts = r.member(j, path, "parts", true);
        if (!parts) return std::nullopt;
        if (!parts->is_array() || parts->empty()) {
            r.fail(path + ".parts", "expected a non-empty array of sets");
            return std::nullopt;
        }
        Intersection out;
        bool ok = true;
        for (std::size_t i = 0; i < parts->size(); ++i) {
            auto s = parse_set(r, (*parts)[i], path + ".parts[" + std::to_string(i) + "]");
            if (s) out.parts.push_back(std::move(*s));
            else ok = false;
        }
        if (!ok) return std::nullopt;
        return r.guarded(path, [&] { return ConvexSet(std::move(out)); });
    }
    r.fail(path + ".type", "unknown set type '" + *type + "' (expected box, ball, halfspace or intersection)");
    return std::nullopt;
}

std::optional<KSchedule> parse_k(Reader& r, const json& j, const std::string& path) {
    if (!r.object(j, path, {"kind", "value"})) return std::nullopt;
    auto kind = r.string(j, path, "kind", true);
    if (!kind) return std::nullopt;
    if (*kind == "constant") {
        auto v = r.number(j, path, "value", true);
        if (!v) return std::nullopt;
        return r.guarded(path, [&] { return KSchedule::constant(*v); });
    }
    if (*kind == "inverse_square") {
        if (j.contains("value")) r.fail(path + ".value", "not used by inverse_square");
        return KSchedule::inverse_square();
    }
    r.fail(path + ".kind", "unknown k_schedule kind '" + *kind + "' (expected constant or inverse_square)");
    return std::nullopt;
}

std::optional<MappingSpec> parse_mapping(Reader& r, const json& j, const std::string& path,
                                         const std::optional<SpaceGeometry>& g) {
    if (!j.is_object()) {
        r.fail(path, "expected an object");
        return std::nullopt;
    }
    auto kind = r.string(j, path, "kind", true);
    if (!kind) return std::nullopt;

    std::optional<MappingSpec> m;
    if (*kind == "rotation") {
        if (!r.object(j, path, {"kind", "angle", "k_schedule", "domain"})) return std::nullopt;
        auto angle = r.number(j, path, "angle", true);
        if (angle) m = r.guarded(path, [&] { return MappingSpec::rotation(*angle); });
    } else if (*kind == "contraction") {
        if (!r.object(j, path, {"kind", "factor", "center", "k_schedule", "domain"})) return std::nullopt;
        auto f = r.number(j, path, "factor", true);
        auto c = r.vector(j, path, "center", true);
        if (f && c) m = r.guarded(path, [&] { return MappingSpec::contraction(*f, *c); });
    } else if (*kind == "metric_projection" || *kind == "generalized_projection") {
        if (!r.object(j, path, {"kind", "set", "k_schedule", "domain"})) return std::nullopt;
        const json* sj = r.member(j, path, "set", true);
        std::optional<ConvexSet> s = sj ? parse_set(r, *sj, path + ".set") : std::nullopt;
        if (s && *kind == "metric_projection") {
            m = r.guarded(path, [&] { return MappingSpec::metric_projection(*s); });
        } else if (s && g) {
            m = r.guarded(path, [&] { return MappingSpec::generalized_projection(*g, *s); });
        }
    } else if (*kind == "averaged") {
        if (!r.object(j, path, {"kind", "inner", "weight", "k_schedule", "domain"})) return std::nullopt;
        auto w = r.number(j, path, "weight", true);
        const json* ij = r.member(j, path, "inner", true);
        auto inner = ij ? parse_mapping(r, *ij, path + ".inner", g) : std::nullopt;
        if (w && inner) m = r.guarded(path, [&] { return MappingSpec::averaged(*inner, *w); });
    } else if (*kind == "goebel_kirk") {
        if (!r.object(j, path, {"kind", "dim", "coefficients", "k_schedule", "domain"})) return std::nullopt;
        if (j.contains("coefficients")) {
            if (j.contains("dim")) r.fail(path, "give either dim or coefficients, not both");
            auto c = r.vector(j, path, "coefficients", true);
            if (c) {
                std::vector<double> coeffs(c->data(), c->data() + c->size());
                m = r.guarded(path, [&] { return MappingSpec::goebel_kirk(coeffs); });
            }
        } else {
            auto d = r.integer(j, path, "dim", true);
            if (d) {
                if (*d < 3 || *d > 100000) r.fail(path + ".dim", "must be an integer >= 3");
                else m = r.guarded(path, [&] { return MappingSpec::goebel_kirk(static_cast<int>(*d)); });
            }
        }
    } else {
        r.fail(path + ".kind", "unknown mapping kind '" + *kind +
                                   "' (expected rotation, contraction, metric_projection, "
                                   "generalized_projection, averaged or goebel_kirk)");
        return std::nullopt;
    }
    if (!m) return std::nullopt;

    if (const json* kj = r.member(j, path, "k_schedule", false)) {
        auto k = parse_k(r, *kj, path + ".k_schedule");
        if (!k) return std::nullopt;
        m = m->with_k_schedule(*k);
    }
    if (const json* dj = r.member(j, path, "domain", false)) {
        auto d = parse_set(r, *dj, path + ".domain");
        if (!d) return std::nullopt;
        auto with = r.guarded(path + ".domain", [&] { return m->with_domain(*d); });
        if (!with) return std::nullopt;
        m = *with;
    }
    return m;
}

std::optional<StepRule> parse_rule(Reader& r, const json& j, const std::string& path) {
    if (!r.object(j, path, {"rule", "value", "n0"})) return std::nullopt;
    auto rule = r.string(j, path, "rule", true);
    if (!rule) return std::nullopt;
    if (*rule == "constant") {
        if (j.contains("n0")) r.fail(path + ".n0", "not used by a constant rule");
        auto v = r.number(j, path, "value", true);
        if (!v) return std::nullopt;
        return r.guarded(path, [&] { return StepRule::constant(*v); });
    }
    if (*rule == "one_minus_inv" || *rule == "inv" || *rule == "inv_square") {
        if (j.contains("value")) r.fail(path + ".value", "not used by rule " + *rule);
        auto n0 = r.number(j, path, "n0", false);
        const double v = n0 ? *n0 : (*rule == "one_minus_inv" ? 2.0 : 1.0);
        return r.guarded(path, [&] {
            if (*rule == "one_minus_inv") return StepRule::one_minus_inv(v);
            if (*rule == "inv") return StepRule::inv(v);
            return StepRule::inv_square(v);
        });
    }
    r.fail(path + ".rule", "unknown rule '" + *rule + "' (expected constant, one_minus_inv, inv or inv_square)");
    return std::nullopt;
}

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    // The parser reports the position one past the offending character.
    if (col > 1) --col;
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        const auto pos = msg.find("parse error");
        if (pos != std::string::npos) msg = msg.substr(pos);
        throw ValidationError({origin + ": " + line_column(text, e.byte) + ": " + msg});
    }

    Reader r;
    ExperimentConfig cfg;
    if (!r.object(doc, "", {"name", "geometry", "mapping", "scheme", "schedule", "x0", "M", "diam_C", "max_iter",
                            "stop_tol", "residual_tol", "projection_tol", "seed", "probes", "outputs"}))
        throw ValidationError(r.errors);

    cfg.name = r.string(doc, "", "name", false).value_or("experiment");
    const auto bad_name = cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos;
    if (bad_name) r.fail("name", "must be a non-empty file-name-safe string");

    std::optional<Scheme> scheme;
    if (auto s = r.string(doc, "", "scheme", true)) {
        scheme = scheme_from_string(*s);
        if (!scheme)
            r.fail("scheme", "unknown scheme '" + *s +
                                 "' (expected mann, ishikawa, nakajo_takahashi, kim_xu, myx, hybrid_hilbert or "
                                 "hybrid_banach)");
    }

    std::optional<SpaceGeometry> g;
    if (const json* gj = r.member(doc, "", "geometry", true)) g = parse_geometry(r, *gj, "geometry");

    std::optional<MappingSpec> m;
    if (const json* mj = r.member(doc, "", "mapping", true)) m = parse_mapping(r, *mj, "mapping", g);

    SolverConfig& s = cfg.solver;
    if (scheme) s.scheme = *scheme;
    if (const json* sj = r.member(doc, "", "schedule", false)) {
        if (r.object(*sj, "schedule", {"alpha", "beta"})) {
            if (const json* a = r.member(*sj, "schedule", "alpha", false))
                if (auto rule = parse_rule(r, *a, "schedule.alpha")) s.schedule.alpha = *rule;
            if (const json* b = r.member(*sj, "schedule", "beta", false))
                if (auto rule = parse_rule(r, *b, "schedule.beta")) s.schedule.beta = *rule;
        }
    }
    std::optional<Vector> x0 = r.vector(doc, "", "x0", true);
    if (x0) s.x0 = *x0;

    if (const json* mj = r.member(doc, "", "M", false)) {
        if (mj->is_string() && mj->get<std::string>() == "auto") {
        } else if (mj->is_number() && mj->get<double>() > 0.0) {
            s.M = mj->get<double>();
        } else {
            r.fail("M", "expected \"auto\" or a positive number");
        }
    }
    if (auto d = r.number(doc, "", "diam_C", false)) {
        if (!(*d > 0.0)) r.fail("diam_C", "must be positive");
        else s.diam_C = *d;
    }
    if (auto v = r.integer(doc, "", "max_iter", false)) {
        if (*v <= 0 || *v > 100'000'000) r.fail("max_iter", "must be a positive integer");
        else s.max_iter = static_cast<int>(*v);
    }
    auto positive = [&](const char* key, double& field) {
        if (auto v = r.number(doc, "", key, false)) {
            if (!(*v > 0.0) || !std::isfinite(*v)) r.fail(key, "must be a positive number");
            else field = *v;
        }
    };
    positive("stop_tol", s.stop_tol);
    positive("residual_tol", s.residual_tol);
    positive("projection_tol", s.projection_tol);
    if (auto v = r.integer(doc, "", "seed", false)) {
        if (*v < 0) r.fail("seed", "must be a nonnegative integer");
        else cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = r.integer(doc, "", "probes", false)) {
        if (*v < 0 || *v > 10000) r.fail("probes", "must be an integer in [0, 10000]");
        else cfg.probe_count = static_cast<int>(*v);
    }
    cfg.trace_csv = cfg.name + ".csv";
    cfg.summary = cfg.name + ".summary.txt";
    if (const json* oj = r.member(doc, "", "outputs", false)) {
        if (r.object(*oj, "outputs", {"trace_csv", "summary"})) {
            if (auto p = r.string(*oj, "outputs", "trace_csv", false)) cfg.trace_csv = *p;
            if (auto p = r.string(*oj, "outputs", "summary", false)) cfg.summary = *p;
        }
    }

    if (g && m && scheme) {
        if (m->dim() != g->dim()) {
            r.fail("mapping", "dimension " + std::to_string(m->dim()) + " differs from geometry.dim " +
                                  std::to_string(g->dim()));
        } else if (*scheme != Scheme::hybrid_banach && !g->is_hilbert()) {
            r.fail("geometry", std::string("scheme ") + to_string(*scheme) + " requires euclidean geometry");
        } else if (x0) {
            for (auto& msg : check_hypotheses(*m, *g, s)) r.errors.push_back(msg);
        }
    }
    if (!r.errors.empty()) throw ValidationError(r.errors);

    cfg.geometry = *g;
    cfg.mapping = *m;
    // p = 2 and euclidean describe the same space, so they share an instance.
    const std::string space = g->is_hilbert() ? "hilbert:" + std::to_string(g->dim())
                                              : "p_norm:" + std::to_string(g->dim()) + ":" + format_double(g->p());
    cfg.instance_key = space + "|" + doc["mapping"].dump() + "|" + doc["x0"].dump();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigurationError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::vector<ExperimentConfig> load_config_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigurationError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigurationError("no *.json configs in " + dir.string());
    std::vector<ExperimentConfig> out;
    std::vector<std::string> errs;
    for (const auto& f : files) {
        try {
            out.push_back(load_config(f));
        } catch (const ValidationError& e) {
            for (const auto& msg : e.messages()) errs.push_back(f.filename().string() + ": " + msg);
        }
    }
    if (!errs.empty()) throw ValidationError(errs);
    return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

SpaceGeometry run_geometry(const ExperimentConfig& cfg) {
    return cfg.solver.scheme == Scheme::hybrid_banach ? cfg.geometry : SpaceGeometry::euclidean(cfg.mapping.dim());
}

} // namespace

double max_invariant_violation(const IterationTrace& trace, const SpaceGeometry& g, const Vector& x0) {
    double worst = 0.0;
    // Mann and Ishikawa carry zero slacks, and phi(x_n, x0) need not grow for them.
    if (trace.scheme == Scheme::mann || trace.scheme == Scheme::ishikawa) return worst;
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& rec : trace.records) {
        worst = std::max({worst, -rec.cn_slack_pref, -rec.qn_slack_pref});
        const double phi = g.lyapunov(rec.x, x0);
        if (phi < prev) worst = std::max(worst, prev - phi);
        prev = std::max(prev, phi);
    }
    if (trace.final_point.size() == x0.size() && !trace.records.empty()) {
        const double phi = g.lyapunov(trace.final_point, x0);
        if (phi < prev) worst = std::max(worst, prev - phi);
    }
    return worst;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult out;
    const SpaceGeometry g = run_geometry(cfg);
    SolverConfig s = cfg.solver;

    const ConvexSet fixed = cfg.mapping.fixed_set().set;
    out.reference = generalized_project(g, fixed, s.x0).point;
    s.target = out.reference;
    s.probes.push_back(out.reference);
    Sampler rng(cfg.seed);
    for (int i = 0; i < cfg.probe_count; ++i) {
        const Vector around = sample_point(rng, cfg.mapping.domain());
        s.probes.push_back(generalized_project(g, fixed, around).point);
    }

    out.trace = run_scheme(cfg.mapping, cfg.geometry, s);
    Summary& sum = out.summary;
    sum.terminated_by = out.trace.terminated_by;
    sum.error = out.trace.error;
    sum.converged = out.trace.terminated_by == Termination::tolerance;
    sum.iterations = static_cast<int>(out.trace.records.size());
    sum.final_distance_to_target = g.norm(Vector(out.trace.final_point - out.reference));
    sum.max_invariant_violation = max_invariant_violation(out.trace, g, s.x0);
    sum.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---------------------------------------------------------------------------
// Output

std::filesystem::path output_directory(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return fallback;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_csv(const IterationTrace& trace) {
    std::string out = kTraceHeader;
    out += "\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.n);
        out += ",";
        for (Eigen::Index i = 0; i < r.x.size(); ++i) {
            if (i) out += ";";
            out += format_double(r.x[i]);
        }
        for (double v : {r.phi_step, r.residual, r.dist_to_target, r.cn_slack_pref, r.qn_slack_pref}) {
            out += ",";
            out += format_double(v);
        }
        out += "\n";
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw Error("write failed for " + path.string());
}

} // namespace

void write_trace_csv(const IterationTrace& trace, const std::filesystem::path& path) {
    write_file(path, trace_csv(trace));
}

std::string summary_text(const Summary& s) {
    std::string out;
    out += "converged=" + std::string(s.converged ? "true" : "false") + "\n";
    out += "iterations=" + std::to_string(s.iterations) + "\n";
    out += "final_distance_to_target=" + format_double(s.final_distance_to_target) + "\n";
    out += "max_invariant_violation=" + format_double(s.max_invariant_violation) + "\n";
    out += "wall_time_seconds=" + format_double(s.wall_time_seconds) + "\n";
    out += "terminated_by=" + std::string(to_string(s.terminated_by)) + "\n";
    if (!s.error.empty()) {
        std::string e = s.error;
        std::replace(e.begin(), e.end(), '\n', ' ');
        out += "error=" + e + "\n";
    }
    return out;
}

void write_summary(const Summary& s, const std::filesystem::path& path) { write_file(path, summary_text(s)); }

std::pair<std::filesystem::path, std::filesystem::path> write_outputs(const ExperimentConfig& cfg,
                                                                     const ExperimentResult& r,
                                                                     const std::filesystem::path& dir) {
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : dir / path;
    };
    const auto csv = resolve(cfg.trace_csv);
    const auto sum = resolve(cfg.summary);
    write_trace_csv(r.trace, csv);
    write_summary(r.summary, sum);
    return {csv, sum};
}

// ---------------------------------------------------------------------------
// Comparison

Comparison compare_schemes(const std::vector<ExperimentConfig>& configs) {
    if (configs.empty()) throw ConfigurationError("compare: no configs given");
    for (const auto& c : configs) {
        if (c.instance_key != configs.front().instance_key)
            throw ConfigurationError("compare: config '" + c.name + "' uses a different instance than '" +
                                     configs.front().name + "' (geometry, mapping and x0 must match)");
    }
    std::vector<std::size_t> order(configs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto sa = static_cast<int>(configs[a].solver.scheme);
        const auto sb = static_cast<int>(configs[b].solver.scheme);
        return sa != sb ? sa < sb : configs[a].name < configs[b].name;
    });

    std::vector<std::future<ExperimentResult>> jobs;
    jobs.reserve(order.size());
    for (std::size_t i : order)
        jobs.push_back(std::async(std::launch::async, [&cfg = configs[i]] { return run_experiment(cfg); }));

    Comparison out;
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.results.push_back(jobs[k].get());
        const auto& cfg = configs[order[k]];
        const auto& res = out.results.back();
        out.rows.push_back({cfg.solver.scheme, cfg.name, res.summary.iterations, res.summary.converged,
                            res.summary.final_distance_to_target, order[k]});
    }
    return out;
}

std::string comparison_table(const Comparison& c) {
    std::string out = "scheme,name,iterations,converged,final_distance\n";
    for (const auto& r : c.rows) {
        out += std::string(to_string(r.scheme)) + "," + r.name + "," + std::to_string(r.iterations) + "," +
               (r.converged ? "true" : "false") + "," + format_double(r.final_distance) + "\n";
    }
    return out;
}

} // namespace hybridcq
