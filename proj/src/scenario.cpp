#include "dalembert/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace dalembert {

namespace {

std::string where(const YAML::Node &node) {
    const auto m = node.Mark();
    if (m.is_null()) return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

class Reader {
public:
    explicit Reader(const Constants &constants) : constants_(constants) {}

    static std::string join(const std::string &path, const std::string &key) {
        return path.empty() ? key : path + "." + key;
    }

    YAML::Node require(const YAML::Node &parent, const std::string &path, const std::string &key) const {
        const YAML::Node n = parent[key];
        if (!n) throw ScenarioError(join(path, key), "missing required entry" + where(parent));
        return n;
    }

    std::string text(const YAML::Node &n, const std::string &field) const {
        if (!n.IsScalar()) throw ScenarioError(field, "expected a scalar" + where(n));
        return n.Scalar();
    }

    Expr expr(const YAML::Node &n, const std::string &field) const {
        const std::string src = text(n, field);
        try {
            return Expr::parse(src, constants_);
        } catch (const ParseError &e) {
            throw ScenarioError(field, "expression \"" + src + "\": " + e.what() + where(n));
        }
    }

    std::vector<Expr> exprs(const YAML::Node &n, const std::string &field) const {
        if (!n.IsSequence()) throw ScenarioError(field, "expected a list of expressions" + where(n));
        std::vector<Expr> out;
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(expr(n[i], field + "[" + std::to_string(i) + "]"));
        return out;
    }

    /// Plain number or a constant expression such as "pi/2".
    double number(const YAML::Node &n, const std::string &field) const {
        const Expr e = expr(n, field);
        if (!e.free_vars().empty())
            throw ScenarioError(field, "expected a constant, found variable '" + e.free_vars().front() + "'" + where(n));
        try {
            return e.eval(VarBinding<double>{});
        } catch (const DomainError &err) {
            throw ScenarioError(field, err.what() + where(n));
        }
    }

    Vector vector(const YAML::Node &n, const std::string &field, std::size_t expected) const {
        if (!n.IsSequence()) throw ScenarioError(field, "expected a list of numbers" + where(n));
        if (n.size() != expected)
            throw ScenarioError(field, "expected " + std::to_string(expected) + " components, found " +
                                           std::to_string(n.size()) + where(n));
        Vector v(static_cast<Eigen::Index>(expected));
        for (std::size_t i = 0; i < expected; ++i)
            v(static_cast<Eigen::Index>(i)) = number(n[i], field + "[" + std::to_string(i) + "]");
        return v;
    }

    std::size_t count(const YAML::Node &n, const std::string &field) const {
        const double v = number(n, field);
        if (!(v >= 0) || v != std::floor(v)) throw ScenarioError(field, "expected a non-negative integer" + where(n));
        return static_cast<std::size_t>(v);
    }

    std::pair<double, double> interval(const YAML::Node &n, const std::string &field) const {
        const Vector v = vector(n, field, 2);
        if (!(v(1) >= v(0))) throw ScenarioError(field, "interval end precedes start" + where(n));
        return {v(0), v(1)};
    }

private:
    const Constants &constants_;
};

void check_keys(const YAML::Node &node, const std::string &path, std::initializer_list<const char *> allowed) {
    if (!node.IsMap()) throw ScenarioError(path, "expected a mapping" + where(node));
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &kv : node) {
        const std::string key = kv.first.Scalar();
        if (!ok.count(key)) throw ScenarioError(Reader::join(path, key), "unknown entry" + where(kv.first));
    }
}

void expect_size(const std::vector<Expr> &e, std::size_t n, const std::string &field) {
    if (e.size() != n)
        throw ScenarioError(field, "expected " + std::to_string(n) + " expressions, found " + std::to_string(e.size()));
}

FrameMap read_frame(const Reader &r, const YAML::Node &node, const std::string &path, std::size_t n) {
    const auto fwd = r.exprs(r.require(node, path, "forward"), path + ".forward");
    expect_size(fwd, n, path + ".forward");
    std::optional<std::vector<Expr>> inv;
    if (node["inverse"]) {
        inv = r.exprs(node["inverse"], path + ".inverse");
        expect_size(*inv, n, path + ".inverse");
    }
    TimeInterval valid;
    if (node["valid"]) {
        const auto [lo, hi] = r.interval(node["valid"], path + ".valid");
        valid = {lo, hi};
    }
    return FrameMap(fwd, inv, valid);
}

BoundaryData read_boundary(const Reader &r, const YAML::Node &node, const std::string &path, std::size_t n) {
    check_keys(node, path, {"start", "end", "interval", "nodes"});
    BoundaryData b;
    b.start = r.vector(r.require(node, path, "start"), path + ".start", n);
    b.end = r.vector(r.require(node, path, "end"), path + ".end", n);
    std::tie(b.a, b.b) = r.interval(r.require(node, path, "interval"), path + ".interval");
    if (node["nodes"]) b.nodes = r.count(node["nodes"], path + ".nodes");
    if (b.nodes < 2) throw ScenarioError(path + ".nodes", "at least two panels are required");
    return b;
}

const std::set<std::string> &check_kinds() {
    static const std::set<std::string> kinds{
        "frame_invariance",   "action_equivalence",  "reconstruction",    "motion_residual",
        "constraint_drift",   "constrained_invariance", "energy",          "boundary_solution",
        "boundary_convergence", "discrete_dalembert", "atlas_invariance",  "atlas_action",
        "expect_error"};
    return kinds;
}

Scenario build(const YAML::Node &root, const std::string &fallback_name) {
    if (!root || root.IsNull()) throw ScenarioError("", "empty scenario document");
    check_keys(root, "", {"name", "description", "parameters", "lagrangian", "frame", "constraint", "atlas", "solver",
                          "verify", "output"});
    Scenario s;
    s.name = root["name"] ? root["name"].Scalar() : fallback_name;
    if (root["description"]) s.description = root["description"].Scalar();

    if (const auto p = root["parameters"]) {
        if (!p.IsMap()) throw ScenarioError("parameters", "expected a mapping" + where(p));
        // Parameters may refer to earlier ones.
        for (const auto &kv : p) {
            const std::string key = kv.first.Scalar();
            if (is_chart_variable(key) || key == "pi")
                throw ScenarioError("parameters." + key, "name is reserved" + where(kv.first));
            s.parameters[key] = Reader(s.parameters).number(kv.second, "parameters." + key);
        }
    }
    const Reader r(s.parameters);

    if (const auto lag = root["lagrangian"]) {
        check_keys(lag, "lagrangian", {"dimension", "expression"});
        s.dimension = r.count(r.require(lag, "lagrangian", "dimension"), "lagrangian.dimension");
        if (s.dimension == 0) throw ScenarioError("lagrangian.dimension", "must be positive");
        s.lagrangian = r.expr(r.require(lag, "lagrangian", "expression"), "lagrangian.expression");
        for (const auto &v : s.lagrangian->free_vars()) {
            const bool ok = v == "t" || [&] {
                for (std::size_t i = 1; i <= s.dimension; ++i)
                    if (v == "q" + std::to_string(i) || v == "qd" + std::to_string(i)) return true;
                return false;
            }();
            if (!ok)
                throw ScenarioError("lagrangian.expression",
                                    "variable '" + v + "' is not a coordinate of a " + std::to_string(s.dimension) +
                                        "-dimensional chart");
        }
    }
    auto need_dimension = [&](const char *section) {
        if (s.dimension == 0)
            throw ScenarioError("lagrangian", std::string("section is required by the ") + section + " section");
    };

    if (const auto f = root["frame"]) {
        need_dimension("frame");
        check_keys(f, "frame", {"forward", "inverse", "valid"});
        s.frame = read_frame(r, f, "frame", s.dimension);
    }
    if (const auto c = root["constraint"]) {
        need_dimension("constraint");
        if (s.frame) throw ScenarioError("constraint", "a scenario may declare a frame or a constraint, not both");
        check_keys(c, "constraint", {"dimension", "forward", "residuals"});
        const std::size_t m = r.count(r.require(c, "constraint", "dimension"), "constraint.dimension");
        const auto fwd = r.exprs(r.require(c, "constraint", "forward"), "constraint.forward");
        expect_size(fwd, s.dimension, "constraint.forward");
        std::vector<Expr> res;
        if (c["residuals"]) res = r.exprs(c["residuals"], "constraint.residuals");
        try {
            s.constraint = ConstraintEmbedding(m, fwd, res);
        } catch (const DimensionMismatch &e) {
            throw ScenarioError("constraint", e.what());
        }
    }
    if (const auto a = root["atlas"]) {
        need_dimension("atlas");
        check_keys(a, "atlas", {"standard", "frames"});
        const std::string std_id = a["standard"] ? a["standard"].Scalar() : "standard";
        FrameAtlas atlas(s.dimension, std_id);
        const auto frames = r.require(a, "atlas", "frames");
        if (!frames.IsSequence()) throw ScenarioError("atlas.frames", "expected a list" + where(frames));
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const std::string path = "atlas.frames[" + std::to_string(i) + "]";
            check_keys(frames[i], path, {"id", "offset", "forward", "inverse", "valid"});
            const std::string id = r.text(r.require(frames[i], path, "id"), path + ".id");
            const double c = frames[i]["offset"] ? r.number(frames[i]["offset"], path + ".offset") : 0.0;
            try {
                atlas.add({id, c, read_frame(r, frames[i], path, s.dimension)});
            } catch (const ScenarioError &) {
                throw;
            } catch (const Error &e) {
                throw ScenarioError(path, e.what());
            }
        }
        s.atlas = std::move(atlas);
    }

    if (const auto sv = root["solver"]) {
        check_keys(sv, "solver", {"method", "step", "interval", "initial", "boundary"});
        if (sv["method"]) {
            try {
                s.solver.method = parse_method(sv["method"].Scalar());
            } catch (const Error &e) {
                throw ScenarioError("solver.method", e.what() + where(sv["method"]));
            }
        }
        if (sv["step"]) {
            s.solver.step = r.number(sv["step"], "solver.step");
            if (!(s.solver.step > 0)) throw ScenarioError("solver.step", "must be positive");
        }
        if (sv["interval"]) std::tie(s.solver.a, s.solver.b) = r.interval(sv["interval"], "solver.interval");
        if (const auto init = sv["initial"]) {
            need_dimension("solver.initial");
            check_keys(init, "solver.initial", {"chart", "position", "velocity"});
            InitialData d;
            if (init["chart"]) {
                const std::string chart = init["chart"].Scalar();
                if (chart != "fixed" && chart != "solve")
                    throw ScenarioError("solver.initial.chart", "expected 'fixed' or 'solve'" + where(init["chart"]));
                d.fixed_chart = chart == "fixed";
            }
            if (d.fixed_chart && !s.frame)
                throw ScenarioError("solver.initial.chart", "fixed-chart initial data needs a frame section");
            const std::size_t n = d.fixed_chart ? s.dimension : s.solve_dimension();
            d.position = r.vector(r.require(init, "solver.initial", "position"), "solver.initial.position", n);
            d.velocity = r.vector(r.require(init, "solver.initial", "velocity"), "solver.initial.velocity", n);
            s.solver.initial = d;
        }
        if (const auto bd = sv["boundary"]) {
            need_dimension("solver.boundary");
            s.solver.boundary = read_boundary(r, bd, "solver.boundary", s.solve_dimension());
        }
    }

    if (const auto v = root["verify"]) {
        check_keys(v, "verify", {"samples", "seed", "checks"});
        if (v["samples"]) s.verify.samples = r.count(v["samples"], "verify.samples");
        if (v["seed"]) s.verify.seed = r.count(v["seed"], "verify.seed");
        const auto checks = r.require(v, "verify", "checks");
        if (!checks.IsSequence()) throw ScenarioError("verify.checks", "expected a list" + where(checks));
        for (std::size_t i = 0; i < checks.size(); ++i) {
            const std::string path = "verify.checks[" + std::to_string(i) + "]";
            const auto c = checks[i];
            check_keys(c, path, {"kind", "name", "tolerance", "lower", "exact", "expect", "pipeline", "boundary"});
            CheckSpec spec;
            spec.kind = r.text(r.require(c, path, "kind"), path + ".kind");
            if (!check_kinds().count(spec.kind))
                throw ScenarioError(path + ".kind", "unknown check kind '" + spec.kind + "'" + where(c["kind"]));
            spec.name = c["name"] ? c["name"].Scalar() : spec.kind;
            if (spec.kind != "expect_error")
                spec.tolerance = r.number(r.require(c, path, "tolerance"), path + ".tolerance");
            if (c["lower"]) spec.lower = r.number(c["lower"], path + ".lower");
            if (c["exact"]) spec.exact = r.exprs(c["exact"], path + ".exact");
            if (c["boundary"]) spec.boundary = read_boundary(r, c["boundary"], path + ".boundary", s.solve_dimension());
            if (spec.kind == "expect_error") {
                spec.expect = r.text(r.require(c, path, "expect"), path + ".expect");
                spec.pipeline = c["pipeline"] ? c["pipeline"].Scalar() : "ivp";
                if (spec.pipeline != "ivp" && spec.pipeline != "bvp")
                    throw ScenarioError(path + ".pipeline", "expected 'ivp' or 'bvp'");
            }
            s.verify.checks.push_back(std::move(spec));
        }
    }

    if (const auto o = root["output"]) {
        check_keys(o, "output", {"trajectory", "report"});
        if (o["trajectory"]) s.output.trajectory = o["trajectory"].Scalar();
        if (o["report"]) s.output.report = o["report"].Scalar();
    }
    if (s.output.trajectory.empty()) s.output.trajectory = s.name + "_trajectory.csv";
    if (s.output.report.empty()) s.output.report = s.name + "_report";
    return s;
}

} // namespace

LagrangianSystem Scenario::fixed_lagrangian() const {
    if (!lagrangian) throw ScenarioError("lagrangian", "missing required section");
    return LagrangianSystem::from_expression(*lagrangian, dimension, atlas ? atlas->standard_id() : "q");
}

LagrangianSystem Scenario::solve_lagrangian() const {
    const LagrangianSystem L = fixed_lagrangian();
    if (frame) return pullback_lagrangian(L, *frame);
    if (constraint) return intrinsic_lagrangian(L, *constraint);
    return L;
}

std::size_t Scenario::solve_dimension() const {
    if (constraint) return constraint->intrinsic_dimension();
    return dimension;
}

const ParametricMap *Scenario::solve_map() const {
    if (frame) return &frame->forward();
    if (constraint) return &constraint->map();
    return nullptr;
}

Scenario parse_scenario(const std::string &text, const std::string &fallback_name) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception &e) {
        throw ScenarioError("", "YAML syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                                    std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    try {
        return build(root, fallback_name);
    } catch (const YAML::Exception &e) {
        throw ScenarioError("", "malformed scenario at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

Scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("", "cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.stem().string());
}

} // namespace dalembert
