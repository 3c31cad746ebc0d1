#include "dalembert/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace dalembert {

namespace {

using Index = Eigen::Index;

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

private:
    std::mt19937_64 rng_;
};

// x_i(t) = c0 + c1 t + c2 sin(c3 t + c4), kept away from the origin so polar
// and angular charts stay regular.
std::vector<Expr> random_curve(Sampler &s, std::size_t n) {
    std::vector<Expr> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string text = fmt17(s(1.0, 2.0)) + " + " + fmt17(s(-0.1, 0.1)) + "*t + " + fmt17(s(-0.3, 0.3)) +
                                 "*sin(" + fmt17(s(0.5, 2.0)) + "*t + " + fmt17(s(0.0, std::numbers::pi)) + ")";
        out.push_back(Expr::parse(text));
    }
    return out;
}

// xi_i(q, t) = d0 + d1 q_i + d2 t.
DisplacementField random_field(Sampler &s, std::size_t n) {
    std::vector<Expr> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string text = fmt17(s(-1.0, 1.0)) + " + " + fmt17(s(-1.0, 1.0)) + "*q" + std::to_string(i + 1) +
                                 " + " + fmt17(s(-1.0, 1.0)) + "*t";
        out.push_back(Expr::parse(text));
    }
    return DisplacementField(std::move(out));
}

double sup_error(const std::vector<CurveJet> &samples, const std::vector<Expr> &exact) {
    if (samples.empty()) return 0.0;
    if (exact.size() != static_cast<std::size_t>(samples.front().pos.size()))
        throw ScenarioError("verify.checks.exact", "expected " + std::to_string(samples.front().pos.size()) +
                                                       " expressions, found " + std::to_string(exact.size()));
    const AnalyticCurve curve(exact);
    double e = 0.0;
    for (const auto &s : samples) e = std::max(e, (s.pos - curve.jet(s.t).pos).lpNorm<Eigen::Infinity>());
    return e;
}

double path_error(const DiscretePath &p, const std::vector<Expr> &exact) {
    std::vector<CurveJet> nodes;
    for (std::size_t k = 0; k <= p.panels(); ++k) nodes.push_back({p.time(k), p.nodes.col(static_cast<Index>(k)), {}, {}});
    return sup_error(nodes, exact);
}

const BoundaryData &boundary_of(const Scenario &sc, const std::optional<BoundaryData> &override) {
    if (override) return *override;
    if (!sc.solver.boundary) throw ScenarioError("solver.boundary", "missing boundary data");
    return *sc.solver.boundary;
}

const ParametricMap &require_map(const Scenario &sc, const char *what) {
    const ParametricMap *m = sc.solve_map();
    if (!m) throw ScenarioError("verify.checks", std::string(what) + " needs a frame or constraint section");
    return *m;
}

// Random jets and displacements in the solve chart; compares the fixed-chart
// variational derivative against displacements pushed through the map.
double pushforward_identity(const Scenario &sc, Sampler &s) {
    const ParametricMap &map = require_map(sc, "this check");
    const LagrangianSystem L = sc.fixed_lagrangian();
    const LagrangianSystem l = sc.solve_lagrangian();
    const std::size_t m = sc.solve_dimension();
    double worst = 0.0;
    for (std::size_t k = 0; k < sc.verify.samples; ++k) {
        const AnalyticCurve curve(random_curve(s, m));
        const DisplacementField xi = random_field(s, m);
        const double t = s(sc.solver.a, sc.solver.b);
        const CurveJet g = curve.jet(t);
        const Vector xv = xi.at(g.pos, t);
        const double rhs = variational_derivative(l, g, xv);
        const double lhs = variational_derivative(L, map.push_jet(g), map.jacobian(g.pos, t) * xv);
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
    return worst;
}

double action_equivalence(const Scenario &sc, Sampler &s) {
    const ParametricMap &map = require_map(sc, "action_equivalence");
    const LagrangianSystem L = sc.fixed_lagrangian();
    const LagrangianSystem l = sc.solve_lagrangian();
    double worst = 0.0;
    const std::size_t curves = std::min<std::size_t>(sc.verify.samples, 5);
    for (std::size_t k = 0; k < curves; ++k) {
        const auto moving = random_curve(s, sc.solve_dimension());
        const AnalyticCurve fixed(map.compose(ParametricMap(0, moving)).forward());
        const double sl = action_integral(l, AnalyticCurve(moving), sc.solver.a, sc.solver.b);
        const double sL = action_integral(L, fixed, sc.solver.a, sc.solver.b);
        worst = std::max(worst, std::abs(sl - sL));
    }
    return worst;
}

const FrameAtlas &require_atlas(const Scenario &sc) {
    if (!sc.atlas) throw ScenarioError("atlas", "this check needs an atlas section");
    return *sc.atlas;
}

double atlas_invariance(const Scenario &sc, Sampler &s) {
    const FrameAtlas &atlas = require_atlas(sc);
    const LagrangianSystem L = sc.fixed_lagrangian();
    double worst = 0.0;
    for (std::size_t k = 0; k < sc.verify.samples; ++k) {
        const WorldLine line{AnalyticCurve(random_curve(s, sc.dimension))};
        const DisplacementField eta = random_field(s, sc.dimension);
        const double tau = s(sc.solver.a, sc.solver.b);
        worst = std::max(worst, invariance_report(atlas, L, line, eta, {tau}).max_discrepancy);
    }
    return worst;
}

double atlas_action(const Scenario &sc, Sampler &s) {
    const FrameAtlas &atlas = require_atlas(sc);
    const LagrangianSystem L = sc.fixed_lagrangian();
    double worst = 0.0;
    const std::size_t lines = std::min<std::size_t>(sc.verify.samples, 5);
    for (std::size_t k = 0; k < lines; ++k) {
        const WorldLine line{AnalyticCurve(random_curve(s, sc.dimension))};
        const double ref = action_integral(L, line.standard(), sc.solver.a, sc.solver.b);
        for (const auto &f : atlas.frames()) {
            const double v = action_integral(frame_lagrangian(atlas, L, f.id), line.in_frame(atlas, f.id),
                                             sc.solver.a - f.offset, sc.solver.b - f.offset);
            worst = std::max(worst, std::abs(v - ref));
        }
    }
    return worst;
}

double motion_residual(const Scenario &sc, const SolveResult &r) {
    const LagrangianSystem L = sc.fixed_lagrangian();
    double worst = 0.0;
    if (sc.constraint) {
        for (const auto &s : r.solve.samples) worst = std::max(worst, dalembert_check(L, *sc.constraint, s));
        return worst;
    }
    const Trajectory &traj = r.fixed ? *r.fixed : r.solve;
    for (const auto &s : traj.samples) worst = std::max(worst, el_residual(L, s).lpNorm<Eigen::Infinity>());
    return worst;
}

double energy_drift(const Scenario &sc, const SolveResult &r) {
    const LagrangianSystem l = sc.solve_lagrangian();
    const auto &first = r.solve.samples.front();
    const double e0 = jacobi_energy(l, first.pos, first.vel, first.t);
    double worst = 0.0;
    for (const auto &s : r.solve.samples) worst = std::max(worst, std::abs(jacobi_energy(l, s.pos, s.vel, s.t) - e0));
    return worst;
}

double discrete_dalembert(const Scenario &sc, const DiscretePath &p, Sampler &s) {
    const Matrix g = discrete_action_gradient(sc.solve_lagrangian(), p);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        double pairing = 0.0;
        for (Index j = 1; j + 1 < g.cols(); ++j)
            for (Index i = 0; i < g.rows(); ++i) pairing += g(i, j) * s(-1.0, 1.0);
        worst = std::max(worst, std::abs(pairing));
    }
    return worst;
}

double simpson_on_samples(const LagrangianSystem &L, const Trajectory &tr) {
    const auto &s = tr.samples;
    if (s.size() < 2) return 0.0;
    auto f = [&](std::size_t k) { return L(s[k].pos, s[k].vel, s[k].t); };
    const std::size_t steps = s.size() - 1;
    const std::size_t pairs = steps / 2;
    double sum = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) sum += (f(2 * p) + 4.0 * f(2 * p + 1) + f(2 * p + 2)) * tr.step / 3.0;
    if (steps % 2) sum += 0.5 * tr.step * (f(steps - 1) + f(steps));
    return sum;
}

DiscretePath nodes_of(const Trajectory &tr) {
    DiscretePath p{Matrix(tr.samples.front().pos.size(), static_cast<Index>(tr.samples.size())), tr.samples.front().t,
                   tr.samples.back().t, false, false};
    for (std::size_t k = 0; k < tr.samples.size(); ++k) p.nodes.col(static_cast<Index>(k)) = tr.samples[k].pos;
    return p;
}

} // namespace

std::string error_kind(const std::exception &e) {
    if (dynamic_cast<const DegenerateLagrangian *>(&e)) return "DegenerateLagrangian";
    if (dynamic_cast<const NonConvergence *>(&e)) return "NonConvergence";
    if (dynamic_cast<const NewtonDivergence *>(&e)) return "NewtonDivergence";
    if (dynamic_cast<const DomainError *>(&e)) return "DomainError";
    if (dynamic_cast<const ParseError *>(&e)) return "ParseError";
    if (dynamic_cast<const UnboundVariable *>(&e)) return "UnboundVariable";
    if (dynamic_cast<const DimensionMismatch *>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const SingularJacobian *>(&e)) return "SingularJacobian";
    if (dynamic_cast<const RankDeficiency *>(&e)) return "RankDeficiency";
    if (dynamic_cast<const InversionFailure *>(&e)) return "InversionFailure";
    if (dynamic_cast<const FrameValidityError *>(&e)) return "FrameValidityError";
    if (dynamic_cast<const AsymmetricHessian *>(&e)) return "AsymmetricHessian";
    if (dynamic_cast<const UnknownFrame *>(&e)) return "UnknownFrame";
    if (dynamic_cast<const ScenarioError *>(&e)) return "ScenarioError";
    if (dynamic_cast<const Error *>(&e)) return "Error";
    return "exception";
}

SolveResult run_solve(const Scenario &sc) {
    const LagrangianSystem l = sc.solve_lagrangian();
    if (!sc.solver.initial) throw ScenarioError("solver.initial", "missing initial data for the solve pipeline");
    Vector x0 = sc.solver.initial->position, v0 = sc.solver.initial->velocity;
    if (sc.solver.initial->fixed_chart) {
        const auto pulled = pull_velocity(*sc.frame, {"q", x0, v0, sc.solver.a});
        x0 = pulled.position;
        v0 = pulled.velocity;
    }
    SolveResult r{integrate_el(l, x0, v0, sc.solver.a, sc.solver.b, sc.solver.step, sc.solver.method), std::nullopt};
    if (const ParametricMap *map = sc.solve_map()) {
        if (sc.frame)
            r.fixed = map_trajectory(*sc.frame, r.solve);
        else {
            Trajectory fixed{"q", {}, r.solve.step, r.solve.method};
            for (const auto &s : r.solve.samples) fixed.samples.push_back(map->push_jet(s));
            r.fixed = std::move(fixed);
        }
    }
    return r;
}

DiscretePath run_boundary(const Scenario &sc, const std::optional<BoundaryData> &override) {
    const BoundaryData &b = boundary_of(sc, override);
    return stationary_action_solve(sc.solve_lagrangian(), b.start, b.end, b.a, b.b, b.nodes);
}

void write_csv(std::ostream &out, const SolveResult &r) {
    const auto m = r.solve.samples.empty() ? 0 : r.solve.samples.front().pos.size();
    const auto n = r.fixed && !r.fixed->samples.empty() ? r.fixed->samples.front().pos.size() : 0;
    out << "t";
    for (Index i = 1; i <= m; ++i) out << ",x" << i;
    for (Index i = 1; i <= m; ++i) out << ",xd" << i;
    for (Index i = 1; i <= n; ++i) out << ",q" << i;
    for (Index i = 1; i <= n; ++i) out << ",qd" << i;
    out << '\n';
    for (std::size_t k = 0; k < r.solve.samples.size(); ++k) {
        const auto &s = r.solve.samples[k];
        out << fmt17(s.t);
        for (Index i = 0; i < m; ++i) out << ',' << fmt17(s.pos(i));
        for (Index i = 0; i < m; ++i) out << ',' << fmt17(s.vel(i));
        if (n) {
            const auto &f = r.fixed->samples[k];
            for (Index i = 0; i < n; ++i) out << ',' << fmt17(f.pos(i));
            for (Index i = 0; i < n; ++i) out << ',' << fmt17(f.vel(i));
        }
        out << '\n';
    }
}

std::string check_anchor(const std::string &kind) {
    static const std::map<std::string, std::string> anchors{
        {"frame_invariance", "variational derivative is invariant under a moving frame"},
        {"action_equivalence", "actions agree along curves related by a moving frame"},
        {"reconstruction", "computed motion matches the closed-form motion"},
        {"motion_residual", "d'Alembert principle along the computed motion"},
        {"constraint_drift", "reconstructed motion stays on the constraint"},
        {"constrained_invariance", "intrinsic variational derivative equals the ambient one on virtual displacements"},
        {"energy", "Jacobi energy is conserved for time-independent Lagrangians"},
        {"boundary_solution", "stationary discrete action matches the closed-form motion"},
        {"boundary_convergence", "second-order convergence of the stationary discrete action"},
        {"discrete_dalembert", "discrete d'Alembert principle on the stationary path"},
        {"atlas_invariance", "variational derivative does not depend on the reference frame"},
        {"atlas_action", "actions agree in every reference frame between the same events"},
        {"expect_error", "degenerate problems are refused"},
    };
    const auto it = anchors.find(kind);
    return it == anchors.end() ? kind : it->second;
}

bool VerificationReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord &c) { return c.pass; });
}

std::string VerificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["status"] = pass() ? "pass" : "fail";
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto &c : checks) {
        nlohmann::ordered_json r;
        r["name"] = c.name;
        r["kind"] = c.kind;
        r["anchor"] = c.anchor;
        r["value"] = c.value ? nlohmann::ordered_json(*c.value) : nlohmann::ordered_json(nullptr);
        if (c.lower) r["lower"] = *c.lower;
        r["tolerance"] = c.tolerance;
        r["pass"] = c.pass;
        if (!c.note.empty()) r["note"] = c.note;
        j["checks"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

std::string VerificationReport::to_text() const {
    std::ostringstream os;
    os << "scenario " << scenario << ": " << (pass() ? "PASS" : "FAIL") << '\n';
    for (const auto &c : checks) {
        os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << " (" << c.anchor << ")";
        if (c.value) {
            os << ": value " << shortest(*c.value);
            if (c.lower)
                os << " in [" << shortest(*c.lower) << ", " << shortest(c.tolerance) << "]";
            else
                os << " <= " << shortest(c.tolerance);
        }
        if (!c.note.empty()) os << " -- " << c.note;
        os << '\n';
    }
    return os.str();
}

VerificationReport run_verify(const Scenario &sc, double tol_scale) {
    VerificationReport report{sc.name, {}};
    std::optional<SolveResult> solved;
    auto solve = [&]() -> const SolveResult & {
        if (!solved) solved = run_solve(sc);
        return *solved;
    };

    for (std::size_t idx = 0; idx < sc.verify.checks.size(); ++idx) {
        const CheckSpec &spec = sc.verify.checks[idx];
        CheckRecord rec{spec.name, spec.kind, check_anchor(spec.kind), std::nullopt, spec.tolerance * tol_scale,
                        std::nullopt, false, ""};
        Sampler rng(sc.verify.seed * 1000003ULL + idx);
        try {
            const std::string &k = spec.kind;
            double value = 0.0;
            if (k == "frame_invariance") {
                if (!sc.frame) throw ScenarioError("frame", "frame_invariance needs a frame section");
                value = pushforward_identity(sc, rng);
            } else if (k == "constrained_invariance") {
                if (!sc.constraint) throw ScenarioError("constraint", "constrained_invariance needs a constraint section");
                value = pushforward_identity(sc, rng);
            } else if (k == "action_equivalence") {
                value = action_equivalence(sc, rng);
            } else if (k == "reconstruction") {
                const SolveResult &r = solve();
                value = sup_error(r.fixed ? r.fixed->samples : r.solve.samples, spec.exact);
            } else if (k == "motion_residual") {
                value = motion_residual(sc, solve());
            } else if (k == "constraint_drift") {
                if (!sc.constraint) throw ScenarioError("constraint", "constraint_drift needs a constraint section");
                const auto d = constraint_drift(*sc.constraint, *solve().fixed);
                value = d.value;
                rec.note = d.note;
            } else if (k == "energy") {
                value = energy_drift(sc, solve());
            } else if (k == "boundary_solution") {
                value = path_error(run_boundary(sc, spec.boundary), spec.exact);
            } else if (k == "boundary_convergence") {
                BoundaryData b = boundary_of(sc, spec.boundary);
                const double e1 = path_error(run_boundary(sc, b), spec.exact);
                b.nodes *= 2;
                const double e2 = path_error(run_boundary(sc, b), spec.exact);
                value = e1 / e2;
                rec.lower = spec.lower.value_or(3.5);
                rec.tolerance = spec.tolerance; // ratio bounds are not scaled
            } else if (k == "discrete_dalembert") {
                value = discrete_dalembert(sc, run_boundary(sc, spec.boundary), rng);
            } else if (k == "atlas_invariance") {
                value = atlas_invariance(sc, rng);
            } else if (k == "atlas_action") {
                value = atlas_action(sc, rng);
            } else if (k == "expect_error") {
                try {
                    if (spec.pipeline == "bvp")
                        (void)run_boundary(sc, spec.boundary);
                    else
                        (void)run_solve(sc);
                    rec.note = "completed without error; expected " + spec.expect;
                } catch (const ScenarioError &) {
                    throw;
                } catch (const std::exception &e) {
                    rec.pass = error_kind(e) == spec.expect;
                    rec.note = error_kind(e) + ": " + e.what();
                }
                report.checks.push_back(std::move(rec));
                continue;
            }
            rec.value = value;
            rec.pass = std::isfinite(value) && value <= rec.tolerance && (!rec.lower || value >= *rec.lower);
        } catch (const std::exception &e) {
            rec.pass = false;
            rec.note = error_kind(e) + ": " + e.what();
        }
        report.checks.push_back(std::move(rec));
    }
    return report;
}

std::vector<ActionValue> run_action(const Scenario &sc) {
    std::vector<ActionValue> out;
    if (sc.solver.initial) {
        const SolveResult r = run_solve(sc);
        const LagrangianSystem l = sc.solve_lagrangian();
        out.push_back({"ivp.continuous", simpson_on_samples(l, r.solve)});
        if (r.solve.samples.size() >= 2) out.push_back({"ivp.discrete", discrete_action(l, nodes_of(r.solve))});
        if (r.fixed) out.push_back({"ivp.fixed_chart_continuous", simpson_on_samples(sc.fixed_lagrangian(), *r.fixed)});
    }
    if (sc.solver.boundary) {
        const DiscretePath p = run_boundary(sc);
        out.push_back({"bvp.discrete", discrete_action(sc.solve_lagrangian(), p)});
    }
    if (out.empty()) throw ScenarioError("solver", "the action pipeline needs initial or boundary data");
    return out;
}

} // namespace dalembert
