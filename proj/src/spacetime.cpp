#include "dalembert/spacetime.hpp"

#include <algorithm>

#include "dalembert/parametric_map.hpp"

namespace dalembert {

namespace {

TimeInterval shifted(const TimeInterval &v, double by) { return {v.lo + by, v.hi + by}; }

TimeInterval intersect(const TimeInterval &a, const TimeInterval &b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

} // namespace

FrameAtlas::FrameAtlas(std::size_t n, std::string standard_id) : n_(n) {
    frames_.push_back({std::move(standard_id), 0.0, FrameMap::identity(n)});
}

void FrameAtlas::add(ReferenceFrame frame) {
    if (frame.to_standard.dimension() != n_)
        throw DimensionMismatch("frame '" + frame.id + "' has dimension " +
                                std::to_string(frame.to_standard.dimension()) + ", atlas has " + std::to_string(n_));
    for (const auto &f : frames_)
        if (f.id == frame.id) throw Error("duplicate frame id '" + frame.id + "'");
    if (!frame.to_standard.inverse())
        throw Error("frame '" + frame.id + "' needs an explicit inverse to take part in an atlas");
    frames_.push_back(std::move(frame));
}

const ReferenceFrame &FrameAtlas::frame(const std::string &id) const {
    for (const auto &f : frames_)
        if (f.id == id) return f;
    throw UnknownFrame(id);
}

Transition FrameAtlas::transition(const std::string &from, const std::string &to) const {
    const ReferenceFrame &b = frame(from);
    const ReferenceFrame &a = frame(to);
    if (from == to) return {FrameMap::identity(n_), 0.0};
    // q_a = X_a(F_b(q_b, tau), tau) with tau = t_b + c_b; the inverse swaps roles.
    const ParametricMap fwd = a.to_standard.inverse()->compose(b.to_standard.forward()).shifted_time(b.offset);
    const ParametricMap inv = b.to_standard.inverse()->compose(a.to_standard.forward()).shifted_time(b.offset);
    const TimeInterval valid =
        shifted(intersect(a.to_standard.valid(), b.to_standard.valid()), -b.offset);
    return {FrameMap(fwd, inv, valid), b.offset - a.offset};
}

LagrangianSystem frame_lagrangian(const FrameAtlas &atlas, const LagrangianSystem &L_std, const std::string &target) {
    const ReferenceFrame &f = atlas.frame(target);
    if (L_std.dimension() != atlas.dimension())
        throw DimensionMismatch("standard Lagrangian dimension differs from atlas dimension");
    return pullback_through(L_std, f.to_standard.forward().shifted_time(f.offset), f.offset, f.id);
}

AnalyticCurve WorldLine::in_frame(const FrameAtlas &atlas, const std::string &id) const {
    const ReferenceFrame &f = atlas.frame(id);
    if (standard_.dimension() != atlas.dimension()) throw DimensionMismatch("world line dimension differs from atlas");
    const ParametricMap curve(0, standard_.components());
    return AnalyticCurve(f.to_standard.inverse()->compose(curve).shifted_time(f.offset).forward());
}

Vector vertical_in_frame(const FrameAtlas &atlas, const std::string &id, const Vector &q_std, double tau,
                         const Vector &eta_std) {
    const ReferenceFrame &f = atlas.frame(id);
    f.to_standard.check_time(tau);
    return f.to_standard.inverse()->jacobian(q_std, tau) * eta_std;
}

InvarianceReport invariance_report(const FrameAtlas &atlas, const LagrangianSystem &L_std, const WorldLine &line,
                                   const DisplacementField &displacement, const std::vector<double> &times) {
    InvarianceReport report;
    std::vector<LagrangianSystem> lags;
    std::vector<AnalyticCurve> curves;
    for (const auto &f : atlas.frames()) {
        report.frames.push_back(f.id);
        lags.push_back(frame_lagrangian(atlas, L_std, f.id));
        curves.push_back(line.in_frame(atlas, f.id));
    }
    for (double tau : times) {
        const CurveJet std_jet = line.standard().jet(tau);
        const Vector eta = displacement.at(std_jet.pos, tau);
        InvarianceSample s{tau, {}, 0.0};
        for (std::size_t i = 0; i < lags.size(); ++i) {
            const ReferenceFrame &f = atlas.frames()[i];
            const Vector eta_f = vertical_in_frame(atlas, f.id, std_jet.pos, tau, eta);
            s.values.push_back(variational_derivative(lags[i], curves[i].jet(tau - f.offset), eta_f));
        }
        const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
        s.discrepancy = *hi - *lo;
        report.max_discrepancy = std::max(report.max_discrepancy, s.discrepancy);
        report.samples.push_back(std::move(s));
    }
    return report;
}

} // namespace dalembert
