#pragma once

// Space-time as a trivial fibration over absolute time, realized through a
// standard frame. Every reference frame carries a clock offset c (absolute
// time = frame time + c) and a spatial map into standard coordinates,
// written in absolute time.

#include <cstddef>
#include <string>
#include <vector>

#include "dalembert/frames.hpp"
#include "dalembert/mechanics.hpp"

namespace dalembert {

struct ReferenceFrame {
    std::string id;
    double offset = 0.0;
    /// q_std = F(x, tau), tau absolute time.
    FrameMap to_standard;
};

/// Spatial map q_to = G(q_from, t_from) together with t_to = t_from + offset.
struct Transition {
    FrameMap map;
    double offset = 0.0;
};

class FrameAtlas {
public:
    /// The standard frame has offset 0 and identity spatial map.
    FrameAtlas(std::size_t n, std::string standard_id = "standard");

    /// Throws DimensionMismatch, and Error on a duplicate id or a
    /// non-standard frame without an explicit inverse.
    void add(ReferenceFrame frame);

    std::size_t dimension() const noexcept { return n_; }
    const std::string &standard_id() const noexcept { return frames_.front().id; }
    const std::vector<ReferenceFrame> &frames() const noexcept { return frames_; }
    /// Throws UnknownFrame.
    const ReferenceFrame &frame(const std::string &id) const;

    /// Composite through the standard frame. Throws UnknownFrame.
    Transition transition(const std::string &from, const std::string &to) const;

private:
    std::size_t n_;
    std::vector<ReferenceFrame> frames_;
};

/// Standard-frame Lagrangian seen in `target`: L(F(x, t + c), J xd + dF/dtau, t + c).
LagrangianSystem frame_lagrangian(const FrameAtlas &atlas, const LagrangianSystem &L_std, const std::string &target);

/// A time line, one standard-frame expression of absolute time per coordinate.
class WorldLine {
public:
    explicit WorldLine(AnalyticCurve standard) : standard_(std::move(standard)) {}

    const AnalyticCurve &standard() const noexcept { return standard_; }

    /// The same line in frame coordinates, parameterized by frame time.
    AnalyticCurve in_frame(const FrameAtlas &atlas, const std::string &id) const;

private:
    AnalyticCurve standard_;
};

struct InvarianceSample {
    double time = 0.0;          // absolute
    std::vector<double> values; // one per frame, atlas order
    double discrepancy = 0.0;   // max - min over frames
};

struct InvarianceReport {
    std::vector<std::string> frames;
    std::vector<InvarianceSample> samples;
    double max_discrepancy = 0.0;
};

/// Vertical displacement in frame coordinates: dG/dq_std . eta_std at the event.
Vector vertical_in_frame(const FrameAtlas &atlas, const std::string &id, const Vector &q_std, double tau,
                         const Vector &eta_std);

/// Variational derivative of every frame Lagrangian along the world line
/// against the standard-frame displacement field, at the given absolute
/// times. Throws FrameValidityError.
InvarianceReport invariance_report(const FrameAtlas &atlas, const LagrangianSystem &L_std, const WorldLine &line,
                                   const DisplacementField &displacement, const std::vector<double> &times);

} // namespace dalembert
