#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmd/contour.hpp"
#include "lmd/field.hpp"

namespace lmd {

// Per-snapshot scalar quantities. Optional entries model the N/A cases that
// appear once the solid-liquid interface vanishes.
struct QoiRecord {
    std::uint64_t step = 0;
    double time_s = 0.0;
    std::optional<double> mu_k;    // mean |curvature|, 1/unit-length
    std::optional<double> sigma_k; // std of |curvature|
    double perimeter = 0.0;        // unit-normalized
    std::optional<double> mu_d;    // mean ligament height
    std::optional<double> max_p;   // maximum penetration depth
    double m_phi = 0.0, m_A = 0.0, m_B = 0.0; // nm^2
};

struct QoiOptions {
    double level = 0.5;
    double ds = 0.0;    // resampling arc step; 0 selects one grid cell
    bool smooth = true; // 5-point box smoothing of vertex coordinates
};

// Signed curvature k = (x'y'' - y'x'') / (x'^2 + y'^2)^{3/2} along a
// uniformly resampled curve, derivatives by central differences over the arc
// index (periodic wrap when closed, one-sided at open ends). Requires at
// least 5 vertices.
std::vector<double> curvature_profile(const InterfaceCurve& curve, bool smooth = true);

// Arc-length-weighted mean and standard deviation of |k| pooled over all
// curves (islands and bubbles included). Empty input yields no value.
struct CurvatureStats {
    std::optional<double> mu_k;
    std::optional<double> sigma_k;
};
CurvatureStats curvature_stats(const std::vector<InterfaceCurve>& curves, bool smooth = true);

// Total polyline length over all curves; 0 for an empty set.
double perimeter(const std::vector<InterfaceCurve>& curves);

// Strict local extrema of y(s) pooled over all curves. Plateaus contribute
// their midpoint vertex once; open-curve endpoints are not classified.
struct ExtremaSets {
    std::vector<double> minima;
    std::vector<double> maxima;
};
ExtremaSets extrema_sets(const std::vector<InterfaceCurve>& curves);

// mu_d = E[S_max] - E[S_min]; max_p = 1 - min(S_min). Each is absent when its
// prerequisite set is empty.
struct LigamentDepth {
    std::optional<double> mu_d;
    std::optional<double> max_p;
};
LigamentDepth ligament_and_depth(const ExtremaSets& s);

// Mass integrals of phi, cA, cB in nm^2.
struct Masses {
    double m_phi, m_A, m_B;
};
Masses masses(const FieldState& state);

// Full record for one state.
QoiRecord qoi_record(const FieldState& state, const QoiOptions& opt = {});

// Records for a sequence of snapshot files, ordered by time. Unreadable
// files raise IoError naming the offending path.
std::vector<QoiRecord> qoi_timeseries(const std::vector<std::string>& snapshot_paths,
                                      double dx_nm = 0.2, const QoiOptions& opt = {});

// CSV with columns step,time_s,mu_k,sigma_k,perimeter,mu_d,max_p,m_phi,m_A,m_B
// and empty cells for undefined entries.
void write_qoi_csv(const std::vector<QoiRecord>& records, const std::string& path);
std::vector<QoiRecord> read_qoi_csv(const std::string& path);

} // namespace lmd
