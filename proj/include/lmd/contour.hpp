#pragma once

#include <vector>

#include "lmd/field.hpp"

namespace lmd {

// Level-set polyline in unit-normalized domain coordinates. x wraps
// periodically (period 1); curves are oriented so the region above the level
// lies on the left of the direction of travel, which makes the signed
// curvature of a solid disk positive.
struct InterfaceCurve {
    std::vector<double> x;
    std::vector<double> y;
    bool closed = false;

    int size() const { return static_cast<int>(x.size()); }
    // Polyline length with minimal-image x differences (seam-crossing curves
    // store wrapped coordinates).
    double length() const;
};

// Shortest periodic representative of a coordinate difference in x.
double wrap_delta(double d);

// Marching squares on `f` at `level` with linear edge interpolation. Field
// samples sit at cell centers ((ix+0.5)/nx, (iy+0.5)/ny). Segments are
// chained into curves; chains crossing the periodic x-seam come out stitched;
// saddle cells connect according to whether the cell-average exceeds the
// level. Fields without crossings yield an empty set.
std::vector<InterfaceCurve> extract_interface(const Field2D& f, double level = 0.5);

// Resamples to uniform arc spacing ds by linear interpolation; endpoints of
// open curves are preserved. Throws NumericError when ds exceeds the total
// length.
InterfaceCurve resample_uniform(const InterfaceCurve& curve, double ds);

} // namespace lmd
