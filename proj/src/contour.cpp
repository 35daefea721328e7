#include "lmd/contour.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lmd/errors.hpp"

namespace lmd {

double wrap_delta(double d) {
    if (d > 0.5) return d - 1.0;
    if (d < -0.5) return d + 1.0;
    return d;
}

double InterfaceCurve::length() const {
    const int n = size();
    if (n < 2) return 0.0;
    double len = 0.0;
    const int last = closed ? n : n - 1;
    for (int i = 0; i < last; ++i) {
        const int j = (i + 1) % n;
        const double dx = wrap_delta(x[j] - x[i]);
        const double dy = y[j] - y[i];
        len += std::hypot(dx, dy);
    }
    return len;
}

namespace {

struct Point {
    double x, y;
};

// Grid edges carry at most one crossing each. Horizontal edge (ix, iy) joins
// nodes (ix, iy)-(ix+1, iy); vertical edge joins (ix, iy)-(ix, iy+1).
struct EdgeId {
    bool vertical;
    int ix, iy;
    bool operator==(const EdgeId&) const = default;
};

struct EdgeHash {
    std::size_t operator()(const EdgeId& e) const {
        return std::hash<long long>()(((long long)e.iy << 24) ^ ((long long)e.ix << 1) ^
                                      (e.vertical ? 1 : 0));
    }
};

struct Segment {
    EdgeId from, to;
};

} // namespace

std::vector<InterfaceCurve> extract_interface(const Field2D& f, double level) {
    const int nx = f.nx, ny = f.ny;
    const auto node_x = [&](int ix) { return (ix + 0.5) / nx; };
    const auto node_y = [&](int iy) { return (iy + 0.5) / ny; };
    const auto inside = [&](int iy, int ix) { return f.at(iy, ix) > level; };

    std::unordered_map<EdgeId, Point, EdgeHash> crossings;
    const auto crossing = [&](const EdgeId& e) -> Point {
        auto it = crossings.find(e);
        if (it != crossings.end()) return it->second;
        const int ax = e.ix, ay = e.iy;
        const int bx = e.vertical ? e.ix : (e.ix + 1) % nx;
        const int by = e.vertical ? e.iy + 1 : e.iy;
        const double fa = f.at(ay, ax), fb = f.at(by, bx);
        const double t = (level - fa) / (fb - fa);
        Point p;
        if (e.vertical) {
            p = {node_x(ax), node_y(ay) + t * (node_y(by) - node_y(ay))};
        } else {
            // The seam edge (ix = nx-1) reaches node 0 one period to the right.
            const double xb = e.ix + 1 == nx ? node_x(ax) + 1.0 / nx : node_x(bx);
            double px = node_x(ax) + t * (xb - node_x(ax));
            if (px >= 1.0) px -= 1.0;
            p = {px, node_y(ay)};
        }
        crossings.emplace(e, p);
        return p;
    };

    // Cell-local edge ids: B(ottom), T(op), L(eft), R(ight).
    std::vector<Segment> segments;
    for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const int xr = (ix + 1) % nx;
            const bool b0 = inside(iy, ix);      // bottom-left
            const bool b1 = inside(iy, xr);      // bottom-right
            const bool b2 = inside(iy + 1, xr);  // top-right
            const bool b3 = inside(iy + 1, ix);  // top-left
            const int mask = (b0 ? 1 : 0) | (b1 ? 2 : 0) | (b2 ? 4 : 0) | (b3 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;

            const EdgeId B{false, ix, iy};
            const EdgeId T{false, ix, iy + 1};
            const EdgeId L{true, ix, iy};
            const EdgeId R{true, xr, iy};
            const auto emit = [&](EdgeId from, EdgeId to) { segments.push_back({from, to}); };

            switch (mask) {
                case 1: emit(B, L); break;
                case 2: emit(R, B); break;
                case 4: emit(T, R); break;
                case 8: emit(L, T); break;
                case 3: emit(R, L); break;
                case 6: emit(T, B); break;
                case 12: emit(L, R); break;
                case 9: emit(B, T); break;
                case 14: emit(L, B); break;
                case 13: emit(B, R); break;
                case 11: emit(R, T); break;
                case 7: emit(T, L); break;
                case 5: { // saddles: connect by the cell-average rule
                    const double mean = 0.25 * (f.at(iy, ix) + f.at(iy, xr) + f.at(iy + 1, xr) +
                                                f.at(iy + 1, ix));
                    if (mean > level) {
                        emit(B, R);
                        emit(T, L);
                    } else {
                        emit(B, L);
                        emit(T, R);
                    }
                    break;
                }
                case 10: {
                    const double mean = 0.25 * (f.at(iy, ix) + f.at(iy, xr) + f.at(iy + 1, xr) +
                                                f.at(iy + 1, ix));
                    if (mean > level) {
                        emit(L, B);
                        emit(R, T);
                    } else {
                        emit(R, B);
                        emit(L, T);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // Chain segments: each crossed edge has at most one outgoing and one
    // incoming segment, so curves follow uniquely.
    std::unordered_map<EdgeId, int, EdgeHash> out_of, into;
    for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
        out_of[segments[i].from] = i;
        into[segments[i].to] = i;
    }

    std::vector<bool> used(segments.size(), false);
    std::vector<InterfaceCurve> curves;
    const auto walk = [&](int start, bool closed) {
        InterfaceCurve c;
        c.closed = closed;
        int s = start;
        const Point first = crossing(segments[s].from);
        c.x.push_back(first.x);
        c.y.push_back(first.y);
        while (true) {
            used[s] = true;
            const Point p = crossing(segments[s].to);
            c.x.push_back(p.x);
            c.y.push_back(p.y);
            auto next = out_of.find(segments[s].to);
            if (next == out_of.end() || used[next->second]) break;
            s = next->second;
        }
        if (closed && c.size() > 1) { // drop the repeated closing vertex
            c.x.pop_back();
            c.y.pop_back();
        }
        // Remove consecutive duplicates from crossings that hit grid nodes.
        InterfaceCurve clean;
        clean.closed = c.closed;
        for (int i = 0; i < c.size(); ++i) {
            const int n = clean.size();
            if (n > 0 && std::abs(wrap_delta(c.x[i] - clean.x[n - 1])) < 1e-15 &&
                std::abs(c.y[i] - clean.y[n - 1]) < 1e-15)
                continue;
            clean.x.push_back(c.x[i]);
            clean.y.push_back(c.y[i]);
        }
        if (clean.closed && clean.size() > 1 &&
            std::abs(wrap_delta(clean.x.back() - clean.x.front())) < 1e-15 &&
            std::abs(clean.y.back() - clean.y.front()) < 1e-15) {
            clean.x.pop_back();
            clean.y.pop_back();
        }
        if (clean.size() >= 3) curves.push_back(std::move(clean));
    };

    // Open chains first (their start edges have no incoming segment).
    for (int i = 0; i < static_cast<int>(segments.size()); ++i)
        if (!used[i] && into.find(segments[i].from) == into.end()) walk(i, false);
    // Whatever remains sits on closed loops.
    for (int i = 0; i < static_cast<int>(segments.size()); ++i)
        if (!used[i]) walk(i, true);

    return curves;
}

InterfaceCurve resample_uniform(const InterfaceCurve& curve, double ds) {
    const int n = curve.size();
    if (n < 2) throw NumericError("resample: degenerate curve");
    if (!(ds > 0.0)) throw NumericError("resample: ds must be positive");

    // Unwrap x so interpolation is continuous across the seam.
    std::vector<double> ux(n), cum(n + 1, 0.0);
    ux[0] = curve.x[0];
    for (int i = 1; i < n; ++i) ux[i] = ux[i - 1] + wrap_delta(curve.x[i] - curve.x[i - 1]);
    const int nseg = curve.closed ? n : n - 1;
    std::vector<double> sx(nseg + 1), sy(nseg + 1);
    for (int i = 0; i <= nseg; ++i) {
        if (i < n) {
            sx[i] = ux[i];
            sy[i] = curve.y[i];
        } else { // closing segment back to the (unwrapped) first vertex
            sx[i] = ux[n - 1] + wrap_delta(curve.x[0] - curve.x[n - 1]);
            sy[i] = curve.y[0];
        }
        if (i > 0) cum[i] = cum[i - 1] + std::hypot(sx[i] - sx[i - 1], sy[i] - sy[i - 1]);
    }
    const double total = cum[nseg];
    if (!(total > 0.0) || ds > total) throw NumericError("resample: ds exceeds curve length");

    InterfaceCurve out;
    out.closed = curve.closed;
    const int count = curve.closed ? std::max(4, static_cast<int>(std::llround(total / ds)))
                                   : std::max(2, static_cast<int>(std::llround(total / ds)) + 1);
    const double step = curve.closed ? total / count : total / (count - 1);
    int seg = 0;
    for (int i = 0; i < count; ++i) {
        double s = std::min(i * step, total);
        while (seg + 1 < nseg && cum[seg + 1] < s) ++seg;
        const double span = cum[seg + 1] - cum[seg];
        const double t = span > 0.0 ? (s - cum[seg]) / span : 0.0;
        double px = sx[seg] + t * (sx[seg + 1] - sx[seg]);
        const double py = sy[seg] + t * (sy[seg + 1] - sy[seg]);
        px -= std::floor(px); // wrap back into [0,1)
        out.x.push_back(px);
        out.y.push_back(py);
    }
    if (!curve.closed) { // pin the far endpoint exactly
        out.x.back() = curve.x[n - 1];
        out.y.back() = curve.y[n - 1];
    }
    return out;
}

} // namespace lmd
