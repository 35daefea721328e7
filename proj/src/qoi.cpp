#include "lmd/qoi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lmd/csv.hpp"
#include "lmd/snapshot.hpp"

namespace lmd {

namespace {

// Unwraps the periodic x coordinate along the curve so differencing sees a
// continuous function.
std::vector<double> unwrap_x(const InterfaceCurve& c) {
    std::vector<double> ux(c.size());
    if (c.size() == 0) return ux;
    ux[0] = c.x[0];
    for (int i = 1; i < c.size(); ++i) ux[i] = ux[i - 1] + wrap_delta(c.x[i] - c.x[i - 1]);
    return ux;
}

// 5-point box smoothing; windows shrink at open ends, wrap when closed.
// Closed-curve x must go through box5_closed_x below instead, since its
// unwrapped values jump by one period at the seam.
std::vector<double> box5(const std::vector<double>& v, bool closed) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (int d = -2; d <= 2; ++d) {
            int j = i + d;
            if (closed)
                j = (j % n + n) % n;
            else if (j < 0 || j >= n)
                continue;
            acc += v[j];
            ++cnt;
        }
        out[i] = acc / cnt;
    }
    return out;
}

// Periodic 5-point box smoothing for the unwrapped x of a closed curve: the
// wrap from vertex n-1 back to 0 advances by the signed period `span`.
std::vector<double> box5_closed_x(const std::vector<double>& ux, double span) {
    const int n = static_cast<int>(ux.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int d = -2; d <= 2; ++d) {
            int j = i + d;
            double shift = 0.0;
            if (j < 0) {
                j += n;
                shift = -span;
            } else if (j >= n) {
                j -= n;
                shift = span;
            }
            acc += ux[j] + shift;
        }
        out[i] = acc / 5.0;
    }
    return out;
}

} // namespace

std::vector<double> curvature_profile(const InterfaceCurve& curve, bool smooth) {
    const int n = curve.size();
    if (n < 5) throw NumericError("curvature: need at least 5 vertices");

    std::vector<double> x = unwrap_x(curve);
    std::vector<double> y = curve.y;
    // Signed advance of x over one full loop (0 for loops that do not wind
    // around the torus, +-1 for seam-wrapping interfaces).
    const double span = curve.closed ? x[n - 1] + wrap_delta(curve.x[0] - curve.x[n - 1]) - x[0]
                                     : 0.0;
    if (smooth) {
        if (curve.closed) {
            x = box5_closed_x(x, span);
            y = box5(y, true);
        } else {
            x = box5(x, false);
            y = box5(y, false);
        }
    }

    const double total = curve.length();
    const int nseg = curve.closed ? n : n - 1;
    const double h = total / nseg;

    std::vector<double> k(n);
    const auto get = [&](const std::vector<double>& v, int i, double shift_per_wrap) {
        if (i < 0) return v[i + n] - shift_per_wrap;
        if (i >= n) return v[i - n] + shift_per_wrap;
        return v[i];
    };
    for (int i = 0; i < n; ++i) {
        double x1, y1, x2, y2;
        if (!curve.closed && (i == 0 || i == n - 1)) {
            const int a = i == 0 ? 0 : n - 3;
            x1 = i == 0 ? (x[1] - x[0]) / h : (x[n - 1] - x[n - 2]) / h;
            y1 = i == 0 ? (y[1] - y[0]) / h : (y[n - 1] - y[n - 2]) / h;
            x2 = (x[a + 2] - 2.0 * x[a + 1] + x[a]) / (h * h);
            y2 = (y[a + 2] - 2.0 * y[a + 1] + y[a]) / (h * h);
        } else {
            const double xm = get(x, i - 1, span), xp = get(x, i + 1, span);
            const double ym = get(y, i - 1, 0.0), yp = get(y, i + 1, 0.0);
            x1 = (xp - xm) / (2.0 * h);
            y1 = (yp - ym) / (2.0 * h);
            x2 = (xp - 2.0 * x[i] + xm) / (h * h);
            y2 = (yp - 2.0 * y[i] + ym) / (h * h);
        }
        const double speed2 = x1 * x1 + y1 * y1;
        k[i] = speed2 > 1e-30 ? (x1 * y2 - y1 * x2) / std::pow(speed2, 1.5) : 0.0;
    }
    return k;
}

CurvatureStats curvature_stats(const std::vector<InterfaceCurve>& curves, bool smooth) {
    double wsum = 0.0, mean_acc = 0.0;
    std::vector<std::pair<double, double>> samples; // (|k|, weight)
    for (const auto& c : curves) {
        if (c.size() < 5) continue;
        const auto k = curvature_profile(c, smooth);
        const int n = c.size();
        const int nseg = c.closed ? n : n - 1;
        const double h = c.length() / nseg;
        for (int i = 0; i < n; ++i) {
            double w = h;
            if (!c.closed && (i == 0 || i == n - 1)) w = 0.5 * h;
            samples.emplace_back(std::abs(k[i]), w);
            wsum += w;
            mean_acc += std::abs(k[i]) * w;
        }
    }
    if (wsum == 0.0) return {};
    const double mu = mean_acc / wsum;
    double var_acc = 0.0;
    for (const auto& [ak, w] : samples) var_acc += w * (ak - mu) * (ak - mu);
    return {mu, std::sqrt(var_acc / wsum)};
}

double perimeter(const std::vector<InterfaceCurve>& curves) {
    double total = 0.0;
    for (const auto& c : curves) total += c.length();
    return total;
}

ExtremaSets extrema_sets(const std::vector<InterfaceCurve>& curves) {
    ExtremaSets out;
    constexpr double plateau_eps = 1e-12;
    for (const auto& c : curves) {
        const int n = c.size();
        if (n < 3) continue;
        // Compress consecutive equal-y vertices into runs.
        std::vector<double> run_y;
        std::vector<int> run_start, run_len;
        for (int i = 0; i < n; ++i) {
            if (!run_y.empty() && std::abs(c.y[i] - run_y.back()) <= plateau_eps) {
                ++run_len.back();
            } else {
                run_y.push_back(c.y[i]);
                run_start.push_back(i);
                run_len.push_back(1);
            }
        }
        int m = static_cast<int>(run_y.size());
        if (c.closed && m > 1 && std::abs(run_y.front() - run_y.back()) <= plateau_eps) {
            run_len.front() += run_len.back(); // the run wraps across the seam
            run_y.pop_back();
            run_start.pop_back();
            run_len.pop_back();
            --m;
        }
        if (m < 2) continue; // constant-height curve: no strict extrema
        for (int r = 0; r < m; ++r) {
            int prev = r - 1, next = r + 1;
            if (c.closed) {
                prev = (prev + m) % m;
                next = next % m;
            } else if (prev < 0 || next >= m) {
                continue; // open-curve end runs cannot be classified
            }
            const double dp = run_y[r] - run_y[prev];
            const double dn = run_y[next] - run_y[r];
            if (dp < 0.0 && dn > 0.0)
                out.minima.push_back(run_y[r]);
            else if (dp > 0.0 && dn < 0.0)
                out.maxima.push_back(run_y[r]);
        }
    }
    return out;
}

LigamentDepth ligament_and_depth(const ExtremaSets& s) {
    LigamentDepth out;
    if (!s.minima.empty()) {
        double lo = s.minima[0];
        for (double v : s.minima) lo = std::min(lo, v);
        out.max_p = 1.0 - lo;
        if (!s.maxima.empty()) {
            double sum_min = 0.0, sum_max = 0.0;
            for (double v : s.minima) sum_min += v;
            for (double v : s.maxima) sum_max += v;
            out.mu_d = sum_max / s.maxima.size() - sum_min / s.minima.size();
        }
    }
    return out;
}

Masses masses(const FieldState& state) {
    return {field_integral_nm2(state.phi, state.grid), field_integral_nm2(state.cA, state.grid),
            field_integral_nm2(state.cB, state.grid)};
}

QoiRecord qoi_record(const FieldState& state, const QoiOptions& opt) {
    QoiRecord r;
    r.step = state.step;
    r.time_s = state.time_s;
    const Masses m = masses(state);
    r.m_phi = m.m_phi;
    r.m_A = m.m_A;
    r.m_B = m.m_B;

    const double ds = opt.ds > 0.0 ? opt.ds : 2.0 / std::max(state.grid.nx, state.grid.ny);
    auto raw = extract_interface(state.phi, opt.level);
    std::vector<InterfaceCurve> curves;
    for (const auto& c : raw) {
        if (c.length() < 2.0 * ds) continue; // fragments below the sampling scale
        curves.push_back(resample_uniform(c, ds));
    }
    r.perimeter = perimeter(curves);
    const CurvatureStats ks = curvature_stats(curves, opt.smooth);
    r.mu_k = ks.mu_k;
    r.sigma_k = ks.sigma_k;
    const LigamentDepth ld = ligament_and_depth(extrema_sets(curves));
    r.mu_d = ld.mu_d;
    r.max_p = ld.max_p;
    return r;
}

std::vector<QoiRecord> qoi_timeseries(const std::vector<std::string>& snapshot_paths,
                                      double dx_nm, const QoiOptions& opt) {
    std::vector<QoiRecord> records;
    records.reserve(snapshot_paths.size());
    for (const auto& path : snapshot_paths) {
        FieldState s = read_snapshot(path, dx_nm); // IoError already names the file
        records.push_back(qoi_record(s, opt));
    }
    std::sort(records.begin(), records.end(), [](const QoiRecord& a, const QoiRecord& b) {
        return a.time_s != b.time_s ? a.time_s < b.time_s : a.step < b.step;
    });
    return records;
}

void write_qoi_csv(const std::vector<QoiRecord>& records, const std::string& path) {
    CsvWriter csv(path);
    csv.header({"step", "time_s", "mu_k", "sigma_k", "perimeter", "mu_d", "max_p", "m_phi", "m_A",
                "m_B"});
    for (const auto& r : records) {
        csv.field(r.step);
        csv.field(r.time_s);
        csv.field(r.mu_k);
        csv.field(r.sigma_k);
        csv.field(r.perimeter);
        csv.field(r.mu_d);
        csv.field(r.max_p);
        csv.field(r.m_phi);
        csv.field(r.m_A);
        csv.field(r.m_B);
        csv.end_row();
    }
}

std::vector<QoiRecord> read_qoi_csv(const std::string& path) {
    CsvReader csv(path);
    std::vector<QoiRecord> records;
    std::vector<std::string> row;
    bool first = true;
    while (csv.next(row)) {
        if (first) { // header
            first = false;
            continue;
        }
        if (row.size() != 10) throw IoError("qoi csv: malformed row in " + path);
        QoiRecord r;
        r.step = static_cast<std::uint64_t>(std::stoull(row[0]));
        r.time_s = std::stod(row[1]);
        const auto opt = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        r.mu_k = opt(row[2]);
        r.sigma_k = opt(row[3]);
        r.perimeter = std::stod(row[4]);
        r.mu_d = opt(row[5]);
        r.max_p = opt(row[6]);
        r.m_phi = std::stod(row[7]);
        r.m_A = std::stod(row[8]);
        r.m_B = std::stod(row[9]);
        records.push_back(r);
    }
    return records;
}

} // namespace lmd
