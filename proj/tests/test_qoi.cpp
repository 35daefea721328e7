#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lmd/qoi.hpp"
#include "lmd/snapshot.hpp"
#include "support.hpp"

using namespace lmd;

namespace {

constexpr double kPi = std::numbers::pi;

// Solid disk: phi ramps linearly from 1 inside to 0 outside across a band of
// `width` (normalized units), crossing 0.5 exactly on the circle.
Field2D disk_field(int n, double cx, double cy, double r, double width) {
    Field2D f(n, n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double x = (ix + 0.5) / n, y = (iy + 0.5) / n;
            const double d = std::hypot(x - cx, y - cy);
            f.at(iy, ix) = std::clamp(0.5 + (r - d) / width, 0.0, 1.0);
        }
    return f;
}

// Solid below the curve y0 + a sin(2 pi m x).
Field2D sine_field(int n, double y0, double a, int m, double width) {
    Field2D f(n, n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double x = (ix + 0.5) / n, y = (iy + 0.5) / n;
            const double yc = y0 + a * std::sin(2.0 * kPi * m * x);
            f.at(iy, ix) = std::clamp(0.5 + (yc - y) / width, 0.0, 1.0);
        }
    return f;
}

InterfaceCurve circle_curve(double r, int n) {
    InterfaceCurve c;
    c.closed = true;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        c.x.push_back(0.5 + r * std::cos(t));
        c.y.push_back(0.5 + r * std::sin(t));
    }
    return c;
}

} // namespace

TEST_CASE("extract: flat interface becomes one seam-stitched loop at the right height") {
    const int n = 64;
    Field2D f(n, n);
    const double y0 = 0.6;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            f.at(iy, ix) = std::clamp(0.5 + (y0 - (iy + 0.5) / n) / (6.0 / n), 0.0, 1.0);
    const auto curves = extract_interface(f);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].closed); // wraps the periodic x-seam
    CHECK(curves[0].size() == n);
    for (double y : curves[0].y) CHECK(y == doctest::Approx(y0).epsilon(1e-6));
    CHECK(curves[0].length() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("extract: disk yields one closed curve with about one vertex per cell crossed") {
    const int n = 256;
    const double r = 0.25;
    const auto curves = extract_interface(disk_field(n, 0.5, 0.5, r, 8.0 / n));
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].closed);
    const double expected = 2.0 * kPi * r * n; // crossings of the cell lattice
    CHECK(curves[0].size() > 0.8 * expected);
    CHECK(curves[0].size() < 1.6 * expected);
}

TEST_CASE("extract: uniform fields have no interface") {
    Field2D ones(16, 16, 1.0);
    CHECK(extract_interface(ones).empty());
    Field2D zeros(16, 16, 0.0);
    CHECK(extract_interface(zeros).empty());
}

TEST_CASE("resample: circle at ds = 2 pi r / n gives n uniform vertices") {
    const auto raw = circle_curve(0.25, 977); // deliberately uneven count
    const double target = 2.0 * kPi * 0.25;
    const auto rs = resample_uniform(raw, target / 128.0);
    CHECK(rs.size() == 128);
    // Uniform spacing: every gap within a tight band of the mean.
    const double mean_gap = rs.length() / rs.size();
    for (int i = 0; i < rs.size(); ++i) {
        const int j = (i + 1) % rs.size();
        const double gap = std::hypot(wrap_delta(rs.x[j] - rs.x[i]), rs.y[j] - rs.y[i]);
        CHECK(gap == doctest::Approx(mean_gap).epsilon(1e-3));
    }
}

TEST_CASE("resample: length preserved to second order and idempotent") {
    const auto raw = circle_curve(0.2, 4096);
    const double true_len = 2.0 * kPi * 0.2;
    for (int n : {32, 64, 128}) {
        const auto rs = resample_uniform(raw, true_len / n);
        // Chordal underestimate of a circle's length shrinks like ds^2.
        const double deficit = true_len - rs.length();
        CHECK(deficit > 0.0);
        CHECK(deficit < 8.0 * true_len / (n * double(n)));
    }
    const auto once = resample_uniform(raw, true_len / 200);
    const auto twice = resample_uniform(once, true_len / 200);
    REQUIRE(once.size() == twice.size());
    for (int i = 0; i < once.size(); ++i) {
        CHECK(std::abs(wrap_delta(once.x[i] - twice.x[i])) < (true_len / 200) * 1e-6);
        CHECK(std::abs(once.y[i] - twice.y[i]) < (true_len / 200) * 1e-6);
    }
}

TEST_CASE("resample rejects degenerate requests") {
    const auto c = circle_curve(0.1, 64);
    CHECK_THROWS_AS(resample_uniform(c, 10.0), NumericError);
    InterfaceCurve tiny;
    tiny.x = {0.5};
    tiny.y = {0.5};
    CHECK_THROWS_AS(resample_uniform(tiny, 0.01), NumericError);
}

TEST_CASE("curvature: extracted circle has k near +1/r everywhere") {
    const int n = 256;
    const double r = 0.25;
    const auto curves = extract_interface(disk_field(n, 0.5, 0.5, r, 8.0 / n));
    REQUIRE(curves.size() == 1);
    const auto rs = resample_uniform(curves[0], 2.0 / n);
    const auto k = curvature_profile(rs, true);
    for (double v : k) CHECK(v == doctest::Approx(1.0 / r).epsilon(0.02));
}

TEST_CASE("curvature: straight line is flat, reversal flips the sign") {
    InterfaceCurve line;
    line.closed = false;
    for (int i = 0; i < 64; ++i) {
        line.x.push_back(0.2 + 0.6 * i / 63.0);
        line.y.push_back(0.4);
    }
    for (double v : curvature_profile(line, false)) CHECK(std::abs(v) < 1e-6);

    const auto circle = circle_curve(0.25, 256);
    InterfaceCurve reversed = circle;
    std::reverse(reversed.x.begin(), reversed.x.end());
    std::reverse(reversed.y.begin(), reversed.y.end());
    const auto kf = curvature_profile(circle, false);
    const auto kb = curvature_profile(reversed, false);
    for (std::size_t i = 0; i < kf.size(); ++i) {
        CHECK(kf[i] > 0.0); // counterclockwise
        CHECK(kb[kf.size() - 1 - i] == doctest::Approx(-kf[i]).epsilon(1e-9));
    }
    InterfaceCurve too_short = line;
    too_short.x.resize(4);
    too_short.y.resize(4);
    CHECK_THROWS_AS(curvature_profile(too_short, false), NumericError);
}

TEST_CASE("curvature stats pool curves by arc length") {
    const auto one = circle_curve(0.2, 512);
    const auto stats1 = curvature_stats({one}, false);
    REQUIRE(stats1.mu_k.has_value());
    CHECK(*stats1.mu_k == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(*stats1.sigma_k < 0.01 * *stats1.mu_k);

    // Two equal circles: pooling keeps the mean.
    const auto stats2 = curvature_stats({one, circle_curve(0.2, 512)}, false);
    CHECK(*stats2.mu_k == doctest::Approx(*stats1.mu_k).epsilon(1e-12));

    // Circle plus a straight segment of equal length: the mean halves.
    const double r = 0.1;
    const auto small = circle_curve(r, 512);
    const double len = 2.0 * kPi * r;
    InterfaceCurve seg;
    seg.closed = false;
    const int m = 512;
    for (int i = 0; i < m; ++i) {
        seg.x.push_back(0.1 + len * i / (m - 1));
        seg.y.push_back(0.5);
    }
    const auto pooled = curvature_stats({small, seg}, false);
    CHECK(*pooled.mu_k == doctest::Approx(0.5 / r).epsilon(0.01));
}

TEST_CASE("perimeter: circle, flat interface, additivity") {
    const int n = 256;
    const auto circle = extract_interface(disk_field(n, 0.5, 0.5, 0.25, 8.0 / n));
    CHECK(perimeter(circle) == doctest::Approx(2.0 * kPi * 0.25).epsilon(0.01));

    CHECK(perimeter({}) == 0.0);

    const auto a = circle_curve(0.1, 128);
    const auto b = circle_curve(0.2, 128);
    CHECK(perimeter({a, b}) == doctest::Approx(a.length() + b.length()).epsilon(1e-12));
}

TEST_CASE("extrema: sine interface has m minima and maxima at the right heights") {
    const int n = 256;
    const double y0 = 0.55, a = 0.1;
    const int m = 3;
    const auto curves = extract_interface(sine_field(n, y0, a, m, 8.0 / n));
    REQUIRE(curves.size() == 1);
    std::vector<InterfaceCurve> rs{resample_uniform(curves[0], 1.0 / n)};
    const auto ext = extrema_sets(rs);
    CHECK(ext.minima.size() == m);
    CHECK(ext.maxima.size() == m);
    const double tol = 2.0 / n; // one vertex spacing
    for (double v : ext.maxima) CHECK(std::abs(v - (y0 + a)) < tol);
    for (double v : ext.minima) CHECK(std::abs(v - (y0 - a)) < tol);
}

TEST_CASE("extrema: flat interface has none, circle has one of each") {
    const int n = 64;
    Field2D flat(n, n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            flat.at(iy, ix) = std::clamp(0.5 + (0.5 - (iy + 0.5) / n) / (6.0 / n), 0.0, 1.0);
    const auto fc = extract_interface(flat);
    REQUIRE(fc.size() == 1);
    const auto fe = extrema_sets({resample_uniform(fc[0], 1.0 / n)});
    CHECK(fe.minima.empty());
    CHECK(fe.maxima.empty());

    const auto cc = extract_interface(disk_field(256, 0.5, 0.5, 0.25, 8.0 / 256));
    const auto ce = extrema_sets({resample_uniform(cc[0], 1.0 / 256)});
    CHECK(ce.minima.size() == 1);
    CHECK(ce.maxima.size() == 1);
}

TEST_CASE("ligament height and penetration depth") {
    ExtremaSets s;
    s.minima = {0.2, 0.4};
    s.maxima = {0.7, 0.9};
    const auto ld = ligament_and_depth(s);
    CHECK(*ld.mu_d == doctest::Approx(0.5));
    CHECK(*ld.max_p == doctest::Approx(0.8));

    const auto empty = ligament_and_depth({});
    CHECK(!empty.mu_d.has_value());
    CHECK(!empty.max_p.has_value());

    // Sine interface of amplitude a: mean ligament height is 2a.
    const int n = 256;
    const auto curves = extract_interface(sine_field(n, 0.5, 0.08, 4, 8.0 / n));
    const auto ld2 = ligament_and_depth(extrema_sets({resample_uniform(curves[0], 1.0 / n)}));
    REQUIRE(ld2.mu_d.has_value());
    CHECK(*ld2.mu_d == doctest::Approx(0.16).epsilon(0.05));
}

TEST_CASE("masses: production domain value, zero field, additivity") {
    GridSpec g{512, 512, 0.2};
    FieldState s(g);
    for (double& v : s.phi.v) v = 1.0;
    const Masses m = masses(s);
    CHECK(m.m_phi == doctest::Approx(10485.76).epsilon(1e-12)); // (102.4 nm)^2
    CHECK(m.m_A == 0.0);

    // Additivity over disjoint halves.
    GridSpec h{16, 16, 0.2};
    FieldState sh(h);
    for (int iy = 0; iy < 8; ++iy)
        for (int ix = 0; ix < 16; ++ix) sh.cA.at(iy, ix) = 0.5;
    for (int iy = 8; iy < 16; ++iy)
        for (int ix = 0; ix < 16; ++ix) sh.cA.at(iy, ix) = 0.25;
    const double lower = 8 * 16 * 0.5 * 0.04, upper = 8 * 16 * 0.25 * 0.04;
    CHECK(masses(sh).m_A == doctest::Approx(lower + upper).epsilon(1e-12));
}

TEST_CASE("qoi record: translation and periodic-shift invariance of interface stats") {
    const int n = 128;
    GridSpec g{n, n, 0.2};
    FieldState s(g);
    s.phi = disk_field(n, 0.5, 0.5, 0.2, 8.0 / n);
    const QoiRecord base = qoi_record(s);
    REQUIRE(base.mu_k.has_value());
    CHECK(*base.mu_k == doctest::Approx(5.0).epsilon(0.02));
    CHECK(base.perimeter == doctest::Approx(2.0 * kPi * 0.2).epsilon(0.01));

    // Shift the field periodically in x by 17 cells: stats identical.
    FieldState shifted(g);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            shifted.phi.at(iy, ix) = s.phi.at(iy, (ix + 17) % n);
    const QoiRecord rec2 = qoi_record(shifted);
    CHECK(*rec2.mu_k == doctest::Approx(*base.mu_k).epsilon(1e-9));
    CHECK(rec2.perimeter == doctest::Approx(base.perimeter).epsilon(1e-9));

    // Translate the disk center: stats invariant to within the grid sampling.
    FieldState moved(g);
    moved.phi = disk_field(n, 0.37, 0.61, 0.2, 8.0 / n);
    const QoiRecord rec3 = qoi_record(moved);
    CHECK(*rec3.mu_k == doctest::Approx(*base.mu_k).epsilon(0.01));
    CHECK(rec3.perimeter == doctest::Approx(base.perimeter).epsilon(0.005));
}

TEST_CASE("qoi timeseries: composition, ordering, undefined propagation, errors") {
    lmd::test::TmpDir tmp("qoi_series");
    GridSpec g{64, 64, 0.2};

    FieldState s1(g);
    s1.phi = disk_field(64, 0.5, 0.5, 0.2, 8.0 / 64);
    s1.time_s = 2e-9;
    s1.step = 2000;
    write_snapshot(s1, tmp.file("snapshot_000000002000.pfld"));

    FieldState s0(g); // no interface at all
    s0.time_s = 1e-9;
    s0.step = 1000;
    write_snapshot(s0, tmp.file("snapshot_000000001000.pfld"));

    const auto recs = qoi_timeseries(
        {tmp.file("snapshot_000000002000.pfld"), tmp.file("snapshot_000000001000.pfld")}, 0.2);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].step == 1000); // ordered by time
    CHECK(!recs[0].mu_k.has_value());
    CHECK(!recs[0].mu_d.has_value());
    CHECK(recs[0].perimeter == 0.0);
    CHECK(recs[1].mu_k.has_value());

    CHECK_THROWS_WITH_AS(qoi_timeseries({tmp.file("missing.pfld")}, 0.2),
                         doctest::Contains("missing.pfld"), IoError);

    const std::string csv = tmp.file("qoi.csv");
    write_qoi_csv(recs, csv);
    const auto back = read_qoi_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(!back[0].mu_k.has_value());
    CHECK(back[1].mu_k.has_value());
    CHECK(*back[1].mu_k == doctest::Approx(*recs[1].mu_k).epsilon(1e-14));
}
