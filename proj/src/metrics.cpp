#include "lmd/metrics.hpp"

#include <cmath>
#include <complex>

#include "lmd/csv.hpp"
#include "lmd/fft.hpp"

namespace lmd {

Field2D autocorrelation(const Field2D& u) {
    const int nx = u.nx, ny = u.ny;
    const std::size_t n = u.size();
    std::vector<std::complex<double>> work(u.v.begin(), u.v.end());
    Fft2 fft(ny, nx);
    fft.forward(work.data());
    for (auto& z : work) z = std::norm(z);
    fft.inverse(work.data());
    Field2D s(ny, nx);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) s.v[i] = work[i].real() * inv_n;
    return s;
}

std::optional<double> ac_relative_error(const Field2D& u_true, const Field2D& u_pred) {
    if (!u_true.same_shape(u_pred))
        throw ShapeError("ac_relative_error: field shapes differ");
    const Field2D st = autocorrelation(u_true);
    const Field2D sp = autocorrelation(u_pred);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) {
        const double d = sp.v[i] - st.v[i];
        num += d * d;
        den += st.v[i] * st.v[i];
    }
    if (den == 0.0) return std::nullopt;
    return std::sqrt(num / den);
}

std::optional<double> qoi_relative_error(const std::vector<std::optional<double>>& q_true,
                                         const std::vector<std::optional<double>>& q_pred) {
    if (q_true.size() != q_pred.size())
        throw ConfigError("qoi_relative_error: sequence lengths differ");
    double num = 0.0, den = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < q_true.size(); ++i) {
        if (!q_true[i] || !q_pred[i]) continue; // undefined slots drop out pairwise
        const double d = *q_pred[i] - *q_true[i];
        num += d * d;
        den += *q_true[i] * *q_true[i];
        any = true;
    }
    if (!any || den == 0.0) return std::nullopt;
    return std::sqrt(num / den);
}

std::vector<AcErrorRecord> pairwise_discrepancy(const std::vector<std::vector<FieldState>>& runs) {
    if (runs.size() < 2) throw ConfigError("pairwise_discrepancy: need at least two runs");
    const std::size_t n_times = runs[0].size();
    for (const auto& run : runs) {
        if (run.size() != n_times)
            throw ConfigError("pairwise_discrepancy: runs have different lengths");
        for (std::size_t t = 0; t < n_times; ++t)
            if (run[t].step != runs[0][t].step)
                throw ConfigError("pairwise_discrepancy: misaligned timelines at steps " +
                                  std::to_string(run[t].step) + " vs " +
                                  std::to_string(runs[0][t].step));
    }

    std::vector<AcErrorRecord> out;
    out.reserve(n_times);
    for (std::size_t t = 0; t < n_times; ++t) {
        AcErrorRecord rec;
        rec.step = runs[0][t].step;
        rec.time_s = runs[0][t].time_s;
        const auto mean_over_pairs = [&](auto field_of) -> std::optional<double> {
            double acc = 0.0;
            int count = 0;
            for (std::size_t i = 0; i < runs.size(); ++i) {
                for (std::size_t j = i + 1; j < runs.size(); ++j) {
                    const auto e = ac_relative_error(field_of(runs[i][t]), field_of(runs[j][t]));
                    if (!e) return std::nullopt;
                    acc += *e;
                    ++count;
                }
            }
            return acc / count;
        };
        rec.eac_phi = mean_over_pairs([](const FieldState& s) -> const Field2D& { return s.phi; });
        rec.eac_cA = mean_over_pairs([](const FieldState& s) -> const Field2D& { return s.cA; });
        rec.eac_cB = mean_over_pairs([](const FieldState& s) -> const Field2D& { return s.cB; });
        out.push_back(rec);
    }
    return out;
}

void write_ac_error_csv(const std::vector<AcErrorRecord>& records, const std::string& path) {
    CsvWriter csv(path);
    csv.header({"step", "time_s", "eac_phi", "eac_cA", "eac_cB"});
    for (const auto& r : records) {
        csv.field(r.step);
        csv.field(r.time_s);
        csv.field(r.eac_phi);
        csv.field(r.eac_cA);
        csv.field(r.eac_cB);
        csv.end_row();
    }
}

} // namespace lmd
