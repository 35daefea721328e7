#include "lmd/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "lmd/csv.hpp"
#include "lmd/metrics.hpp"
#include "lmd/snapshot.hpp"

namespace fs = std::filesystem;

namespace lmd {

std::vector<std::pair<std::uint64_t, std::string>> list_snapshots(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("snapshots: not a directory: " + dir);
    std::vector<std::pair<std::uint64_t, std::string>> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() < 14 || name.rfind("snapshot_", 0) != 0 ||
            name.substr(name.size() - 5) != ".pfld")
            continue;
        const std::string digits = name.substr(9, name.size() - 14);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            continue;
        out.emplace_back(std::stoull(digits), entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Dataset build_dataset(const std::vector<std::string>& run_dirs, const LeapSpec& leap) {
    leap.validate();
    Dataset ds;
    std::vector<std::string> dirs = run_dirs;
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        const auto snaps = list_snapshots(dir);
        std::map<std::uint64_t, std::string> by_step(snaps.begin(), snaps.end());
        for (const auto& [step, path] : snaps) {
            const std::uint64_t target = step + leap.leap_steps;
            auto it = by_step.find(target);
            if (it != by_step.end()) {
                ds.pairs.push_back({path, it->second, step, target});
            } else if (!by_step.empty() && by_step.rbegin()->first > step) {
                ++ds.skipped; // a later snapshot exists but not the counterpart
            }
        }
    }
    if (ds.pairs.empty())
        throw ConfigError("dataset: no (t, t+leap) snapshot pairs found for leap " +
                          std::to_string(leap.leap_steps));
    return ds;
}

ad::Tensor state_to_tensor(const FieldState& state) {
    const int h = state.grid.ny, w = state.grid.nx;
    ad::Tensor t = ad::Tensor::zeros({3, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::copy(state.phi.v.begin(), state.phi.v.end(), t.data->begin());
    std::copy(state.cA.v.begin(), state.cA.v.end(), t.data->begin() + static_cast<long>(plane));
    std::copy(state.cB.v.begin(), state.cB.v.end(),
              t.data->begin() + static_cast<long>(2 * plane));
    return t;
}

FieldState tensor_to_state(const ad::Tensor& t, const GridSpec& grid, double time_s,
                           std::uint64_t step) {
    if (t.shape != std::vector<int>{3, grid.ny, grid.nx} || t.complex_vals)
        throw ShapeError("tensor_to_state: expected (3," + std::to_string(grid.ny) + "," +
                         std::to_string(grid.nx) + "), got " + t.shape_str());
    FieldState s(grid);
    const std::size_t plane = static_cast<std::size_t>(grid.ny) * grid.nx;
    std::copy(t.data->begin(), t.data->begin() + static_cast<long>(plane), s.phi.v.begin());
    std::copy(t.data->begin() + static_cast<long>(plane),
              t.data->begin() + static_cast<long>(2 * plane), s.cA.v.begin());
    std::copy(t.data->begin() + static_cast<long>(2 * plane), t.data->end(), s.cB.v.begin());
    s.time_s = time_s;
    s.step = step;
    return s;
}

std::vector<double> train(Model& model, const Dataset& dataset, const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.pairs.empty()) throw ConfigError("train: empty dataset");

    ad::AdamState adam;
    adam.lr = cfg.lr;
    std::vector<ad::Tensor*> param_ptrs;
    for (auto& p : model.params) param_ptrs.push_back(&p);

    Rng shuffle_rng(cfg.seed);
    std::vector<std::size_t> order(dataset.pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> epoch_losses;
    std::vector<std::vector<double>> grad_acc(model.params.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch);
            for (auto& g : grad_acc) g.clear();
            double batch_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const auto& pair = dataset.pairs[order[b]];
                const FieldState in = read_snapshot(pair.input_path, cfg.dx_nm);
                const FieldState out = read_snapshot(pair.target_path, cfg.dx_nm);
                ad::Tape tape;
                attach(model, tape);
                ad::Tensor pred = forward(model, state_to_tensor(in));
                ad::Tensor loss = ad::mse_loss(pred, state_to_tensor(out));
                const double l = loss.at(0);
                if (!std::isfinite(l))
                    throw NumericError("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", pair " +
                                       std::to_string(order[b]));
                ad::backward(loss);
                batch_loss += l;
                for (std::size_t i = 0; i < model.params.size(); ++i) {
                    const auto& g = *model.params[i].grad;
                    if (grad_acc[i].empty())
                        grad_acc[i] = g;
                    else
                        for (std::size_t k = 0; k < g.size(); ++k) grad_acc[i][k] += g[k];
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (std::size_t i = 0; i < model.params.size(); ++i) {
                auto& g = *model.params[i].grad;
                for (std::size_t k = 0; k < g.size(); ++k) g[k] = grad_acc[i][k] * inv;
            }
            ad::adam_step(param_ptrs, adam);
            loss_sum += batch_loss;
            seen += stop - start;
        }
        epoch_losses.push_back(loss_sum / static_cast<double>(seen));
    }
    detach(model);
    return epoch_losses;
}

FieldState rollout(const FieldState& state0, const Model& model, const RolloutSchedule& schedule,
                   const ModelParams& p, const SolverConfig& solver_cfg,
                   const SnapshotSink& on_snapshot) {
    schedule.leap.validate();
    if (state0.step != 0) throw ConfigError("rollout: initial state must sit at step 0");
    if (model.config.in_channels != 3 || model.config.input_h != state0.grid.ny ||
        model.config.input_w != state0.grid.nx)
        throw ConfigError("rollout: model resolution " + std::to_string(model.config.input_h) +
                          "x" + std::to_string(model.config.input_w) +
                          " does not match the grid " + std::to_string(state0.grid.ny) + "x" +
                          std::to_string(state0.grid.nx));
    SolverConfig cfg = solver_cfg;
    cfg.dt_s = schedule.leap.dt_s;

    FieldState state = run_hf(state0, p, cfg, schedule.n_init, on_snapshot);
    for (std::uint64_t k = 0; k < schedule.n_leaps; ++k) {
        ad::Tensor out = forward(model, state_to_tensor(state));
        state = tensor_to_state(out, state.grid,
                                state.time_s + schedule.leap.leap_steps * schedule.leap.dt_s,
                                state.step + schedule.leap.leap_steps);
        if (on_snapshot) on_snapshot(state);
        if (schedule.n_relax > 0) {
            // Surrogate output feeds the solver unmodified; the relaxation
            // block uses the same integrator as the ground-truth runs.
            state = run_hf(state, p, cfg, schedule.n_relax);
            if (on_snapshot) on_snapshot(state);
        }
    }
    return state;
}

FieldState rollout_auto(const FieldState& state0, const Model& model, RolloutSchedule schedule,
                        const ModelParams& p, const SolverConfig& solver_cfg,
                        const SnapshotSink& on_snapshot) {
    schedule.n_relax = 0;
    return rollout(state0, model, schedule, p, solver_cfg, on_snapshot);
}

FieldState rollout_hybrid(const FieldState& state0, const Model& model,
                          const RolloutSchedule& schedule, const ModelParams& p,
                          const SolverConfig& solver_cfg, const SnapshotSink& on_snapshot) {
    if (schedule.n_relax < 1) throw ConfigError("hybrid rollout: n_relax must be >= 1");
    return rollout(state0, model, schedule, p, solver_cfg, on_snapshot);
}

EvaluateResult evaluate(const std::vector<std::string>& pred_snapshots,
                        const std::vector<std::string>& truth_snapshots, double dx_nm,
                        const QoiOptions& qoi_opt) {
    std::map<std::uint64_t, std::string> pred, truth;
    for (const auto& p : pred_snapshots) pred[read_snapshot(p, dx_nm).step] = p;
    for (const auto& t : truth_snapshots) truth[read_snapshot(t, dx_nm).step] = t;
    std::vector<std::uint64_t> steps;
    for (const auto& [s, _] : pred)
        if (truth.count(s)) steps.push_back(s);
    if (steps.empty()) throw ConfigError("evaluate: prediction and truth share no step index");

    EvaluateResult res;
    std::vector<QoiRecord> q_pred, q_truth;
    for (std::uint64_t s : steps) {
        const FieldState sp = read_snapshot(pred[s], dx_nm);
        const FieldState st = read_snapshot(truth[s], dx_nm);
        AcErrorRecord rec;
        rec.step = s;
        rec.time_s = st.time_s;
        rec.eac_phi = ac_relative_error(st.phi, sp.phi);
        rec.eac_cA = ac_relative_error(st.cA, sp.cA);
        rec.eac_cB = ac_relative_error(st.cB, sp.cB);
        res.ac_errors.push_back(rec);
        q_pred.push_back(qoi_record(sp, qoi_opt));
        q_truth.push_back(qoi_record(st, qoi_opt));
    }

    const auto column = [&](auto getter, const std::vector<QoiRecord>& recs) {
        std::vector<std::optional<double>> v;
        v.reserve(recs.size());
        for (const auto& r : recs) v.push_back(getter(r));
        return v;
    };
    const auto rel = [&](auto getter) {
        return qoi_relative_error(column(getter, q_truth), column(getter, q_pred));
    };
    res.qoi_errors.mean_curvature = rel([](const QoiRecord& r) { return r.mu_k; });
    res.qoi_errors.curvature_std = rel([](const QoiRecord& r) { return r.sigma_k; });
    res.qoi_errors.perimeter =
        rel([](const QoiRecord& r) { return std::optional<double>(r.perimeter); });
    res.qoi_errors.total_mass =
        rel([](const QoiRecord& r) { return std::optional<double>(r.m_phi); });
    res.qoi_errors.cA_mass = rel([](const QoiRecord& r) { return std::optional<double>(r.m_A); });
    res.qoi_errors.cB_mass = rel([](const QoiRecord& r) { return std::optional<double>(r.m_B); });
    res.qoi_errors.max_penetration_depth = rel([](const QoiRecord& r) { return r.max_p; });
    res.qoi_errors.mean_ligament_height = rel([](const QoiRecord& r) { return r.mu_d; });
    return res;
}

void write_qoi_error_csv(const QoiErrorReport& report, const std::string& path) {
    CsvWriter csv(path);
    csv.header({"mean_curvature", "curvature_std", "perimeter", "total_mass", "cA_mass", "cB_mass",
                "max_penetration_depth", "mean_ligament_height"});
    csv.field(report.mean_curvature);
    csv.field(report.curvature_std);
    csv.field(report.perimeter);
    csv.field(report.total_mass);
    csv.field(report.cA_mass);
    csv.field(report.cB_mass);
    csv.field(report.max_penetration_depth);
    csv.field(report.mean_ligament_height);
    csv.end_row();
}

SpeedupReport speedup_report(double t_hf_per_step_s, double t_model_per_leap_s,
                             const RolloutSchedule& schedule) {
    if (!(t_hf_per_step_s > 0.0) || !(t_model_per_leap_s > 0.0))
        throw ConfigError("speedup: measured timings must be positive");
    schedule.leap.validate();
    SpeedupReport r;
    r.t_hf_per_step_s = t_hf_per_step_s;
    r.t_model_per_leap_s = t_model_per_leap_s;
    r.leap_steps = schedule.leap.leap_steps;
    r.per_leap = static_cast<double>(schedule.leap.leap_steps) * t_hf_per_step_s /
                 t_model_per_leap_s;
    const double total_steps =
        static_cast<double>(schedule.n_init) +
        static_cast<double>(schedule.n_leaps) *
            static_cast<double>(schedule.leap.leap_steps + schedule.n_relax);
    const double hf_steps = static_cast<double>(schedule.n_init) +
                            static_cast<double>(schedule.n_leaps * schedule.n_relax);
    const double t_pure = total_steps * t_hf_per_step_s;
    const double t_mixed =
        hf_steps * t_hf_per_step_s + static_cast<double>(schedule.n_leaps) * t_model_per_leap_s;
    r.end_to_end = t_pure / t_mixed;
    return r;
}

void write_speedup_report(const SpeedupReport& r, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("report: cannot open for writing: " + path);
    char buf[64];
    const auto line = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << key << ": " << buf << "\n";
    };
    line("hf_seconds_per_step", r.t_hf_per_step_s);
    line("model_seconds_per_leap", r.t_model_per_leap_s);
    os << "leap_steps: " << r.leap_steps << "\n";
    line("per_leap_speedup", r.per_leap);
    line("end_to_end_speedup", r.end_to_end);
    if (!os) throw IoError("report: write failed: " + path);
}

} // namespace lmd
