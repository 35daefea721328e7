#include "lmd/runconfig.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace lmd {

namespace {

using nlohmann::json;

// Strict section reader: every key must be consumed exactly once.
class Section {
public:
    Section(const json& j, std::string name) : name_(std::move(name)) {
        if (!j.is_object()) throw ConfigError("config: section '" + name_ + "' is not an object");
        obj_ = &j;
    }

    template <typename T>
    void read(const char* key, T& into) {
        auto it = obj_->find(key);
        if (it == obj_->end()) return; // keep the default
        seen_.insert(key);
        try {
            into = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config: bad value type for '" + name_ + "." + key + "'");
        }
    }

    void finish() const {
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("config: unknown key '" + name_ + "." + it.key() + "'");
    }

private:
    const json* obj_;
    std::string name_;
    std::set<std::string> seen_;
};

const json* section_of(const json& root, const char* key) {
    auto it = root.find(key);
    return it == root.end() ? nullptr : &*it;
}

} // namespace

void RunConfig::validate() const {
    grid.validate();
    params.validate();
    solver.validate();
    if (!(init.solid_fraction > 0.0 && init.solid_fraction < 1.0))
        throw ConfigError("config: init.solid_fraction must lie in (0,1)");
    if (init.noise_amp < 0.0) throw ConfigError("config: init.noise_amp must be >= 0");
    model.validate();
    train.validate();
    rollout.leap.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");

    RunConfig cfg;
    static const std::set<std::string> known = {"grid",  "params",  "solver", "init",
                                                "model", "train", "rollout", "paths"};
    for (auto it = root.begin(); it != root.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown section '" + it.key() + "'");

    if (const json* j = section_of(root, "grid")) {
        Section s(*j, "grid");
        s.read("nx", cfg.grid.nx);
        s.read("ny", cfg.grid.ny);
        s.read("dx_nm", cfg.grid.dx_nm);
        s.finish();
    }
    if (const json* j = section_of(root, "params")) {
        Section s(*j, "params");
        s.read("T", cfg.params.T);
        s.read("eta", cfg.params.eta);
        s.read("sigma_sl", cfg.params.sigma_sl);
        s.read("kappa", cfg.params.kappa);
        s.read("L_A", cfg.params.L_A);
        s.read("L_B", cfg.params.L_B);
        s.read("L_C", cfg.params.L_C);
        s.read("T_A", cfg.params.T_A);
        s.read("T_B", cfg.params.T_B);
        s.read("T_C", cfg.params.T_C);
        s.read("V_a", cfg.params.V_a);
        s.read("Omega_AC", cfg.params.Omega_AC);
        s.read("M_phi", cfg.params.M_phi);
        s.read("D_liq", cfg.params.D_liq);
        s.finish();
    }
    if (const json* j = section_of(root, "solver")) {
        Section s(*j, "solver");
        s.read("dt_s", cfg.solver.dt_s);
        s.read("stabilization", cfg.solver.stabilization);
        std::string boundary = "paper";
        s.read("boundary", boundary);
        if (boundary == "paper")
            cfg.solver.boundary = BoundarySpec::paper();
        else if (boundary == "closed")
            cfg.solver.boundary = BoundarySpec::closed();
        else
            throw ConfigError("config: solver.boundary must be 'paper' or 'closed'");
        s.read("snapshot_cadence", cfg.solver.snapshot_cadence);
        s.finish();
    }
    if (const json* j = section_of(root, "init")) {
        Section s(*j, "init");
        s.read("solid_fraction", cfg.init.solid_fraction);
        s.read("noise_amp", cfg.init.noise_amp);
        s.read("seed", cfg.init.seed);
        s.finish();
    }
    cfg.model.input_h = cfg.grid.ny;
    cfg.model.input_w = cfg.grid.nx;
    if (const json* j = section_of(root, "model")) {
        Section s(*j, "model");
        s.read("in_channels", cfg.model.in_channels);
        s.read("input_h", cfg.model.input_h);
        s.read("input_w", cfg.model.input_w);
        s.read("enc_levels", cfg.model.enc_levels);
        s.read("base_channels", cfg.model.base_channels);
        s.read("n_blocks", cfg.model.n_blocks);
        s.read("heads", cfg.model.heads);
        s.read("mlp_hidden", cfg.model.mlp_hidden);
        s.read("patch", cfg.model.patch);
        s.read("shrink_lambda", cfg.model.shrink_lambda);
        s.finish();
    }
    if (const json* j = section_of(root, "train")) {
        Section s(*j, "train");
        s.read("epochs", cfg.train.epochs);
        s.read("lr", cfg.train.lr);
        s.read("batch", cfg.train.batch);
        s.read("seed", cfg.train.seed);
        s.finish();
    }
    cfg.train.dx_nm = cfg.grid.dx_nm;
    cfg.rollout.leap.dt_s = cfg.solver.dt_s;
    if (const json* j = section_of(root, "rollout")) {
        Section s(*j, "rollout");
        s.read("n_init", cfg.rollout.n_init);
        s.read("leap_steps", cfg.rollout.leap.leap_steps);
        s.read("n_leaps", cfg.rollout.n_leaps);
        s.read("n_relax", cfg.rollout.n_relax);
        s.finish();
    }
    if (const json* j = section_of(root, "paths")) {
        Section s(*j, "paths");
        s.read("data_dir", cfg.paths.data_dir);
        s.read("out_dir", cfg.paths.out_dir);
        s.finish();
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

std::string resolved_config_json(const RunConfig& cfg) {
    json j;
    j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"dx_nm", cfg.grid.dx_nm}};
    j["params"] = {{"T", cfg.params.T},         {"eta", cfg.params.eta},
                   {"sigma_sl", cfg.params.sigma_sl}, {"kappa", cfg.params.kappa},
                   {"L_A", cfg.params.L_A},     {"L_B", cfg.params.L_B},
                   {"L_C", cfg.params.L_C},     {"T_A", cfg.params.T_A},
                   {"T_B", cfg.params.T_B},     {"T_C", cfg.params.T_C},
                   {"V_a", cfg.params.V_a},     {"Omega_AC", cfg.params.Omega_AC},
                   {"M_phi", cfg.params.M_phi}, {"D_liq", cfg.params.D_liq}};
    j["solver"] = {{"dt_s", cfg.solver.dt_s},
                   {"stabilization", cfg.solver.stabilization},
                   {"boundary", cfg.solver.boundary.periodic_y() ? "closed" : "paper"},
                   {"snapshot_cadence", cfg.solver.snapshot_cadence}};
    j["init"] = {{"solid_fraction", cfg.init.solid_fraction},
                 {"noise_amp", cfg.init.noise_amp},
                 {"seed", cfg.init.seed}};
    j["model"] = {{"in_channels", cfg.model.in_channels},
                  {"input_h", cfg.model.input_h},
                  {"input_w", cfg.model.input_w},
                  {"enc_levels", cfg.model.enc_levels},
                  {"base_channels", cfg.model.base_channels},
                  {"n_blocks", cfg.model.n_blocks},
                  {"heads", cfg.model.heads},
                  {"mlp_hidden", cfg.model.mlp_hidden},
                  {"patch", cfg.model.patch},
                  {"shrink_lambda", cfg.model.shrink_lambda}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"lr", cfg.train.lr},
                  {"batch", cfg.train.batch},
                  {"seed", cfg.train.seed}};
    j["rollout"] = {{"n_init", cfg.rollout.n_init},
                    {"leap_steps", cfg.rollout.leap.leap_steps},
                    {"n_leaps", cfg.rollout.n_leaps},
                    {"n_relax", cfg.rollout.n_relax}};
    j["paths"] = {{"data_dir", cfg.paths.data_dir}, {"out_dir", cfg.paths.out_dir}};
    return j.dump(2) + "\n";
}

void write_resolved_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("config: cannot write " + path);
    os << resolved_config_json(cfg);
}

} // namespace lmd
