// SPDX-License-Identifier: Apache-2.0
#include "lbdem/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace lbdem::io {

using nlohmann::json;

namespace {

const char* kFaceKeys[6] = {"xm", "xp", "ym", "yp", "zm", "zp"};

Vec3 inward_normal(int face) {
    Vec3 n{};
    n[face / 2] = face % 2 == 0 ? 1.0 : -1.0;
    return n;
}

lbm::BcKind parse_bc_kind(const std::string& s, std::vector<std::string>& errors) {
    if (s == "periodic") return lbm::BcKind::periodic;
    if (s == "no_slip") return lbm::BcKind::no_slip;
    if (s == "velocity") return lbm::BcKind::velocity;
    if (s == "pressure") return lbm::BcKind::pressure;
    errors.push_back("unknown boundary condition '" + s + "'");
    return lbm::BcKind::no_slip;
}

std::string bc_kind_name(lbm::BcKind k) {
    switch (k) {
        case lbm::BcKind::periodic: return "periodic";
        case lbm::BcKind::no_slip: return "no_slip";
        case lbm::BcKind::velocity: return "velocity";
        case lbm::BcKind::pressure: return "pressure";
    }
    return "?";
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where, std::vector<std::string>& errors) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) errors.push_back("unknown key '" + where + it.key() + "'");
    }
}

Vec3i parse_vec3i(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()}; }
Vec3 parse_vec3(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

void apply_unit_conversion(ScenarioConfig& cfg) {
    if (!cfg.physical) return;
    const PhysicalInputs& p = *cfg.physical;
    const double d = p.diameter_cells;
    const double nu = p.u_gravity * d / p.galileo;
    const double g = p.u_gravity * p.u_gravity / ((p.density_ratio - 1.0) * d);
    cfg.fluid.tau = nu * lbm::kInvCs2 + 0.5;
    cfg.u_inflow = p.re_p * nu / d;
    cfg.particle_radius = 0.5 * d;
    cfg.density_ratio = p.density_ratio;
    cfg.dem.gravity = {0.0, 0.0, -g};
    cfg.dem.rho_p = p.density_ratio;
    cfg.dem.rho_f0 = 1.0;
    cfg.dem.nu_fluid = nu;
}

void ScenarioConfig::validate() const {
    std::vector<std::string> errors;
    if (!(fluid.tau > 0.5))
        errors.push_back("fluid.tau must be > 0.5 for a positive viscosity (got " +
                         std::to_string(fluid.tau) + ")");
    for (int a = 0; a < 3; ++a) {
        if (domain[a] < 1) errors.push_back("domain dimensions must be positive");
        if (blocks[a] < 1)
            errors.push_back("block grid must be positive");
        else if (domain[a] % blocks[a] != 0)
            errors.push_back("block grid must divide the domain evenly in axis " +
                             std::to_string(a));
    }
    if (workers < 1) errors.push_back("workers must be >= 1");
    if (particle_count < 0) errors.push_back("particle count must be >= 0");
    if (particle_count > 0 && coupling && particle_radius < std::sqrt(0.5))
        errors.push_back("particle radius below the mapping validity floor sqrt(1/2)");
    if (dem.k_n < 0 || dem.d_n < 0 || dem.k_t < 0 || dem.d_t < 0)
        errors.push_back("DEM stiffness/damping must be >= 0");
    if (dem.subcycles < 1) errors.push_back("dem.subcycles must be >= 1");
    if (steps < 0) errors.push_back("run.steps must be >= 0");
    if (output_every < 0) errors.push_back("run.output_every must be >= 0");
    if (scenario != "custom" && scenario != "fluidized_bed_dilute" &&
        scenario != "fluidized_bed_dense" && scenario != "settling_sphere" &&
        scenario != "poiseuille")
        errors.push_back("unknown scenario '" + scenario + "'");
    try {
        bc.validate();
    } catch (const ConfigError& e) {
        errors.push_back(e.what());
    }
    if (!errors.empty()) {
        std::string all = "invalid configuration:";
        for (const std::string& e : errors) all += "\n  - " + e;
        throw ConfigError(all);
    }
}

ScenarioConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    std::vector<std::string> errors;
    ScenarioConfig cfg;
    if (j.contains("preset")) {
        const std::string name = j.at("preset").get<std::string>();
        const int div = j.value("scale_div", 5);
        if (name == "fluidized_bed_dilute")
            cfg = preset_fluidized_bed_dilute(div);
        else if (name == "fluidized_bed_dense")
            cfg = preset_fluidized_bed_dense(div);
        else
            cfg = preset_by_name(name);
    }

    check_keys(j,
               {"preset", "scale_div", "scenario", "domain", "blocks", "workers", "kernels",
                "seed", "fluid", "particles", "dem", "run", "physical"},
               "", errors);

    if (j.contains("scenario")) cfg.scenario = j.at("scenario").get<std::string>();
    if (j.contains("domain")) cfg.domain = parse_vec3i(j.at("domain"));
    if (j.contains("blocks")) cfg.blocks = parse_vec3i(j.at("blocks"));
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("kernels")) {
        const std::string k = j.at("kernels").get<std::string>();
        if (k == "serial")
            cfg.kernels = KernelMode::serial;
        else if (k == "openmp")
            cfg.kernels = KernelMode::openmp;
        else
            errors.push_back("kernels must be 'serial' or 'openmp'");
    }

    if (j.contains("fluid")) {
        const json& f = j.at("fluid");
        check_keys(f, {"tau", "nu", "f_ext", "bc", "u_inflow", "rho_outflow", "coupling",
                       "subdivisions"},
                   "fluid.", errors);
        if (f.contains("tau") && f.contains("nu"))
            errors.push_back("specify fluid.tau or fluid.nu, not both");
        if (f.contains("tau")) cfg.fluid.tau = f.at("tau").get<double>();
        if (f.contains("nu")) cfg.fluid.tau = f.at("nu").get<double>() * lbm::kInvCs2 + 0.5;
        if (f.contains("f_ext")) cfg.fluid.f_ext = parse_vec3(f.at("f_ext"));
        if (f.contains("u_inflow")) cfg.u_inflow = f.at("u_inflow").get<double>();
        if (f.contains("rho_outflow")) cfg.rho_outflow = f.at("rho_outflow").get<double>();
        if (f.contains("coupling")) cfg.coupling = f.at("coupling").get<bool>();
        if (f.contains("subdivisions")) cfg.subdivisions = f.at("subdivisions").get<int>();
        if (f.contains("bc")) {
            const json& b = f.at("bc");
            check_keys(b, {"xm", "xp", "ym", "yp", "zm", "zp"}, "fluid.bc.", errors);
            for (int face = 0; face < 6; ++face)
                if (b.contains(kFaceKeys[face]))
                    cfg.bc.faces[face].kind =
                        parse_bc_kind(b.at(kFaceKeys[face]).get<std::string>(), errors);
        }
    }

    if (j.contains("particles")) {
        const json& p = j.at("particles");
        check_keys(p, {"count", "radius", "density_ratio"}, "particles.", errors);
        if (p.contains("count")) cfg.particle_count = p.at("count").get<int>();
        if (p.contains("radius")) cfg.particle_radius = p.at("radius").get<double>();
        if (p.contains("density_ratio")) cfg.density_ratio = p.at("density_ratio").get<double>();
    }

    if (j.contains("dem")) {
        const json& d = j.at("dem");
        check_keys(d,
                   {"k_n", "d_n", "k_t", "d_t", "subcycles", "lubrication", "gravity",
                    "settle_subcycles"},
                   "dem.", errors);
        if (d.contains("k_n")) cfg.dem.k_n = d.at("k_n").get<double>();
        if (d.contains("d_n")) cfg.dem.d_n = d.at("d_n").get<double>();
        if (d.contains("k_t")) cfg.dem.k_t = d.at("k_t").get<double>();
        if (d.contains("d_t")) cfg.dem.d_t = d.at("d_t").get<double>();
        if (d.contains("subcycles")) cfg.dem.subcycles = d.at("subcycles").get<int>();
        if (d.contains("lubrication")) cfg.dem.lubrication = d.at("lubrication").get<bool>();
        if (d.contains("gravity")) cfg.dem.gravity = parse_vec3(d.at("gravity"));
        if (d.contains("settle_subcycles"))
            cfg.settle_subcycles = d.at("settle_subcycles").get<int>();
    }

    if (j.contains("run")) {
        const json& r = j.at("run");
        check_keys(r, {"steps", "output_every", "out_dir"}, "run.", errors);
        if (r.contains("steps")) cfg.steps = r.at("steps").get<long>();
        if (r.contains("output_every")) cfg.output_every = r.at("output_every").get<long>();
        if (r.contains("out_dir")) cfg.out_dir = r.at("out_dir").get<std::string>();
    }

    if (j.contains("physical")) {
        const json& p = j.at("physical");
        check_keys(p, {"galileo", "re_p", "density_ratio", "diameter_cells", "u_gravity"},
                   "physical.", errors);
        PhysicalInputs pi;
        if (p.contains("galileo")) pi.galileo = p.at("galileo").get<double>();
        if (p.contains("re_p")) pi.re_p = p.at("re_p").get<double>();
        if (p.contains("density_ratio")) pi.density_ratio = p.at("density_ratio").get<double>();
        if (p.contains("diameter_cells"))
            pi.diameter_cells = p.at("diameter_cells").get<double>();
        if (p.contains("u_gravity")) pi.u_gravity = p.at("u_gravity").get<double>();
        cfg.physical = pi;
        apply_unit_conversion(cfg);
    }

    if (!errors.empty()) {
        std::string all = "invalid configuration:";
        for (const std::string& e : errors) all += "\n  - " + e;
        throw ConfigError(all);
    }

    // Wall-velocity / outlet-density details derive from the scalar settings.
    for (int face = 0; face < 6; ++face) {
        if (cfg.bc.faces[face].kind == lbm::BcKind::velocity)
            cfg.bc.faces[face].u_wall = cfg.u_inflow * inward_normal(face);
        if (cfg.bc.faces[face].kind == lbm::BcKind::pressure)
            cfg.bc.faces[face].rho = cfg.rho_outflow;
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["domain"] = {cfg.domain.x, cfg.domain.y, cfg.domain.z};
    j["blocks"] = {cfg.blocks.x, cfg.blocks.y, cfg.blocks.z};
    j["workers"] = cfg.workers;
    j["kernels"] = cfg.kernels == KernelMode::openmp ? "openmp" : "serial";
    j["seed"] = cfg.seed;
    j["fluid"]["tau"] = cfg.fluid.tau;
    j["fluid"]["f_ext"] = {cfg.fluid.f_ext.x, cfg.fluid.f_ext.y, cfg.fluid.f_ext.z};
    j["fluid"]["u_inflow"] = cfg.u_inflow;
    j["fluid"]["rho_outflow"] = cfg.rho_outflow;
    j["fluid"]["coupling"] = cfg.coupling;
    j["fluid"]["subdivisions"] = cfg.subdivisions;
    for (int face = 0; face < 6; ++face)
        j["fluid"]["bc"][kFaceKeys[face]] = bc_kind_name(cfg.bc.faces[face].kind);
    j["particles"]["count"] = cfg.particle_count;
    j["particles"]["radius"] = cfg.particle_radius;
    j["particles"]["density_ratio"] = cfg.density_ratio;
    j["dem"]["k_n"] = cfg.dem.k_n;
    j["dem"]["d_n"] = cfg.dem.d_n;
    j["dem"]["k_t"] = cfg.dem.k_t;
    j["dem"]["d_t"] = cfg.dem.d_t;
    j["dem"]["subcycles"] = cfg.dem.subcycles;
    j["dem"]["lubrication"] = cfg.dem.lubrication;
    j["dem"]["gravity"] = {cfg.dem.gravity.x, cfg.dem.gravity.y, cfg.dem.gravity.z};
    j["dem"]["settle_subcycles"] = cfg.settle_subcycles;
    j["run"]["steps"] = cfg.steps;
    j["run"]["output_every"] = cfg.output_every;
    j["run"]["out_dir"] = cfg.out_dir;
    if (cfg.physical) {
        j["physical"]["galileo"] = cfg.physical->galileo;
        j["physical"]["re_p"] = cfg.physical->re_p;
        j["physical"]["density_ratio"] = cfg.physical->density_ratio;
        j["physical"]["diameter_cells"] = cfg.physical->diameter_cells;
        j["physical"]["u_gravity"] = cfg.physical->u_gravity;
    }
    return j.dump(2);
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

/// DEM coefficients sized for resolved 20-cell spheres: contact time of ten
/// fluid steps and restitution around 0.3.
void bed_dem_defaults(ScenarioConfig& cfg) {
    cfg.dem.k_n = 230.0;
    cfg.dem.d_n = 520.0;
    cfg.dem.k_t = 65.0;
    cfg.dem.d_t = 260.0;
    cfg.dem.subcycles = 10;
    cfg.dem.lubrication = true;
    cfg.settle_subcycles = 100;
}

ScenarioConfig bed_preset(const std::string& kind, int scale_div, int reference_count) {
    if (scale_div < 1 || 500 % scale_div != 0 || 200 % scale_div != 0 || 800 % scale_div != 0)
        throw ConfigError("bed preset scale divisor must divide 500, 200 and 800 (got " +
                          std::to_string(scale_div) + ")");
    ScenarioConfig cfg;
    cfg.scenario = kind;
    cfg.domain = {500 / scale_div, 200 / scale_div, 800 / scale_div};
    cfg.bc.faces[lbm::kFaceXm].kind = lbm::BcKind::no_slip;
    cfg.bc.faces[lbm::kFaceXp].kind = lbm::BcKind::no_slip;
    cfg.bc.faces[lbm::kFaceYm].kind = lbm::BcKind::no_slip;
    cfg.bc.faces[lbm::kFaceYp].kind = lbm::BcKind::no_slip;
    cfg.bc.faces[lbm::kFaceZm].kind = lbm::BcKind::velocity;
    cfg.bc.faces[lbm::kFaceZp].kind = lbm::BcKind::pressure;

    const double volume_ratio = 1.0 / (static_cast<double>(scale_div) * scale_div * scale_div);
    cfg.particle_count =
        std::max(1, static_cast<int>(std::llround(reference_count * volume_ratio)));

    bed_dem_defaults(cfg);
    cfg.physical = PhysicalInputs{};
    apply_unit_conversion(cfg);
    for (int face = 0; face < 6; ++face) {
        if (cfg.bc.faces[face].kind == lbm::BcKind::velocity)
            cfg.bc.faces[face].u_wall = cfg.u_inflow * inward_normal(face);
        if (cfg.bc.faces[face].kind == lbm::BcKind::pressure)
            cfg.bc.faces[face].rho = cfg.rho_outflow;
    }
    cfg.steps = 100;
    return cfg;
}

}  // namespace

ScenarioConfig preset_fluidized_bed_dilute(int scale_div) {
    return bed_preset("fluidized_bed_dilute", scale_div, 627);
}

ScenarioConfig preset_fluidized_bed_dense(int scale_div) {
    return bed_preset("fluidized_bed_dense", scale_div, 8073);
}

ScenarioConfig preset_settling_sphere() {
    ScenarioConfig cfg;
    cfg.scenario = "settling_sphere";
    // Duct width 4.8 diameters: wide enough that the container correction of
    // the drag correlation is accurate, small enough to stay desk-sized.
    cfg.domain = {96, 96, 160};
    for (int face = 0; face < 6; ++face) cfg.bc.faces[face].kind = lbm::BcKind::no_slip;
    cfg.particle_count = 1;
    bed_dem_defaults(cfg);
    cfg.settle_subcycles = 0;
    PhysicalInputs phys;
    // Higher velocity scale -> higher viscosity -> faster approach to the
    // terminal state, still well below the compressibility limit.
    phys.u_gravity = 0.06;
    cfg.physical = phys;
    apply_unit_conversion(cfg);
    cfg.steps = 3600;
    return cfg;
}

ScenarioConfig preset_poiseuille() {
    ScenarioConfig cfg;
    cfg.scenario = "poiseuille";
    cfg.domain = {4, 32, 4};
    cfg.coupling = false;
    cfg.fluid.tau = 0.8;
    // Body force sized for a centerline velocity of 0.02 across the 32 cells.
    cfg.fluid.f_ext = {8.0 * 0.1 * 0.02 / (32.0 * 32.0), 0.0, 0.0};
    cfg.bc.faces[lbm::kFaceYm].kind = lbm::BcKind::no_slip;
    cfg.bc.faces[lbm::kFaceYp].kind = lbm::BcKind::no_slip;
    cfg.particle_count = 0;
    cfg.steps = 6000;
    return cfg;
}

ScenarioConfig preset_by_name(const std::string& name) {
    if (name == "fluidized_bed_dilute") return preset_fluidized_bed_dilute();
    if (name == "fluidized_bed_dense") return preset_fluidized_bed_dense();
    if (name == "settling_sphere") return preset_settling_sphere();
    if (name == "poiseuille") return preset_poiseuille();
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace lbdem::io
