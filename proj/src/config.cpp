#include "dobkit/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dobkit/errors.hpp"

namespace dobkit {

namespace {

const std::set<std::string> kKnownKeys = {
    "plant.num",        "plant.den",        "plant.tau",
    "plant.approx_num", "plant.approx_den", "weight.w_T",
    "weight.e_min",     "weight.e_max",     "weight.num",
    "weight.den",       "delta.lo",         "delta.hi",
    "delta.grid_points", "dob.order",       "dob.g",
    "dob.g_list",       "spec.alpha",       "spec.alpha_beta",
    "spec.alpha_gamma", "spec.w_beta",      "spec.w_gamma",
    "spec.sup_logS",    "spec.delta_small", "spec.M",
    "spec.R",           "controllers.outer_num", "controllers.outer_den",
    "controllers.prefilter_num", "controllers.prefilter_den",
    "sim.dt",           "sim.horizon",      "sim.seed",
    "sim.disturbance.kind", "sim.disturbance.amplitude",
    "sim.disturbance.frequency", "sim.disturbance.start_time",
    "outputs.dir",      "outputs.formats"};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("config line " + std::to_string(line) + ": expected a number, got '" +
                         tok + "'");
    }
}

std::vector<std::string> split_list(const std::string& value, int line) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
        throw ParseError("config line " + std::to_string(line) + ": expected [a, b, ...]");
    }
    std::vector<std::string> items;
    std::string body = value.substr(1, value.size() - 2);
    std::string cur;
    for (char c : body) {
        if (c == ',') {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    return items;
}

std::vector<double> parse_list(const std::string& value, int line) {
    std::vector<double> out;
    for (const std::string& item : split_list(value, line)) out.push_back(parse_double(item, line));
    return out;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt(v[i]);
    }
    return s + "]";
}

}  // namespace

CaseConfig parse_config(const std::string& text, const std::string& origin) {
    CaseConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool any = false;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError(origin + " line " + std::to_string(line) + ": expected key = value");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (!kKnownKeys.count(key)) {
            throw ParseError(origin + " line " + std::to_string(line) + ": unknown key '" + key +
                             "'");
        }
        if (!seen.insert(key).second) {
            throw ParseError(origin + " line " + std::to_string(line) + ": duplicate key '" + key +
                             "'");
        }
        any = true;

        if (key == "plant.num") cfg.plant_num = parse_list(value, line);
        else if (key == "plant.den") cfg.plant_den = parse_list(value, line);
        else if (key == "plant.tau") cfg.plant_tau = parse_double(value, line);
        else if (key == "plant.approx_num") cfg.plant_approx_num = parse_list(value, line);
        else if (key == "plant.approx_den") cfg.plant_approx_den = parse_list(value, line);
        else if (key == "weight.w_T") cfg.weight_w_T = parse_double(value, line);
        else if (key == "weight.e_min") cfg.weight_e_min = parse_double(value, line);
        else if (key == "weight.e_max") cfg.weight_e_max = parse_double(value, line);
        else if (key == "weight.num") cfg.weight_num = parse_list(value, line);
        else if (key == "weight.den") cfg.weight_den = parse_list(value, line);
        else if (key == "delta.lo") cfg.delta_lo = parse_double(value, line);
        else if (key == "delta.hi") cfg.delta_hi = parse_double(value, line);
        else if (key == "delta.grid_points")
            cfg.delta_grid_points = static_cast<int>(parse_double(value, line));
        else if (key == "dob.order") cfg.dob_order = static_cast<int>(parse_double(value, line));
        else if (key == "dob.g") cfg.dob_g = parse_double(value, line);
        else if (key == "dob.g_list") cfg.dob_g_list = parse_list(value, line);
        else if (key == "spec.alpha") cfg.spec.alpha = parse_double(value, line);
        else if (key == "spec.alpha_beta") cfg.spec.alpha_beta = parse_double(value, line);
        else if (key == "spec.alpha_gamma") cfg.spec.alpha_gamma = parse_double(value, line);
        else if (key == "spec.w_beta") cfg.spec.w_beta = parse_double(value, line);
        else if (key == "spec.w_gamma") cfg.spec.w_gamma = parse_double(value, line);
        else if (key == "spec.sup_logS") cfg.spec.sup_logS = parse_double(value, line);
        else if (key == "spec.delta_small") cfg.spec.delta = parse_double(value, line);
        else if (key == "spec.M") cfg.spec.M = parse_double(value, line);
        else if (key == "spec.R") cfg.spec.R = parse_double(value, line);
        else if (key == "controllers.outer_num") cfg.outer_num = parse_list(value, line);
        else if (key == "controllers.outer_den") cfg.outer_den = parse_list(value, line);
        else if (key == "controllers.prefilter_num") cfg.prefilter_num = parse_list(value, line);
        else if (key == "controllers.prefilter_den") cfg.prefilter_den = parse_list(value, line);
        else if (key == "sim.dt") cfg.sim_dt = parse_double(value, line);
        else if (key == "sim.horizon") cfg.sim_horizon = parse_double(value, line);
        else if (key == "sim.seed")
            cfg.sim_seed = static_cast<unsigned long>(parse_double(value, line));
        else if (key == "sim.disturbance.kind") cfg.dist_kind = value;
        else if (key == "sim.disturbance.amplitude") cfg.dist_amplitude = parse_double(value, line);
        else if (key == "sim.disturbance.frequency") cfg.dist_frequency = parse_double(value, line);
        else if (key == "sim.disturbance.start_time")
            cfg.dist_start_time = parse_double(value, line);
        else if (key == "outputs.dir") cfg.out_dir = value;
        else if (key == "outputs.formats") {
            cfg.out_formats.clear();
            for (const std::string& f : split_list(value, line)) cfg.out_formats.push_back(f);
        }
    }
    if (!any) throw ParseError(origin + ": empty config");

    // structural validation
    if (cfg.plant_num.empty() || cfg.plant_den.empty()) {
        throw ValidationError("config: plant.num and plant.den are required");
    }
    const bool parametric = cfg.weight_w_T || cfg.weight_e_min || cfg.weight_e_max;
    const bool rational = cfg.weight_num || cfg.weight_den;
    if (parametric == rational) {
        throw ValidationError("config: give exactly one weight form (w_T/e_min/e_max or num/den)");
    }
    if (parametric && !(cfg.weight_w_T && cfg.weight_e_min && cfg.weight_e_max)) {
        throw ValidationError("config: parametric weight needs w_T, e_min and e_max");
    }
    if (rational && !(cfg.weight_num && cfg.weight_den)) {
        throw ValidationError("config: rational weight needs num and den");
    }
    if (static_cast<bool>(cfg.plant_approx_num) != static_cast<bool>(cfg.plant_approx_den)) {
        throw ValidationError("config: approx model needs both approx_num and approx_den");
    }
    if (static_cast<bool>(cfg.outer_num) != static_cast<bool>(cfg.outer_den)) {
        throw ValidationError("config: outer controller needs both num and den");
    }
    if (static_cast<bool>(cfg.prefilter_num) != static_cast<bool>(cfg.prefilter_den)) {
        throw ValidationError("config: prefilter needs both num and den");
    }
    if (cfg.dist_kind != "step" && cfg.dist_kind != "sine" && cfg.dist_kind != "none") {
        throw ValidationError("config: sim.disturbance.kind must be step, sine or none");
    }
    // domain validation via the derived objects
    cfg.plant();
    cfg.dob();
    return cfg;
}

CaseConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

UncertaintyWeight CaseConfig::weight() const {
    if (weight_w_T) {
        UncertaintyWeight w{*weight_w_T, *weight_e_min, *weight_e_max};
        w.validate();
        return w;
    }
    return weight_from_rational(RationalTF(Polynomial(*weight_num), Polynomial(*weight_den)));
}

PlantModel CaseConfig::plant() const {
    PlantModel p;
    p.nominal = RationalTF(Polynomial(plant_num), Polynomial(plant_den));
    p.weight = weight();
    p.delta = DeltaInterval{delta_lo, delta_hi};
    p.tau = plant_tau;
    if (plant_approx_num) {
        p.approx_nominal =
            RationalTF(Polynomial(*plant_approx_num), Polynomial(*plant_approx_den));
    }
    p.validate();
    return p;
}

DobFilter CaseConfig::dob() const { return make_lpf(dob_order, dob_g > 0.0 ? dob_g : 1.0); }

ControllerSet CaseConfig::controllers() const {
    ControllerSet c = ControllerSet::none();
    if (outer_num) c.outer = RationalTF(Polynomial(*outer_num), Polynomial(*outer_den));
    if (prefilter_num) {
        c.prefilter = RationalTF(Polynomial(*prefilter_num), Polynomial(*prefilter_den));
        const Classification pc = classify(*c.prefilter);
        if (!pc.is_stable || c.prefilter->relative_degree() < 0) {
            throw ValidationError("config: prefilter must be stable and proper");
        }
    }
    return c;
}

SimInputs CaseConfig::sim_inputs(bool reference_step) const {
    SimInputs in;
    if (reference_step) {
        in.r = SignalSpec{SignalSpec::Kind::step, 1.0, 0.0, 0.0};
    }
    if (dist_kind == "step") {
        in.dis = SignalSpec{SignalSpec::Kind::step, dist_amplitude, 0.0, dist_start_time};
    } else if (dist_kind == "sine") {
        in.dis = SignalSpec{SignalSpec::Kind::sine, dist_amplitude, dist_frequency,
                            dist_start_time};
    }
    in.noise_amplitude = 0.0;
    in.noise_seed = sim_seed;
    return in;
}

std::vector<double> CaseConfig::bandwidth_grid() const {
    if (dob_g_list && dob_g_list->size() >= 30) return *dob_g_list;
    double lo, hi;
    if (dob_g_list && dob_g_list->size() >= 2) {
        lo = dob_g_list->front();
        hi = dob_g_list->back();
    } else {
        const double g = dob_g > 0.0 ? dob_g : 10.0;
        lo = g / 30.0;
        hi = g * 30.0;
    }
    return logspace(lo, hi, 48);
}

std::string emit_config(const CaseConfig& cfg) {
    std::ostringstream o;
    o << "plant.num = " << fmt_list(cfg.plant_num) << "\n";
    o << "plant.den = " << fmt_list(cfg.plant_den) << "\n";
    o << "plant.tau = " << fmt(cfg.plant_tau) << "\n";
    if (cfg.plant_approx_num) o << "plant.approx_num = " << fmt_list(*cfg.plant_approx_num) << "\n";
    if (cfg.plant_approx_den) o << "plant.approx_den = " << fmt_list(*cfg.plant_approx_den) << "\n";
    if (cfg.weight_w_T) {
        o << "weight.w_T = " << fmt(*cfg.weight_w_T) << "\n";
        o << "weight.e_min = " << fmt(*cfg.weight_e_min) << "\n";
        o << "weight.e_max = " << fmt(*cfg.weight_e_max) << "\n";
    }
    if (cfg.weight_num) o << "weight.num = " << fmt_list(*cfg.weight_num) << "\n";
    if (cfg.weight_den) o << "weight.den = " << fmt_list(*cfg.weight_den) << "\n";
    o << "delta.lo = " << fmt(cfg.delta_lo) << "\n";
    o << "delta.hi = " << fmt(cfg.delta_hi) << "\n";
    o << "delta.grid_points = " << cfg.delta_grid_points << "\n";
    o << "dob.order = " << cfg.dob_order << "\n";
    o << "dob.g = " << fmt(cfg.dob_g) << "\n";
    if (cfg.dob_g_list) o << "dob.g_list = " << fmt_list(*cfg.dob_g_list) << "\n";
    o << "spec.alpha = " << fmt(cfg.spec.alpha) << "\n";
    o << "spec.alpha_beta = " << fmt(cfg.spec.alpha_beta) << "\n";
    o << "spec.alpha_gamma = " << fmt(cfg.spec.alpha_gamma) << "\n";
    o << "spec.w_beta = " << fmt(cfg.spec.w_beta) << "\n";
    o << "spec.w_gamma = " << fmt(cfg.spec.w_gamma) << "\n";
    o << "spec.sup_logS = " << fmt(cfg.spec.sup_logS) << "\n";
    o << "spec.delta_small = " << fmt(cfg.spec.delta) << "\n";
    o << "spec.M = " << fmt(cfg.spec.M) << "\n";
    o << "spec.R = " << fmt(cfg.spec.R) << "\n";
    if (cfg.outer_num) o << "controllers.outer_num = " << fmt_list(*cfg.outer_num) << "\n";
    if (cfg.outer_den) o << "controllers.outer_den = " << fmt_list(*cfg.outer_den) << "\n";
    if (cfg.prefilter_num)
        o << "controllers.prefilter_num = " << fmt_list(*cfg.prefilter_num) << "\n";
    if (cfg.prefilter_den)
        o << "controllers.prefilter_den = " << fmt_list(*cfg.prefilter_den) << "\n";
    o << "sim.dt = " << fmt(cfg.sim_dt) << "\n";
    o << "sim.horizon = " << fmt(cfg.sim_horizon) << "\n";
    o << "sim.seed = " << cfg.sim_seed << "\n";
    o << "sim.disturbance.kind = " << cfg.dist_kind << "\n";
    o << "sim.disturbance.amplitude = " << fmt(cfg.dist_amplitude) << "\n";
    o << "sim.disturbance.frequency = " << fmt(cfg.dist_frequency) << "\n";
    o << "sim.disturbance.start_time = " << fmt(cfg.dist_start_time) << "\n";
    o << "outputs.dir = " << cfg.out_dir << "\n";
    o << "outputs.formats = [";
    for (std::size_t i = 0; i < cfg.out_formats.size(); ++i) {
        if (i) o << ", ";
        o << cfg.out_formats[i];
    }
    o << "]\n";
    return o.str();
}

}  // namespace dobkit
