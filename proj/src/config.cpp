#include "jointmeas/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace jmeas {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kRunKeys{"preset",  "t_final", "dt",  "cadence", "n_traj",
                                     "master_seed", "workers", "out"};
const std::set<std::string> kSystemKeys{"kappa",      "kappa_hz",   "g1",         "g2",       "delta1",
                                        "delta2",     "delta_r",    "gamma1_1",   "gamma1_2", "gammaphi_1",
                                        "gammaphi_2", "eta",        "phi_lo",     "jq",       "omega_a1",
                                        "omega_a2"};
const std::set<std::string> kDriveKeys{"shape", "amplitude", "sigma"};
const std::set<std::string> kSweepKeys{"cases"};
const std::set<std::string> kEnsembleKeys{"histogram_times"};
const std::set<std::string> kThresholdKeys{"t", "s_th"};
const std::set<std::string> kRatesKeys{"delta_r_min", "delta_r_max", "delta_r_points",
                                       "chi_min",     "chi_max",     "chi_points"};
const std::set<std::string> kOracleKeys{"fock_cutoff", "t_final", "dt", "cadence", "purcell"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(field + ": expected a number, got '" + text + "'");
    }
    return v;
}

template <typename Int>
Int parse_int(const std::string& field, const std::string& text) {
    const std::string s = trim(text);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(field + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(field + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        if (!trim(item).empty()) out.push_back(trim(item));
    }
    return out;
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(field, item));
    return out;
}

std::vector<SweepCase> parse_cases(const std::string& field, const std::string& text) {
    std::vector<SweepCase> out;
    for (const auto& item : split(text, ';')) {
        const auto v = parse_list(field, item);
        if (v.size() != 3) throw ConfigError(field + ": each case needs gamma1, gammaphi, eta; got '" + item + "'");
        out.push_back({v[0], v[1], v[2]});
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

std::string join_cases(const std::vector<SweepCase>& cases) {
    std::string out;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (i) out += "; ";
        out += join({cases[i].gamma1, cases[i].gammaphi, cases[i].eta});
    }
    return out;
}

void apply_section(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed,
                   const auto& handler) {
    for (const auto& [key, node] : section) {
        if (!allowed.contains(key)) throw ConfigError(name + "." + key + ": unknown key");
        handler(key, node.data(), name + "." + key);
    }
}

void apply_tree(const pt::ptree& tree, RunConfig& c) {
    for (const auto& [section, node] : tree) {
        if (node.empty() && !node.data().empty()) throw ConfigError(section + ": key outside any section");
        if (section == "run") {
            apply_section(node, section, kRunKeys, [&](const std::string& k, const std::string& v, const std::string& f) {
                if (k == "preset") c.preset = trim(v);
                else if (k == "t_final") c.t_final = parse_double(f, v);
                else if (k == "dt") c.dt = parse_double(f, v);
                else if (k == "cadence") c.cadence = parse_double(f, v);
                else if (k == "n_traj") c.n_traj = parse_int<std::size_t>(f, v);
                else if (k == "master_seed") c.master_seed = parse_int<std::uint64_t>(f, v);
                else if (k == "workers") c.workers = parse_int<unsigned>(f, v);
                else if (k == "out") c.out_dir = trim(v);
            });
        } else if (section == "system") {
            SystemParams& p = c.params;
            apply_section(node, section, kSystemKeys, [&](const std::string& k, const std::string& v, const std::string& f) {
                const double x = parse_double(f, v);
                if (k == "kappa") p.kappa = x;
                else if (k == "kappa_hz") p.kappa_hz = x;
                else if (k == "g1") p.g[0] = x;
                else if (k == "g2") p.g[1] = x;
                else if (k == "delta1") p.delta_qc[0] = x;
                else if (k == "delta2") p.delta_qc[1] = x;
                else if (k == "delta_r") p.delta_r = x;
                else if (k == "gamma1_1") p.gamma1[0] = x;
                else if (k == "gamma1_2") p.gamma1[1] = x;
                else if (k == "gammaphi_1") p.gammaphi[0] = x;
                else if (k == "gammaphi_2") p.gammaphi[1] = x;
                else if (k == "eta") p.eta = x;
                else if (k == "phi_lo") p.phi_lo = x;
                else if (k == "jq") p.jq = x;
                else if (k == "omega_a1") p.omega_a_tilde[0] = x;
                else if (k == "omega_a2") p.omega_a_tilde[1] = x;
            });
        } else if (section == "drive") {
            Drive& d = c.params.drive;
            apply_section(node, section, kDriveKeys, [&](const std::string& k, const std::string& v, const std::string& f) {
                if (k == "shape") {
                    const std::string s = trim(v);
                    if (s == "constant") d.shape = Drive::Shape::constant;
                    else if (s == "tanh_ramp") d.shape = Drive::Shape::tanh_ramp;
                    else throw ConfigError(f + ": expected constant or tanh_ramp, got '" + v + "'");
                } else if (k == "amplitude") {
                    d.amplitude = parse_double(f, v);
                } else {
                    d.sigma = parse_double(f, v);
                }
            });
        } else if (section == "sweep") {
            apply_section(node, section, kSweepKeys, [&](const std::string&, const std::string& v, const std::string& f) {
                c.cases = parse_cases(f, v);
            });
        } else if (section == "ensemble") {
            apply_section(node, section, kEnsembleKeys, [&](const std::string&, const std::string& v, const std::string& f) {
                c.histogram_times = parse_list(f, v);
            });
        } else if (section == "threshold") {
            apply_section(node, section, kThresholdKeys, [&](const std::string& k, const std::string& v, const std::string& f) {
                if (k == "t") c.classify_time = parse_double(f, v);
                else c.thresholds = parse_list(f, v);
            });
        } else if (section == "rates") {
            RatesSweep& r = c.rates;
            apply_section(node, section, kRatesKeys, [&](const std::string& k, const std::string& v, const std::string& f) {
                if (k == "delta_r_min") r.delta_r_min = parse_double(f, v);
                else if (k == "delta_r_max") r.delta_r_max = parse_double(f, v);
                else if (k == "delta_r_points") r.delta_r_points = parse_int<int>(f, v);
                else if (k == "chi_min") r.chi_min = parse_double(f, v);
                else if (k == "chi_max") r.chi_max = parse_double(f, v);
                else r.chi_points = parse_int<int>(f, v);
            });
        } else if (section == "oracle") {
            OracleOptions& o = c.oracle;
            apply_section(node, section, kOracleKeys, [&](const std::string& k, const std::string& v, const std::string& f) {
                if (k == "fock_cutoff") o.fock_cutoff = parse_int<int>(f, v);
                else if (k == "t_final") o.t_final = parse_double(f, v);
                else if (k == "dt") o.dt = parse_double(f, v);
                else if (k == "cadence") o.cadence = parse_double(f, v);
                else o.purcell_channel = parse_bool(f, v);
            });
        } else {
            throw ConfigError(section + ": unknown section");
        }
    }
}

void check_multiple(const std::string& field, double value, double dt) {
    try {
        grid_steps(value, dt);
    } catch (const ConfigError&) {
        throw ConfigError(field + ": must be a positive whole multiple of run.dt");
    }
}

}  // namespace

const char* library_version() { return JOINTMEAS_VERSION; }

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void RunConfig::validate() const {
    params.validate();
    if (!(dt > 0.0)) throw ConfigError("run.dt: must be positive");
    check_multiple("run.t_final", t_final, dt);
    check_multiple("run.cadence", cadence, dt);
    if (n_traj < 1) throw ConfigError("run.n_traj: must be at least 1");
    for (const auto& c : cases) {
        SystemParams p = params;
        p.gamma1 = {c.gamma1, c.gamma1};
        p.gammaphi = {c.gammaphi, c.gammaphi};
        p.eta = c.eta;
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("sweep.cases: ") + e.what());
        }
    }
    for (double t : histogram_times) {
        if (t < 0.0 || t > t_final) throw ConfigError("ensemble.histogram_times: outside [0, run.t_final]");
    }
    if (classify_time < 0.0 || classify_time > t_final) {
        throw ConfigError("threshold.t: must lie in [0, run.t_final] (0 means run.t_final)");
    }
    for (double s : thresholds) {
        if (!(s >= 0.0)) throw ConfigError("threshold.s_th: values must be non-negative");
    }
    if (rates.delta_r_points < 2 || rates.chi_points < 2) throw ConfigError("rates: need at least 2 points per sweep");
    if (!(rates.chi_min > 0.0) || !(rates.chi_max > rates.chi_min)) {
        throw ConfigError("rates.chi_min/chi_max: need 0 < chi_min < chi_max");
    }
    if (!(rates.delta_r_max > rates.delta_r_min)) throw ConfigError("rates.delta_r_max: must exceed delta_r_min");
    if (oracle.fock_cutoff < 1) throw ConfigError("oracle.fock_cutoff: must be at least 1");
    if (!(oracle.dt > 0.0)) throw ConfigError("oracle.dt: must be positive");
    check_multiple("oracle.t_final", oracle.t_final, oracle.dt);
    check_multiple("oracle.cadence", oracle.cadence, oracle.dt);
}

bool operator==(const SystemParams& a, const SystemParams& b) {
    return a.kappa == b.kappa && a.kappa_hz == b.kappa_hz && a.g == b.g && a.delta_qc == b.delta_qc &&
           a.delta_r == b.delta_r && a.gamma1 == b.gamma1 && a.gammaphi == b.gammaphi && a.eta == b.eta &&
           a.phi_lo == b.phi_lo && a.drive.shape == b.drive.shape && a.drive.amplitude == b.drive.amplitude &&
           a.drive.sigma == b.drive.sigma && a.jq == b.jq && a.omega_a_tilde == b.omega_a_tilde;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.preset == b.preset && a.params == b.params && a.t_final == b.t_final && a.dt == b.dt &&
           a.cadence == b.cadence && a.n_traj == b.n_traj && a.master_seed == b.master_seed &&
           a.workers == b.workers && a.out_dir == b.out_dir && a.cases == b.cases &&
           a.histogram_times == b.histogram_times && a.classify_time == b.classify_time &&
           a.thresholds == b.thresholds && a.rates == b.rates && a.oracle.fock_cutoff == b.oracle.fock_cutoff &&
           a.oracle.t_final == b.oracle.t_final && a.oracle.dt == b.oracle.dt &&
           a.oracle.cadence == b.oracle.cadence && a.oracle.purcell_channel == b.oracle.purcell_channel;
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4"}; }

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    c.preset = name;
    c.out_dir = "out/" + name;
    if (name == "fig1") {
        c.params = SystemParams::fig1();
        c.t_final = 5.0;
        c.n_traj = 1;
    } else if (name == "fig2") {
        c.params = SystemParams::fig2();
        c.t_final = 10.0;
        c.n_traj = 1;
        c.cases = {{0.0, 0.0, 1.0}, {1.0 / 250, 0.0, 1.0}};
    } else if (name == "fig3") {
        c.params = SystemParams::fig2();
        c.t_final = 10.0;
        c.n_traj = 10000;
        c.cases = {{0.0, 0.0, 1.0}, {1.0 / 250, 0.0, 0.8}, {1.0 / 250, 0.0, 0.2}, {1.0 / 250, 0.0, 0.05}};
        c.histogram_times = {1.6, 6.3};
    } else if (name == "fig4") {
        c.params = SystemParams::fig2();
        c.params.gamma1 = {1.0 / 250, 1.0 / 250};
        c.params.eta = 0.05;
        c.t_final = 18.5;
        c.cadence = 0.5;
        c.n_traj = 10000;
        c.classify_time = 18.5;
        for (int i = 0; i <= 40; ++i) c.thresholds.push_back(0.5 * i);
    } else {
        throw ConfigError("run.preset: unknown preset '" + name + "' (expected fig1, fig2, fig3 or fig4)");
    }
    return c;
}

RunConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    RunConfig c;
    if (const auto preset = tree.get_optional<std::string>("run.preset"); preset && !trim(*preset).empty()) {
        c = preset_config(trim(*preset));
    }
    apply_tree(tree, c);
    return c;
}

RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string write_config(const RunConfig& c) {
    const SystemParams& p = c.params;
    std::ostringstream out;
    out << "[run]\n";
    if (!c.preset.empty()) out << "preset = " << c.preset << "\n";
    out << "t_final = " << format_double(c.t_final) << "\n"
        << "dt = " << format_double(c.dt) << "\n"
        << "cadence = " << format_double(c.cadence) << "\n"
        << "n_traj = " << c.n_traj << "\n"
        << "master_seed = " << c.master_seed << "\n"
        << "workers = " << c.workers << "\n"
        << "out = " << c.out_dir << "\n\n";
    out << "[system]\n"
        << "kappa = " << format_double(p.kappa) << "\n"
        << "kappa_hz = " << format_double(p.kappa_hz) << "\n"
        << "g1 = " << format_double(p.g[0]) << "\n"
        << "g2 = " << format_double(p.g[1]) << "\n"
        << "delta1 = " << format_double(p.delta_qc[0]) << "\n"
        << "delta2 = " << format_double(p.delta_qc[1]) << "\n"
        << "delta_r = " << format_double(p.delta_r) << "\n"
        << "gamma1_1 = " << format_double(p.gamma1[0]) << "\n"
        << "gamma1_2 = " << format_double(p.gamma1[1]) << "\n"
        << "gammaphi_1 = " << format_double(p.gammaphi[0]) << "\n"
        << "gammaphi_2 = " << format_double(p.gammaphi[1]) << "\n"
        << "eta = " << format_double(p.eta) << "\n"
        << "phi_lo = " << format_double(p.phi_lo) << "\n"
        << "jq = " << format_double(p.jq) << "\n"
        << "omega_a1 = " << format_double(p.omega_a_tilde[0]) << "\n"
        << "omega_a2 = " << format_double(p.omega_a_tilde[1]) << "\n\n";
    out << "[drive]\n"
        << "shape = " << (p.drive.shape == Drive::Shape::constant ? "constant" : "tanh_ramp") << "\n"
        << "amplitude = " << format_double(p.drive.amplitude) << "\n"
        << "sigma = " << format_double(p.drive.sigma) << "\n\n";
    out << "[sweep]\n"
        << "cases = " << join_cases(c.cases) << "\n\n";
    out << "[ensemble]\n"
        << "histogram_times = " << join(c.histogram_times) << "\n\n";
    out << "[threshold]\n"
        << "t = " << format_double(c.classify_time) << "\n"
        << "s_th = " << join(c.thresholds) << "\n\n";
    out << "[rates]\n"
        << "delta_r_min = " << format_double(c.rates.delta_r_min) << "\n"
        << "delta_r_max = " << format_double(c.rates.delta_r_max) << "\n"
        << "delta_r_points = " << c.rates.delta_r_points << "\n"
        << "chi_min = " << format_double(c.rates.chi_min) << "\n"
        << "chi_max = " << format_double(c.rates.chi_max) << "\n"
        << "chi_points = " << c.rates.chi_points << "\n\n";
    out << "[oracle]\n"
        << "fock_cutoff = " << c.oracle.fock_cutoff << "\n"
        << "t_final = " << format_double(c.oracle.t_final) << "\n"
        << "dt = " << format_double(c.oracle.dt) << "\n"
        << "cadence = " << format_double(c.oracle.cadence) << "\n"
        << "purcell = " << (c.oracle.purcell_channel ? "true" : "false") << "\n";
    return out.str();
}

std::uint64_t params_hash(const SystemParams& params) {
    RunConfig c;
    c.params = params;
    const std::string text = write_config(c);
    const auto begin = text.find("[system]");
    const auto end = text.find("[sweep]");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = begin; i < end; ++i) {
        h ^= static_cast<unsigned char>(text[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace jmeas
