#include "commands.hpp"

#include <cmath>
#include <sstream>

#include "jointmeas/trajectory_io.hpp"

namespace jmeas::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kHalfPi = std::numbers::pi / 2;
constexpr const char* kPairNames[6] = {"gg_ge", "gg_eg", "gg_ee", "ge_eg", "ge_ee", "eg_ee"};
constexpr int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

struct Case {
    std::string label;
    SystemParams params;
    SweepCase values;
};

std::vector<Case> expand_cases(const RunConfig& config) {
    std::vector<Case> out;
    if (config.cases.empty()) {
        const SystemParams& p = config.params;
        out.push_back({"base", p, {p.gamma1[0], p.gammaphi[0], p.eta}});
        return out;
    }
    for (const SweepCase& c : config.cases) {
        SystemParams p = config.params;
        p.gamma1 = {c.gamma1, c.gamma1};
        p.gammaphi = {c.gammaphi, c.gammaphi};
        p.eta = c.eta;
        std::string label = "gamma1=" + format_double(c.gamma1) + " gammaphi=" + format_double(c.gammaphi) +
                            " eta=" + format_double(c.eta);
        out.push_back({label, p, c});
    }
    return out;
}

json case_json(const Case& c) {
    return json{{"gamma1", c.values.gamma1}, {"gammaphi", c.values.gammaphi}, {"eta", c.values.eta}};
}

Mat4 initial_state() { return states::projector(states::plus_plus()); }

std::string rho_header() {
    std::string h;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) h += ",rho_re_" + std::to_string(r) + std::to_string(c);
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) h += ",rho_im_" + std::to_string(r) + std::to_string(c);
    return h;
}

void append_rho(std::vector<double>& row, const Mat4& rho) {
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) row.push_back(rho(r, c).real());
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) row.push_back(rho(r, c).imag());
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
    for (double& x : v) x = std::exp(x);
    return v;
}

/// Least-squares slope of log y against log x over x in [lo, hi].
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::nan("");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string time_tag(double t) {
    std::string s = format_double(t);
    for (char& ch : s) {
        if (ch == '.') ch = 'p';
    }
    return s;
}

}  // namespace

SystemParams with_chi(const SystemParams& params, double chi) {
    SystemParams p = params;
    for (int j = 0; j < 2; ++j) {
        const double sign = params.g[j] < 0.0 ? -1.0 : 1.0;
        p.g[j] = sign * std::sqrt(chi * std::abs(params.delta_qc[j]));
    }
    return p;
}

NormalizedRates normalized_rates(const SystemParams& params) {
    const MeasurementSnapshot snap = snapshot(steady_alphas(params), params);
    auto rate = [&](Component k, double phi) {
        return information_rate(snap.beta[index_of(k)], phi, params.kappa, params.eta);
    };
    NormalizedRates r{rate(Component::k01, 0.0),     rate(Component::k10, 0.0),     rate(Component::k11, 0.0),
                      rate(Component::k01, kHalfPi), rate(Component::k10, kHalfPi), rate(Component::k11, kHalfPi),
                      snap.gamma_d(index_of(Logical::ee), index_of(Logical::gg))};
    const double total = r.g01_0 + r.g10_0 + r.g11_0 + r.g01_pi2 + r.g10_pi2 + r.g11_pi2;
    if (total > 0.0) {
        for (double* v : {&r.g01_0, &r.g10_0, &r.g11_0, &r.g01_pi2, &r.g10_pi2, &r.g11_pi2}) *v /= total;
        r.dephasing_ee_gg /= total;
    }
    return r;
}

void cmd_rates(const RunConfig& config) {
    config.validate();
    OutputDir out(config.out_dir, "rates", config);
    const SystemParams& p = config.params;
    LongTable plot;
    json doc;

    const CavityAmplitudes alphas = steady_alphas(p);
    std::string a_csv = "state,re_alpha,im_alpha\n";
    json a_json = json::array();
    for (Logical x : kLogicalStates) {
        const cplx a = alphas.alpha[index_of(x)];
        a_csv += std::string(kLogicalLabels[index_of(x)]) + "," + format_double(a.real()) + "," +
                 format_double(a.imag()) + "\n";
        plot.add("fig1a", std::string(kLogicalLabels[index_of(x)]), a.real(), a.imag());
        a_json.push_back({{"state", kLogicalLabels[index_of(x)]}, {"re", a.real()}, {"im", a.imag()}});
    }
    out.write_csv("fig1a_alpha.csv", a_csv);
    doc["steady_alpha"] = a_json;

    const MeasurementSnapshot snap = snapshot(alphas, p);
    json rates;
    for (auto [k, name] : {std::pair{Component::k01, "01"}, {Component::k10, "10"}, {Component::k11, "11"}}) {
        rates["Gamma_" + std::string(name) + "(0)"] =
            information_rate(snap.beta[index_of(k)], 0.0, p.kappa, p.eta);
        rates["Gamma_" + std::string(name) + "(pi/2)"] =
            information_rate(snap.beta[index_of(k)], kHalfPi, p.kappa, p.eta);
    }
    rates["Gamma_d_ee_gg"] = snap.gamma_d(index_of(Logical::ee), index_of(Logical::gg));
    rates["A_c_ee_gg"] = snap.a_c(index_of(Logical::ee), index_of(Logical::gg));
    doc["steady_rates"] = rates;

    std::string b_csv = "delta_r,g01_0,g10_0,g11_0,g01_pi2,g10_pi2,g11_pi2\n";
    std::vector<double> dr = linspace(config.rates.delta_r_min, config.rates.delta_r_max, config.rates.delta_r_points);
    std::vector<double> weight_gap;
    for (double d : dr) {
        SystemParams q = p;
        q.delta_r = d;
        const NormalizedRates r = normalized_rates(q);
        b_csv += csv_row({d, r.g01_0, r.g10_0, r.g11_0, r.g01_pi2, r.g10_pi2, r.g11_pi2});
        plot.add("fig1b_phi0", "Gamma01", d, r.g01_0);
        plot.add("fig1b_phi0", "Gamma11", d, r.g11_0);
        plot.add("fig1b_phi_pi2", "Gamma01", d, r.g01_pi2);
        plot.add("fig1b_phi_pi2", "Gamma11", d, r.g11_pi2);
        weight_gap.push_back((r.g01_0 + r.g01_pi2) - (r.g11_0 + r.g11_pi2));
    }
    out.write_csv("fig1b_rates.csv", b_csv);
    json crossings = json::array();
    for (std::size_t i = 1; i < dr.size(); ++i) {
        if ((weight_gap[i - 1] < 0.0) != (weight_gap[i] < 0.0)) {
            const double f = weight_gap[i - 1] / (weight_gap[i - 1] - weight_gap[i]);
            crossings.push_back(dr[i - 1] + f * (dr[i] - dr[i - 1]));
        }
    }
    doc["equal_weight_crossings_delta_r"] = crossings;
    doc["two_chi"] = 2.0 * derive_dispersive(p).chi[0];

    std::string c_csv = "chi,g01_0,g10_0,g11_pi2,g11_0,g01_pi2,g10_pi2,parity_over_dephasing\n";
    std::vector<double> chis = logspace(config.rates.chi_min, config.rates.chi_max, config.rates.chi_points);
    std::vector<double> g01, ratio;
    for (double chi : chis) {
        const NormalizedRates r = normalized_rates(with_chi(p, chi));
        const double q = r.dephasing_ee_gg != 0.0 ? r.g11_pi2 / std::abs(r.dephasing_ee_gg) : std::nan("");
        c_csv += csv_row({chi, r.g01_0, r.g10_0, r.g11_pi2, r.g11_0, r.g01_pi2, r.g10_pi2, q});
        plot.add("fig1c", "Gamma01(0)", chi, r.g01_0);
        plot.add("fig1c", "Gamma11(pi/2)", chi, r.g11_pi2);
        g01.push_back(r.g01_0);
        ratio.push_back(q);
    }
    out.write_csv("fig1c_rates.csv", c_csv);
    doc["loglog_slope_chi_2_20"] = {{"Gamma01(0)", loglog_slope(chis, g01, 2.0, 20.0)},
                                    {"Gamma11(pi/2)/|Gamma_d_ee_gg|", loglog_slope(chis, ratio, 2.0, 20.0)}};

    out.write_csv("fig1_long.csv", plot.str());
    out.write_json("rates.json", doc);
}

void cmd_me(const RunConfig& config) {
    config.validate();
    OutputDir out(config.out_dir, "me", config);
    LongTable plot;
    json doc;
    doc["cases"] = json::array();
    const auto cases = expand_cases(config);
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const Case& c = cases[ci];
        MeOptions opt;
        opt.t_final = config.t_final;
        opt.dt = config.dt;
        opt.cadence = config.cadence;
        const MeResult res = evolve_me(initial_state(), c.params, opt);

        std::string csv = "t,F_phi_plus,F_psi_plus,concurrence,purity";
        for (auto l : kLogicalLabels) csv += ",abs_alpha_" + std::string(l);
        for (const char* n : kPairNames) csv += std::string(",Gamma_d_") + n;
        for (const char* n : kPairNames) csv += std::string(",A_c_") + n;
        csv += rho_header() + "\n";
        double max_positivity_gap = 0.0;
        for (const MeSample& s : res.samples) {
            const double f_phi = fidelity(s.rho, states::phi_plus());
            const double f_psi = fidelity(s.rho, states::psi_plus());
            std::vector<double> row{s.t, f_phi, f_psi, concurrence(s.rho), purity(s.rho)};
            for (const cplx& a : s.alphas.alpha) row.push_back(std::abs(a));
            for (const auto& pr : kPairs) row.push_back(s.snap.gamma_d(pr[0], pr[1]));
            for (const auto& pr : kPairs) row.push_back(s.snap.a_c(pr[0], pr[1]));
            append_rho(row, s.rho);
            csv += csv_row(row);
            plot.add("fig2", "F_phi_plus " + c.label, s.t, f_phi);
            plot.add("fig2", "F_psi_plus " + c.label, s.t, f_psi);
            max_positivity_gap = std::max(max_positivity_gap, -min_eigenvalue(s.rho));
        }
        out.write_csv("me_case" + std::to_string(ci) + ".csv", csv);
        const Mat4& last = res.samples.back().rho;
        json cj = case_json(c);
        cj["file"] = "me_case" + std::to_string(ci) + ".csv";
        cj["dt_used"] = res.dt_used;
        cj["final_F_phi_plus"] = fidelity(last, states::phi_plus());
        cj["final_F_psi_plus"] = fidelity(last, states::psi_plus());
        cj["final_concurrence"] = concurrence(last);
        cj["max_negative_eigenvalue"] = max_positivity_gap;
        doc["cases"].push_back(cj);
    }
    out.write_csv("fig2_long.csv", plot.str());
    out.write_json("me.json", doc);
}

void cmd_trajectory(const RunConfig& config) {
    config.validate();
    OutputDir out(config.out_dir, "trajectory", config);
    TrajectoryOptions opt;
    opt.t_final = config.t_final;
    opt.dt = config.dt;
    opt.cadence = config.cadence;
    opt.seed = config.master_seed;
    const MeasurementSchedule schedule(config.params, config.dt, grid_steps(config.t_final, config.dt));
    const TrajectoryRecord rec = run_trajectory(initial_state(), schedule, opt);

    std::ostringstream bin;
    write_trajectory(bin, rec, params_hash(config.params));
    out.write_binary("trajectory.jmtraj", bin.str());
    std::ostringstream s_csv, j_csv;
    write_s_csv(s_csv, rec);
    write_current_csv(j_csv, rec);
    out.write_csv("trajectory_s.csv", s_csv.str());
    out.write_csv("trajectory_current.csv", j_csv.str());

    std::string csv = "t,s,theta_ac,F_phi_plus,F_psi_plus_corrected,concurrence,purity" + rho_header() + "\n";
    LongTable plot;
    for (std::size_t i = 0; i < rec.rho.size(); ++i) {
        const Mat4& rho = rec.rho[i];
        const double f_phi = fidelity(rho, states::phi_plus());
        const double f_psi = fidelity(correct_ee_gg_phase(rho, rec.theta_ac[i]), states::psi_plus());
        std::vector<double> row{rec.times[i], rec.s[i], rec.theta_ac[i], f_phi, f_psi, concurrence(rho), purity(rho)};
        append_rho(row, rho);
        csv += csv_row(row);
        plot.add("fidelity", "F_phi_plus", rec.times[i], f_phi);
        plot.add("fidelity", "F_psi_plus_corrected", rec.times[i], f_psi);
        plot.add("integrated_current", "s", rec.times[i], rec.s[i]);
    }
    out.write_csv("trajectory_states.csv", csv);
    out.write_csv("trajectory_long.csv", plot.str());

    json doc;
    doc["seed"] = rec.seed;
    doc["n_steps"] = rec.n_steps;
    doc["retried_steps"] = rec.retried_steps;
    doc["aborted"] = rec.aborted;
    doc["diagnostic"] = rec.diagnostic;
    doc["gamma11_steady"] = rec.gamma11_steady;
    if (!rec.rho.empty()) {
        const Mat4& last = rec.rho.back();
        doc["final_s"] = rec.s.back();
        doc["final_F_phi_plus"] = fidelity(last, states::phi_plus());
        doc["final_F_psi_plus_corrected"] =
            fidelity(correct_ee_gg_phase(last, rec.theta_ac.back()), states::psi_plus());
        doc["final_concurrence"] = concurrence(last);
    }
    out.write_json("trajectory.json", doc);
    if (rec.aborted) throw QualityError("trajectory aborted: " + rec.diagnostic);
}

void cmd_ensemble(const RunConfig& config) {
    config.validate();
    OutputDir out(config.out_dir, "ensemble", config);
    LongTable plot;
    json doc;
    doc["cases"] = json::array();
    const auto cases = expand_cases(config);
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const Case& c = cases[ci];
        EnsembleOptions opt;
        opt.n_traj = config.n_traj;
        opt.t_final = config.t_final;
        opt.dt = config.dt;
        opt.cadence = config.cadence;
        opt.master_seed = config.master_seed;
        opt.workers = config.workers;
        opt.keep_states = false;
        const EnsembleResult res = run_ensemble(initial_state(), c.params, opt);

        std::string csv = "t,mean_concurrence,mean_purity,F_phi_plus_of_mean,F_psi_plus_of_mean\n";
        json series = json::array();
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            csv += csv_row({res.times[k], res.mean_concurrence[k], res.mean_purity[k],
                            fidelity(res.mean_rho[k], states::phi_plus()),
                            fidelity(res.mean_rho[k], states::psi_plus())});
            plot.add("fig3a", "concurrence " + c.label, res.times[k], res.mean_concurrence[k]);
            series.push_back(res.mean_concurrence[k]);
        }
        const std::string stem = "ensemble_case" + std::to_string(ci);
        out.write_csv(stem + ".csv", csv);

        json cj = case_json(c);
        cj["file"] = stem + ".csv";
        cj["n_completed"] = res.n_completed;
        cj["n_aborted"] = res.n_aborted;
        cj["gamma11_steady"] = res.gamma11_steady;
        cj["times"] = res.times;
        cj["mean_concurrence"] = series;
        cj["histograms"] = json::array();
        for (double t : config.histogram_times) {
            const SHistogram h = histogram_s(res.records, t);
            std::string hcsv = "bin_lo,bin_hi,count\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                hcsv += csv_row({h.edges[b], h.edges[b + 1], static_cast<double>(h.counts[b])});
                plot.add("fig3_hist_t" + format_double(t), c.label, 0.5 * (h.edges[b] + h.edges[b + 1]),
                         static_cast<double>(h.counts[b]));
            }
            const std::string hname = stem + "_hist_t" + time_tag(t) + ".csv";
            out.write_csv(hname, hcsv);
            json hj{{"t", t}, {"file", hname}, {"bin_width", h.bin_width}, {"n", h.samples.size()}};
            if (h.fit) {
                hj["fit"] = json::array();
                for (const auto& g : h.fit->components) {
                    hj["fit"].push_back({{"weight", g.weight}, {"mean", g.mean}, {"sigma", g.sigma}});
                }
                hj["overlap"] = h.fit->overlap;
                hj["crossing"] = h.fit->crossing;
                hj["separation"] = h.fit->separation();
            } else {
                hj["note"] = h.note;
            }
            cj["histograms"].push_back(hj);
        }
        doc["cases"].push_back(cj);
    }
    out.write_csv("fig3_long.csv", plot.str());
    out.write_json("ensemble.json", doc);
}

void cmd_threshold(const RunConfig& config) {
    config.validate();
    OutputDir out(config.out_dir, "threshold", config);
    EnsembleOptions opt;
    opt.n_traj = config.n_traj;
    opt.t_final = config.t_final;
    opt.dt = config.dt;
    opt.cadence = config.cadence;
    opt.master_seed = config.master_seed;
    opt.workers = config.workers;
    opt.keep_states = true;
    const EnsembleResult res = run_ensemble(initial_state(), config.params, opt);

    std::vector<double> thresholds = config.thresholds;
    if (thresholds.empty()) thresholds.push_back(0.0);
    const double t_class = config.classify_time > 0.0 ? config.classify_time : config.t_final;
    const auto sweep = sweep_threshold(res.records, t_class, thresholds);

    std::string csv = "s_th,P_s,Fbar,Cbar,F_plus,F_minus,C_plus,C_minus,n_plus,n_minus,n_discarded,partial\n";
    LongTable plot;
    json rows = json::array();
    for (const EnsembleStats& st : sweep) {
        csv += csv_row({st.s_th, st.success_probability, st.fbar, st.cbar, st.fidelity_plus, st.fidelity_minus,
                        st.concurrence_plus, st.concurrence_minus, static_cast<double>(st.n_plus),
                        static_cast<double>(st.n_minus), static_cast<double>(st.n_discarded),
                        st.partial() ? 1.0 : 0.0});
        plot.add("fig4", "Cbar", st.s_th, st.cbar);
        plot.add("fig4", "Fbar", st.s_th, st.fbar);
        plot.add("fig4", "P_s", st.s_th, st.success_probability);
        rows.push_back({{"s_th", st.s_th},
                        {"P_s", st.success_probability},
                        {"Fbar", st.fbar},
                        {"Cbar", st.cbar},
                        {"n_plus", st.n_plus},
                        {"n_minus", st.n_minus},
                        {"partial", st.partial()}});
    }
    out.write_csv("threshold.csv", csv);
    out.write_csv("fig4_long.csv", plot.str());

    json doc;
    doc["t"] = t_class;
    doc["s0"] = sweep.front().s0;
    doc["n_completed"] = res.n_completed;
    doc["n_aborted"] = res.n_aborted;
    doc["gamma11_steady"] = res.gamma11_steady;
    doc["sweep"] = rows;
    const ThresholdPlateau plateau = threshold_plateau(sweep);
    if (plateau.found) {
        doc["plateau"] = {{"rule", "largest s_th with both branches >= 1% of trajectories"},
                          {"s_th", plateau.s_th},
                          {"Fbar", plateau.fbar},
                          {"Cbar", plateau.cbar},
                          {"P_s", plateau.success_probability}};
    } else {
        doc["plateau"] = nullptr;
    }
    out.write_json("threshold.json", doc);
}

void cmd_oracle_check(const RunConfig& config) {
    config.validate();
    OutputDir out(config.out_dir, "oracle-check", config);
    const OracleOptions& oo = config.oracle;
    if (oo.fock_cutoff < minimum_fock_cutoff(config.params)) {
        throw ConfigError("oracle.fock_cutoff: must be at least " +
                          std::to_string(minimum_fock_cutoff(config.params)) + " for this drive amplitude");
    }
    const Mat4 rho0 = initial_state();
    const OracleResult oracle = evolve_full_oracle(rho0, config.params, oo);
    MeOptions mo;
    mo.t_final = oo.t_final;
    mo.dt = oo.dt;
    mo.cadence = oo.cadence;
    const MeResult reduced = evolve_me(rho0, config.params, mo);

    std::string csv = "t,trace_distance,photons_oracle,photons_reduced,top_fock_population\n";
    LongTable plot;
    double max_td = 0.0;
    double max_photon_err = 0.0;
    for (std::size_t i = 0; i < oracle.samples.size() && i < reduced.samples.size(); ++i) {
        const OracleSample& o = oracle.samples[i];
        const MeSample& r = reduced.samples[i];
        const double td = trace_distance(o.rho_qubits, r.rho);
        const double n_red = reduced_photon_number(r.rho, r.alphas.alpha);
        max_td = std::max(max_td, td);
        if (o.photon_number > 1e-2) {
            max_photon_err = std::max(max_photon_err, std::abs(n_red - o.photon_number) / o.photon_number);
        }
        csv += csv_row({o.t, td, o.photon_number, n_red, o.top_fock_population});
        plot.add("oracle", "trace_distance", o.t, td);
        plot.add("oracle", "photons_oracle", o.t, o.photon_number);
        plot.add("oracle", "photons_reduced", o.t, n_red);
    }
    out.write_csv("oracle.csv", csv);
    out.write_csv("oracle_long.csv", plot.str());
    json doc;
    doc["fock_cutoff"] = oo.fock_cutoff;
    doc["dimension"] = oracle.dimension;
    doc["max_trace_distance"] = max_td;
    doc["max_photon_relative_error"] = max_photon_err;
    doc["trace_distance_bound"] = 0.05;
    doc["photon_relative_bound"] = 0.10;
    doc["warnings"] = oracle.warnings;
    out.write_json("oracle.json", doc);
    if (max_td > 0.05 || max_photon_err > 0.10) {
        std::ostringstream msg;
        msg << "oracle mismatch: max trace distance " << max_td << ", max photon error " << max_photon_err;
        throw QualityError(msg.str());
    }
}

}  // namespace jmeas::cli
