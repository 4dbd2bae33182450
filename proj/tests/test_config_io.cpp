#include <gtest/gtest.h>

#include <sstream>

#include "jointmeas/config.hpp"
#include "jointmeas/trajectory_io.hpp"

using namespace jmeas;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config_string(text).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TrajectoryRecord short_record() {
    return run_trajectory(states::projector(states::plus_plus()), SystemParams::fig2(),
                          {.t_final = 0.2, .dt = 1e-3, .seed = 5, .cadence = 0.05});
}

}  // namespace

TEST(Config, PresetsRoundTrip) {
    for (const auto& name : preset_names()) {
        const RunConfig c = preset_config(name);
        EXPECT_NO_THROW(c.validate()) << name;
        EXPECT_TRUE(parse_config_string(write_config(c)) == c) << name;
    }
    EXPECT_THROW(preset_config("fig9"), ConfigError);
}

TEST(Config, ModifiedConfigRoundTrips) {
    RunConfig c = preset_config("fig3");
    c.params.delta_r = 0.1 + 0.2;
    c.params.phi_lo = 1.0 / 3.0;
    c.params.drive.shape = Drive::Shape::constant;
    c.master_seed = 18446744073709551557ULL;
    c.cases.push_back({1e-17, 3.3e-5, 0.123456789});
    c.thresholds = {0.0, 0.1, 0.7};
    c.oracle.purcell_channel = false;
    EXPECT_TRUE(parse_config_string(write_config(c)) == c);
}

TEST(Config, PresetSeedsBaseValues) {
    const RunConfig c = parse_config_string("[run]\npreset = fig4\nn_traj = 50\n[system]\neta = 0.5\n");
    EXPECT_EQ(c.preset, "fig4");
    EXPECT_EQ(c.n_traj, 50u);
    EXPECT_DOUBLE_EQ(c.params.eta, 0.5);
    EXPECT_DOUBLE_EQ(c.params.gamma1[0], 1.0 / 250);
    EXPECT_DOUBLE_EQ(c.t_final, 18.5);
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(error_of("[run]\ndt = abc\n").rfind("run.dt:", 0), 0u);
    EXPECT_EQ(error_of("[system]\neta = 2\n").rfind("eta:", 0), 0u);
    EXPECT_EQ(error_of("[run]\ncadence = 0.00015\n").rfind("run.cadence", 0), 0u);
    EXPECT_EQ(error_of("[run]\nbogus = 1\n"), "run.bogus: unknown key");
    EXPECT_EQ(error_of("[nope]\nx = 1\n"), "nope: unknown section");
    EXPECT_EQ(error_of("[sweep]\ncases = 1, 2\n").rfind("sweep.cases", 0), 0u);
    EXPECT_EQ(error_of("[run]\npreset = fig7\n").rfind("run.preset", 0), 0u);
    EXPECT_EQ(error_of("[threshold]\ns_th = -1\n").rfind("threshold.s_th", 0), 0u);
    EXPECT_EQ(error_of("[run]\nt_final = 2\n"), "");
}

TEST(Config, SweepCasesParse) {
    const RunConfig c = parse_config_string("[sweep]\ncases = 0, 0, 1; 0.004, 0, 0.2\n");
    ASSERT_EQ(c.cases.size(), 2u);
    EXPECT_EQ(c.cases[1], (SweepCase{0.004, 0.0, 0.2}));
}

TEST(Config, ParamsHashTracksPhysicsOnly) {
    RunConfig a = preset_config("fig2");
    RunConfig b = a;
    b.n_traj = 7;
    b.out_dir = "elsewhere";
    EXPECT_EQ(params_hash(a.params), params_hash(b.params));
    b.params.eta = 0.5;
    EXPECT_NE(params_hash(a.params), params_hash(b.params));
}

TEST(Config, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 4.0, 5e6}) {
        EXPECT_EQ(std::stod(format_double(v)), v) << format_double(v);
    }
    EXPECT_EQ(format_double(0.25), "0.25");
}

TEST(TrajectoryIo, BinaryRoundTrip) {
    TrajectoryRecord rec = short_record();
    rec.diagnostic = "note";
    std::stringstream buf;
    write_trajectory(buf, rec, 0xabcdef);
    const LoadedTrajectory loaded = read_trajectory(buf);
    const TrajectoryRecord& r = loaded.record;
    EXPECT_EQ(loaded.params_hash, 0xabcdefu);
    EXPECT_EQ(r.seed, rec.seed);
    EXPECT_EQ(r.dt, rec.dt);
    EXPECT_EQ(r.n_steps, rec.n_steps);
    EXPECT_EQ(r.stride, rec.stride);
    EXPECT_EQ(r.current_bin, rec.current_bin);
    EXPECT_EQ(r.gamma11_steady, rec.gamma11_steady);
    EXPECT_EQ(r.times, rec.times);
    EXPECT_EQ(r.s, rec.s);
    EXPECT_EQ(r.theta_ac, rec.theta_ac);
    EXPECT_EQ(r.current, rec.current);
    EXPECT_EQ(r.diagnostic, "note");
    ASSERT_EQ(r.rho.size(), rec.rho.size());
    for (std::size_t i = 0; i < r.rho.size(); ++i) EXPECT_TRUE(r.rho[i] == rec.rho[i]);
}

TEST(TrajectoryIo, RoundTripWithoutStates) {
    TrajectoryRecord rec = short_record();
    rec.rho.clear();
    rec.current.clear();
    rec.aborted = true;
    rec.abort_time = 0.1;
    std::stringstream buf;
    write_trajectory(buf, rec, 1);
    const auto r = read_trajectory(buf).record;
    EXPECT_TRUE(r.rho.empty());
    EXPECT_TRUE(r.current.empty());
    EXPECT_TRUE(r.aborted);
    EXPECT_EQ(r.abort_time, 0.1);
}

TEST(TrajectoryIo, RejectsCorruptInput) {
    std::stringstream buf;
    write_trajectory(buf, short_record(), 1);
    const std::string bytes = buf.str();

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::istringstream a(bad_magic);
    EXPECT_THROW(read_trajectory(a), FormatError);

    std::string bad_version = bytes;
    bad_version[8] = 9;
    std::istringstream b(bad_version);
    EXPECT_THROW(read_trajectory(b), FormatError);

    std::istringstream c(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(read_trajectory(c), FormatError);
}

TEST(TrajectoryIo, CsvExports) {
    const TrajectoryRecord rec = short_record();
    std::ostringstream s;
    write_s_csv(s, rec);
    std::istringstream lines(s.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "t,s,theta_ac");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    EXPECT_EQ(rows, 5);

    std::ostringstream j;
    write_current_csv(j, rec);
    EXPECT_EQ(j.str().rfind("t,J\n0.01,", 0), 0u);
}
