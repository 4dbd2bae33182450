#include "output.hpp"

#include <cstdio>
#include <fstream>

namespace jmeas::cli {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_file(const std::filesystem::path& file, const std::string& content, std::ios::openmode mode) {
    std::ofstream out(file, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("write to '" + file.string() + "' failed");
}

}  // namespace

OutputDir::OutputDir(const std::string& path, std::string command, const RunConfig& config)
    : path_(path), command_(std::move(command)), config_(config) {
    std::error_code ec;
    std::filesystem::create_directories(path_, ec);
    if (ec || !std::filesystem::is_directory(path_)) {
        throw IoError("cannot create output directory '" + path + "': " + ec.message());
    }
    write_text("config.ini", write_config(config_));
}

nlohmann::ordered_json OutputDir::manifest() const {
    const SystemParams& p = config_.params;
    const DispersiveCoupling dc = derive_dispersive(p);
    nlohmann::ordered_json m;
    m["tool"] = "jointmeas";
    m["version"] = library_version();
    m["command"] = command_;
    m["preset"] = config_.preset;
    m["params_hash"] = hex64(params_hash(p));
    m["master_seed"] = config_.master_seed;
    m["dt"] = config_.dt;
    m["t_final"] = config_.t_final;
    m["n_traj"] = config_.n_traj;
    m["lambda"] = dc.lambda;
    m["chi"] = dc.chi;
    const double g1sum = p.gamma1[0] + p.gamma1[1];
    m["kappa_half_over_gamma1_sum"] = g1sum > 0.0 ? nlohmann::ordered_json(0.5 * p.kappa / g1sum) : nullptr;
    m["detuning_sign"] = "Delta_j > 0 chosen so that chi_j = g_j^2 / Delta_j > 0";
    m["warnings"] = p.warnings();
    m["config"] = write_config(config_);
    return m;
}

void OutputDir::write_csv(const std::string& name, const std::string& body) const {
    std::string head = "# jointmeas " + std::string(library_version()) + " " + command_ +
                       " params_hash=" + hex64(params_hash(config_.params)) +
                       " master_seed=" + std::to_string(config_.master_seed) + " dt=" + format_double(config_.dt) +
                       "\n";
    write_file(path_ / name, head + body, std::ios::out);
}

void OutputDir::write_text(const std::string& name, const std::string& body) const {
    write_file(path_ / name, body, std::ios::out);
}

void OutputDir::write_binary(const std::string& name, const std::string& bytes) const {
    write_file(path_ / name, bytes, std::ios::out | std::ios::binary);
}

void OutputDir::write_json(const std::string& name, nlohmann::ordered_json doc) const {
    doc["manifest"] = manifest();
    write_file(path_ / name, doc.dump(2) + "\n", std::ios::out);
}

void LongTable::add(const std::string& panel, const std::string& series, double x, double y) {
    body_ += panel + "," + series + "," + format_double(x) + "," + format_double(y) + "\n";
}

std::string LongTable::str() const { return body_; }

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_double(values[i]);
    }
    return row + "\n";
}

}  // namespace jmeas::cli
