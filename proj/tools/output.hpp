#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jointmeas/config.hpp"

namespace jmeas::cli {

/// File system failure while writing results.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Results quality below the acceptance bar (exit code 3).
class QualityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutputDir {
public:
    OutputDir(const std::string& path, std::string command, const RunConfig& config);

    const std::filesystem::path& path() const { return path_; }

    /// CSV with a leading '#' manifest line.
    void write_csv(const std::string& name, const std::string& body) const;
    void write_text(const std::string& name, const std::string& body) const;
    void write_binary(const std::string& name, const std::string& bytes) const;
    /// JSON document with the run manifest attached under "manifest".
    void write_json(const std::string& name, nlohmann::ordered_json doc) const;

    nlohmann::ordered_json manifest() const;

private:
    std::filesystem::path path_;
    std::string command_;
    RunConfig config_;
};

/// Long-format plot table: panel, series, x, y.
class LongTable {
public:
    void add(const std::string& panel, const std::string& series, double x, double y);
    std::string str() const;

private:
    std::string body_ = "panel,series,x,y\n";
};

std::string csv_row(const std::vector<double>& values);

}  // namespace jmeas::cli
