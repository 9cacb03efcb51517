#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace cli {

using nlohmann::json;

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
    std::vector<double> err;  ///< optional error bars
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_y = false;
    std::vector<Series> series;
};

/// Native SVG line chart.
std::string render_svg(const Plot& plot);

/// A table with a header row; numbers printed with 17 significant digits.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string render_csv(const Table& t);

std::string sha256_hex(const std::string& data);

/// Collects written artifacts (path relative to the output directory and
/// checksum) for the run manifest.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const json& j);
    json artifacts() const { return artifacts_; }

private:
    std::filesystem::path dir_;
    json artifacts_ = json::array();
};

}  // namespace cli
