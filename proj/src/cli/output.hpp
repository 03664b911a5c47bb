#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gldp::cli {

/// RFC-4180 CSV writer: CRLF line ends, fields quoted when needed.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::vector<std::string> row);
    std::string str() const;

private:
    std::size_t width_;
    std::string body_;
};

std::string csv_escape(std::string_view field);

/// Minimal RFC-4180 reader (quotes, embedded CRLF); used for target files and tests.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

/// Collects written artifacts, then writes manifest.json next to them.
class ArtifactSet {
public:
    explicit ArtifactSet(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    void write(const std::string& name, std::string_view content, const std::string& kind);
    void write_manifest(const nlohmann::ordered_json& config_echo, std::uint64_t seed,
                        const std::string& command, std::uint64_t input_digest,
                        const nlohmann::ordered_json& summary) const;

private:
    std::filesystem::path dir_;
    nlohmann::ordered_json artifacts_ = nlohmann::ordered_json::array();
};

std::string utc_timestamp();

}  // namespace gldp::cli
