#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rhognf/codec.hpp"
#include "rhognf/observation.hpp"

namespace rhognf {

// "continuous" or "discrete:K".
struct ColumnSchema {
    std::optional<DequantSpec> discrete;

    static ColumnSchema parse(const std::string& text);
    std::string str() const;
};

std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

// Stamped into every output file.
struct Provenance {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    // "# rhognf <command> config_hash=<hex> seed=<n>"
    std::string comment_line() const;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  // DataError when absent
};

// Comma-separated with a header row; lines starting with '#' are skipped.
// Throws DataError carrying the 1-based line of the first problem.
Table read_csv(const std::filesystem::path& path);
Table parse_csv(std::istream& in);
void write_csv(const std::filesystem::path& path, const Table& table, const Provenance& prov);

// Exactly the columns a and y, discrete columns checked to hold class indices
// and dequantized with rng. Rejects constant or non-finite columns.
Dataset ingest(const Table& table, const ColumnSchema& a, const ColumnSchema& y, Rng& rng);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rhognf
