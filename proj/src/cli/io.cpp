#include "rhognf/io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rhognf/errors.hpp"

namespace rhognf {

ColumnSchema ColumnSchema::parse(const std::string& text) {
    if (text == "continuous") return {};
    const std::string prefix = "discrete:";
    if (text.rfind(prefix, 0) == 0) {
        int k = 0;
        const char* first = text.data() + prefix.size();
        const char* last = text.data() + text.size();
        const auto r = std::from_chars(first, last, k);
        if (r.ec == std::errc{} && r.ptr == last) {
            DequantSpec spec{k, 0.1};
            spec.validate();
            return {spec};
        }
    }
    throw InvalidParameter("schema must be 'continuous' or 'discrete:K', got '" + text + "'");
}

std::string ColumnSchema::str() const {
    return discrete ? "discrete:" + std::to_string(discrete->n_classes) : "continuous";
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string Provenance::comment_line() const {
    return "# rhognf " + command + " config_hash=" + hex64(config_hash) + " seed=" + std::to_string(seed);
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError("missing column '" + name + "'", 1);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Table parse_csv(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            for (const auto& h : t.header) {
                if (h.empty()) throw DataError("empty column name in header", line_no);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw DataError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                std::to_string(cells.size()),
                            line_no);
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            const auto r = std::from_chars(c.data(), c.data() + c.size(), row[i]);
            if (c.empty() || r.ec != std::errc{} || r.ptr != c.data() + c.size()) {
                throw DataError("field '" + c + "' is not a number", line_no);
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError("missing header row");
    return t;
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_csv(in);
}

void write_csv(const std::filesystem::path& path, const Table& table, const Provenance& prov) {
    std::ostringstream out;
    out << prov.comment_line() << '\n';
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    char buf[64];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto r = std::to_chars(buf, buf + sizeof(buf), row[i]);
            if (i) out << ',';
            out.write(buf, r.ptr - buf);
        }
        out << '\n';
    }
    write_text(path, out.str());
}

Dataset ingest(const Table& table, const ColumnSchema& a, const ColumnSchema& y, Rng& rng) {
    if (table.header.size() != 2 || table.header[0] != "a" || table.header[1] != "y") {
        throw DataError("dataset header must be exactly 'a,y'", 1);
    }
    if (table.rows.empty()) throw DataError("dataset has no rows");
    Dataset out(table.rows.size());
    const ColumnSchema* schema[2] = {&a, &y};
    for (int c = 0; c < 2; ++c) {
        bool varies = false;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const double v = table.rows[i][static_cast<std::size_t>(c)];
            if (!std::isfinite(v)) throw DataError("non-finite value in column " + table.header[c]);
            if (v != table.rows[0][static_cast<std::size_t>(c)]) varies = true;
            if (const auto& d = schema[c]->discrete) {
                if (v != std::floor(v) || v < 0 || v >= d->n_classes) {
                    throw DataError("column " + table.header[c] + " holds '" + std::to_string(v) +
                                    "', not a class in 0.." + std::to_string(d->n_classes - 1));
                }
            }
        }
        if (!varies) throw DataError("column " + table.header[c] + " is constant");
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        out[i].a = a.discrete ? encode(*a.discrete, static_cast<int>(r[0]), rng) : r[0];
        out[i].y = y.discrete ? encode(*y.discrete, static_cast<int>(r[1]), rng) : r[1];
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace rhognf
