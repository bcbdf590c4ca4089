#ifndef CHROMOSCALE_GSS_IO_HPP
#define CHROMOSCALE_GSS_IO_HPP

// GSS-lite: a JSON manifest plus one text file per stored level. Each record line is
// `index parent_index x y z` with coordinates in nm at 6 decimals; `#` starts a comment.

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include <nlohmann/json.hpp>

#include "chromoscale/core_model.hpp"
#include "chromoscale/synthgen.hpp"

namespace chromoscale {

inline constexpr int kGssFormatVersion = 1;

struct DatasetManifest {
    int format_version = kGssFormatVersion;
    std::array<std::string, kStoredLevelCount> level_files{};
    std::array<std::size_t, kStoredLevelCount> counts{};
    std::string unit = "nm";
    std::string provenance;
    std::optional<std::string> atom_template;
    double linker_spacing = 2.0;
};

class GssParseError : public std::runtime_error {
public:
    GssParseError(std::string file, std::size_t line, const std::string& message)
        : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string{}) + ": " + message),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const noexcept { return file_; }
    /// 1-based line number, 0 when the problem is not tied to one line.
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class GssIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string default_level_file(DataLevel level) { return std::string(to_string(level)) + ".gss"; }

// ---------------------------------------------------------------------------
// Manifest

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json levels = nlohmann::json::object();
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        levels[std::string(to_string(static_cast<DataLevel>(l)))] = {{"file", m.level_files[l]},
                                                                     {"count", m.counts[l]}};
    }
    nlohmann::json j = {{"format", "gss-lite"},
                        {"format_version", m.format_version},
                        {"unit", m.unit},
                        {"provenance", m.provenance},
                        {"levels", levels},
                        {"linker_spacing", m.linker_spacing}};
    if (m.atom_template) j["atom_template"] = *m.atom_template;
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j, const std::string& source) {
    auto fail = [&](const std::string& msg) -> GssParseError { return {source, 0, msg}; };
    DatasetManifest m;
    try {
        if (j.value("format", std::string{}) != "gss-lite") throw fail("not a gss-lite manifest");
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kGssFormatVersion) {
            throw fail("unsupported format_version " + std::to_string(m.format_version));
        }
        m.unit = j.value("unit", std::string("nm"));
        if (m.unit != "nm") throw fail("unit must be nm");
        m.provenance = j.value("provenance", std::string{});
        m.linker_spacing = j.value("linker_spacing", 2.0);
        if (!(m.linker_spacing > 0.0)) throw fail("linker_spacing must be positive");
        const auto& levels = j.at("levels");
        for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
            const auto& entry = levels.at(std::string(to_string(static_cast<DataLevel>(l))));
            m.level_files[l] = entry.at("file").get<std::string>();
            m.counts[l] = entry.at("count").get<std::size_t>();
        }
        if (j.contains("atom_template")) m.atom_template = j.at("atom_template").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("manifest: ") + e.what());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Level files

inline void write_level_file(std::ostream& out, DataLevel level, const LevelTable& table) {
    out << "# gss-lite " << to_string(level) << " positions: index parent_index x y z (nm)\n";
    char buf[128];
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& p = table.positions[i];
        const int n = std::snprintf(buf, sizeof buf, "%zu %zu %.6f %.6f %.6f\n", i, table.parent_index[i], p.x,
                                    p.y, p.z);
        out.write(buf, n);
    }
}

namespace detail {

inline std::string_view next_token(std::string_view& rest) {
    const auto b = rest.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        rest = {};
        return {};
    }
    rest.remove_prefix(b);
    const auto e = rest.find_first_of(" \t\r");
    const std::string_view tok = rest.substr(0, e);
    rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
    return tok;
}

template <typename T>
bool parse_number(std::string_view tok, T& value) {
    if (tok.empty()) return false;
    const char* first = tok.data();
    if constexpr (std::is_floating_point_v<T>) {
        if (tok.front() == '+') ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), value);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

}  // namespace detail

/// Parses one level file. `parent_count` bounds parent indices (1 for chromosomes).
inline LevelTable parse_level_file(std::string_view text, const std::string& source, std::size_t expected_count,
                                   std::size_t parent_count) {
    LevelTable table;
    table.positions.reserve(expected_count);
    table.parent_index.reserve(expected_count);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::string_view rest = line;
        const auto tok_index = detail::next_token(rest);
        if (tok_index.empty()) continue;
        std::size_t index = 0;
        std::size_t parent = 0;
        Vec3 p;
        if (!detail::parse_number(tok_index, index) || !detail::parse_number(detail::next_token(rest), parent) ||
            !detail::parse_number(detail::next_token(rest), p.x) ||
            !detail::parse_number(detail::next_token(rest), p.y) ||
            !detail::parse_number(detail::next_token(rest), p.z)) {
            throw GssParseError(source, line_no, "malformed record, expected `index parent_index x y z`");
        }
        if (!detail::next_token(rest).empty()) throw GssParseError(source, line_no, "trailing fields in record");
        if (index != table.size()) {
            throw GssParseError(source, line_no,
                                "record index " + std::to_string(index) + " out of sequence (expected " +
                                    std::to_string(table.size()) + ")");
        }
        if (!is_finite(p)) throw GssParseError(source, line_no, "non-finite coordinate");
        if (parent >= parent_count) throw GssParseError(source, line_no, "parent index out of range");
        if (!table.parent_index.empty() && parent < table.parent_index.back()) {
            throw GssParseError(source, line_no, "parent index decreases (children must be contiguous)");
        }
        table.positions.push_back(p);
        table.parent_index.push_back(parent);
    }
    if (table.size() != expected_count) {
        throw GssParseError(source, 0,
                            "count mismatch: manifest declares " + std::to_string(expected_count) + ", file has " +
                                std::to_string(table.size()));
    }
    return table;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GssParseError(path.string(), 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

// ---------------------------------------------------------------------------
// Dataset load / write

inline GenomeDataset load_dataset(const std::filesystem::path& manifest_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw GssParseError(manifest_path.string(), 0, std::string("manifest is not valid JSON: ") + e.what());
    }
    const DatasetManifest m = manifest_from_json(j, manifest_path.string());
    const auto dir = manifest_path.parent_path();

    LevelTables tables;
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        const auto path = dir / m.level_files[l];
        const std::size_t parents = l == 0 ? 1 : m.counts[l - 1];
        tables[l] = parse_level_file(read_text_file(path), path.string(), m.counts[l], parents);
    }

    NucleotideTemplate nt = default_nucleotide_template();
    nt.linker_spacing = m.linker_spacing;
    AtomTemplate atoms;
    if (m.atom_template) {
        const auto path = dir / *m.atom_template;
        std::ifstream in(path);
        if (!in) throw GssParseError(path.string(), 0, "cannot open file");
        try {
            atoms = read_atom_template(in);
        } catch (const TemplateError& e) {
            throw GssParseError(path.string(), e.line(), e.what());
        }
    } else {
        atoms = default_atom_template(nt);
    }

    try {
        return GenomeDataset::build(std::move(tables), TemplateSet(std::move(nt), std::move(atoms)));
    } catch (const DatasetError& e) {
        const auto& v = e.report().violations.front();
        throw GssParseError(manifest_path.string(), 0, v.code + " at " + v.location + ": " + v.message);
    }
}

/// Canonical writer: fixed field order and precision, so write(load(write(x))) is byte-stable.
inline DatasetManifest write_dataset(const GenomeDataset& dataset, const std::filesystem::path& dir,
                                     const std::string& provenance = {}) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw GssIoError("cannot create " + dir.string() + ": " + ec.message());

    DatasetManifest m;
    m.provenance = provenance;
    m.linker_spacing = dataset.templates().nucleotides().linker_spacing;
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        const auto level = static_cast<DataLevel>(l);
        m.level_files[l] = default_level_file(level);
        m.counts[l] = dataset.table(level).size();
        std::ofstream out(dir / m.level_files[l], std::ios::binary);
        if (!out) throw GssIoError("cannot write " + (dir / m.level_files[l]).string());
        write_level_file(out, level, dataset.table(level));
        if (!out) throw GssIoError("write failed for " + (dir / m.level_files[l]).string());
    }
    if (!dataset.templates().atoms().builtin) {
        m.atom_template = "atoms.tpl";
        std::ofstream out(dir / *m.atom_template, std::ios::binary);
        if (!out) throw GssIoError("cannot write atom template");
        write_atom_template(out, dataset.templates().atoms());
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw GssIoError("cannot write manifest");
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) throw GssIoError("manifest write failed");
    return m;
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_GSS_IO_HPP
