#ifndef CHROMOSCALE_CORE_MODEL_HPP
#define CHROMOSCALE_CORE_MODEL_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chromoscale/geometry.hpp"

namespace chromoscale {

/// Data levels, coarse to fine. Nucleotide and Atom are virtual: they are expanded from
/// nucleosome frames and templates on demand and never stored for the whole genome.
enum class DataLevel : std::uint8_t { Chromosome = 0, Locus, Fiber, Nucleosome, Nucleotide, Atom };

inline constexpr std::size_t kStoredLevelCount = 4;
inline constexpr std::size_t kNucleotidesPerNucleosome = 292;
inline constexpr std::size_t kNucleotidesPerStrand = 146;

constexpr bool is_stored(DataLevel level) noexcept {
    return static_cast<std::size_t>(level) < kStoredLevelCount;
}

constexpr std::size_t level_index(DataLevel level) noexcept { return static_cast<std::size_t>(level); }

constexpr std::string_view to_string(DataLevel level) noexcept {
    switch (level) {
        case DataLevel::Chromosome: return "chromosome";
        case DataLevel::Locus: return "locus";
        case DataLevel::Fiber: return "fiber";
        case DataLevel::Nucleosome: return "nucleosome";
        case DataLevel::Nucleotide: return "nucleotide";
        case DataLevel::Atom: return "atom";
    }
    return "unknown";
}

inline std::optional<DataLevel> parse_level(std::string_view name) noexcept {
    for (std::uint8_t i = 0; i <= static_cast<std::uint8_t>(DataLevel::Atom); ++i) {
        const auto level = static_cast<DataLevel>(i);
        if (to_string(level) == name) return level;
    }
    return std::nullopt;
}

struct ElementId {
    DataLevel level = DataLevel::Chromosome;
    std::size_t index = 0;

    bool operator==(const ElementId&) const noexcept = default;
};

/// Indices of the hierarchy ancestors. Levels at or below the element's own level are empty.
struct AncestorPath {
    std::optional<std::size_t> chromosome;
    std::optional<std::size_t> locus;
    std::optional<std::size_t> fiber;
    std::optional<std::size_t> nucleosome;

    bool operator==(const AncestorPath&) const noexcept = default;
};

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    constexpr std::size_t size() const noexcept { return end - begin; }
    constexpr bool empty() const noexcept { return end <= begin; }
    constexpr bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    constexpr bool operator==(const IndexRange&) const noexcept = default;
};

/// Positions of one stored level plus the parent of every point in the next-coarser level.
/// Chromosomes all have parent 0 (the nucleus).
struct LevelTable {
    std::vector<Vec3> positions;
    std::vector<std::size_t> parent_index;

    std::size_t size() const noexcept { return positions.size(); }
    bool operator==(const LevelTable&) const = default;
};

using LevelTables = std::array<LevelTable, kStoredLevelCount>;

enum class Element : std::uint8_t { H, C, N, O, P, Other };

constexpr std::string_view to_string(Element e) noexcept {
    switch (e) {
        case Element::H: return "H";
        case Element::C: return "C";
        case Element::N: return "N";
        case Element::O: return "O";
        case Element::P: return "P";
        case Element::Other: return "X";
    }
    return "X";
}

inline Element parse_element(std::string_view label) noexcept {
    if (label == "H") return Element::H;
    if (label == "C") return Element::C;
    if (label == "N") return Element::N;
    if (label == "O") return Element::O;
    if (label == "P") return Element::P;
    return Element::Other;
}

/// Canonical nucleosome: 292 nucleotide positions in the nucleosome-local frame.
/// Slots [0,146) are strand A along base pairs 0..145; slots [146,292) are strand B running
/// back from base pair 145 to 0.
struct NucleotideTemplate {
    std::vector<Vec3> local_positions;
    double linker_spacing = 2.0;

    /// Base pair index of a slot.
    static constexpr std::size_t base_pair(std::size_t slot) noexcept {
        return slot < kNucleotidesPerStrand ? slot : kNucleotidesPerNucleosome - 1 - slot;
    }
    /// Slot on the opposite strand paired with `slot`.
    static constexpr std::size_t partner(std::size_t slot) noexcept {
        return kNucleotidesPerNucleosome - 1 - slot;
    }

    Vec3 pair_midpoint(std::size_t bp) const {
        return (local_positions[bp] + local_positions[partner(bp)]) * 0.5;
    }
    Vec3 entry_point() const { return pair_midpoint(0); }
    Vec3 exit_point() const { return pair_midpoint(kNucleotidesPerStrand - 1); }

    bool operator==(const NucleotideTemplate&) const = default;
};

struct AtomSite {
    Vec3 offset;  // nm, relative to the owning nucleotide, nucleosome-local axes
    Element element = Element::C;

    bool operator==(const AtomSite&) const = default;
};

/// Atom clusters per nucleotide slot (292 lists).
struct AtomTemplate {
    std::vector<std::vector<AtomSite>> per_nucleotide;
    bool builtin = true;

    bool operator==(const AtomTemplate&) const = default;
};

/// Templates with the flattened per-nucleosome atom layout precomputed for instancing.
class TemplateSet {
public:
    TemplateSet() = default;
    TemplateSet(NucleotideTemplate nucleotides, AtomTemplate atoms)
        : nucleotides_(std::move(nucleotides)), atoms_(std::move(atoms)) {
        if (nucleotides_.local_positions.size() != kNucleotidesPerNucleosome) {
            throw std::invalid_argument("nucleotide template must hold exactly 292 positions");
        }
        if (atoms_.per_nucleotide.size() != kNucleotidesPerNucleosome) {
            throw std::invalid_argument("atom template must hold one cluster per nucleotide slot");
        }
        atom_begin_.reserve(kNucleotidesPerNucleosome + 1);
        atom_begin_.push_back(0);
        for (std::size_t slot = 0; slot < kNucleotidesPerNucleosome; ++slot) {
            const Vec3 base = nucleotides_.local_positions[slot];
            for (const auto& site : atoms_.per_nucleotide[slot]) {
                atom_local_.push_back(base + site.offset);
                atom_element_.push_back(site.element);
            }
            atom_begin_.push_back(static_cast<std::uint32_t>(atom_local_.size()));
        }
    }

    const NucleotideTemplate& nucleotides() const noexcept { return nucleotides_; }
    const AtomTemplate& atoms() const noexcept { return atoms_; }

    std::size_t atoms_per_nucleosome() const noexcept { return atom_local_.size(); }
    IndexRange atoms_of(std::size_t slot) const noexcept { return {atom_begin_[slot], atom_begin_[slot + 1]}; }
    /// Atom position in the nucleosome-local frame (nucleotide position + offset).
    const Vec3& atom_local(std::size_t k) const noexcept { return atom_local_[k]; }
    Element atom_element(std::size_t k) const noexcept { return atom_element_[k]; }
    /// Nucleotide slot owning flattened atom index k.
    std::size_t slot_of_atom(std::size_t k) const noexcept {
        const auto it = std::upper_bound(atom_begin_.begin(), atom_begin_.end(), k);
        return static_cast<std::size_t>(it - atom_begin_.begin()) - 1;
    }

    bool operator==(const TemplateSet& o) const { return nucleotides_ == o.nucleotides_ && atoms_ == o.atoms_; }

private:
    NucleotideTemplate nucleotides_;
    AtomTemplate atoms_;
    std::vector<Vec3> atom_local_;
    std::vector<Element> atom_element_;
    std::vector<std::uint32_t> atom_begin_;
};

struct Violation {
    std::string code;
    std::string message;
    std::string location;
};

struct ChildCountSummary {
    std::size_t min = 0;
    std::size_t median = 0;
    std::size_t max = 0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::array<std::size_t, kStoredLevelCount> counts{};
    /// Children per parent for chromosome, locus and fiber parents.
    std::array<ChildCountSummary, kStoredLevelCount - 1> children{};

    bool ok() const noexcept { return violations.empty(); }
    std::size_t count(std::string_view code) const noexcept {
        return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                      [&](const Violation& v) { return v.code == code; }));
    }
};

namespace detail {

inline std::size_t lower_median(std::vector<std::size_t> values) {
    if (values.empty()) return 0;
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

inline std::string where(DataLevel level, std::size_t index) {
    return std::string(to_string(level)) + "[" + std::to_string(index) + "]";
}

}  // namespace detail

/// Structural checks over raw level tables. Hierarchy ratios are reported, never enforced.
inline ValidationReport validate(const LevelTables& tables) {
    ValidationReport report;
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) report.counts[l] = tables[l].size();

    if (tables[0].size() == 0) {
        report.violations.push_back({"chromosome-count", "chromosome count >= 1 required", "chromosome"});
    }

    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        const auto level = static_cast<DataLevel>(l);
        const auto& table = tables[l];
        if (table.parent_index.size() != table.positions.size()) {
            report.violations.push_back({"size-mismatch", "parent_index and positions differ in length",
                                         std::string(to_string(level))});
            continue;
        }
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (!is_finite(table.positions[i])) {
                report.violations.push_back({"non-finite", "position is not finite", detail::where(level, i)});
            }
        }
        const std::size_t parent_count = l == 0 ? 1 : tables[l - 1].size();
        for (std::size_t i = 0; i < table.size(); ++i) {
            const std::size_t p = table.parent_index[i];
            if (p >= parent_count) {
                report.violations.push_back({"parent-range",
                                             "parent index " + std::to_string(p) + " out of range",
                                             detail::where(level, i)});
            }
            if (i > 0 && p < table.parent_index[i - 1]) {
                report.violations.push_back({"parent-order", "parent index decreases along the sequence",
                                             detail::where(level, i)});
            }
        }
        if (l == 0) continue;

        const auto parent_level = static_cast<DataLevel>(l - 1);
        std::vector<std::size_t> per_parent(parent_count, 0);
        for (std::size_t p : table.parent_index) {
            if (p < parent_count) ++per_parent[p];
        }
        for (std::size_t p = 0; p < parent_count; ++p) {
            if (per_parent[p] == 0) {
                report.violations.push_back({"childless-parent", "parent has no children",
                                             detail::where(parent_level, p)});
            }
        }
        if (!per_parent.empty()) {
            auto [mn, mx] = std::minmax_element(per_parent.begin(), per_parent.end());
            report.children[l - 1] = {*mn, detail::lower_median(per_parent), *mx};
        }
    }
    return report;
}

class DatasetError : public std::runtime_error {
public:
    explicit DatasetError(ValidationReport report)
        : std::runtime_error(describe(report)), report_(std::move(report)) {}

    const ValidationReport& report() const noexcept { return report_; }

private:
    static std::string describe(const ValidationReport& r) {
        std::string msg = "invalid dataset: " + std::to_string(r.violations.size()) + " violation(s)";
        if (!r.violations.empty()) {
            msg += "; first: " + r.violations.front().code + " at " + r.violations.front().location + ": " +
                   r.violations.front().message;
        }
        return msg;
    }
    ValidationReport report_;
};

class InvalidIdError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class NoChildrenError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Nominal spacing used when a level has fewer than two distinct points.
inline constexpr std::array<double, kStoredLevelCount> kNominalSpacing{2000.0, 400.0, 80.0, 11.0};

/// The loaded world: immutable after construction and safe to share across threads.
class GenomeDataset {
public:
    /// Validates, indexes, and derives frames and spacing statistics. Throws DatasetError.
    static GenomeDataset build(LevelTables tables, TemplateSet templates) {
        if (templates.nucleotides().local_positions.size() != kNucleotidesPerNucleosome) {
            throw std::invalid_argument("dataset requires a 292-entry nucleotide template");
        }
        ValidationReport report = validate(tables);
        if (!report.ok()) throw DatasetError(std::move(report));
        GenomeDataset ds;
        ds.tables_ = std::move(tables);
        ds.templates_ = std::move(templates);
        ds.index_children();
        ds.compute_stats();
        ds.compute_frames();
        return ds;
    }

    const LevelTable& table(DataLevel level) const { return tables_.at(level_index(level)); }
    const LevelTables& tables() const noexcept { return tables_; }
    const TemplateSet& templates() const noexcept { return templates_; }
    const std::vector<Frame>& nucleosome_frames() const noexcept { return frames_; }
    /// Median consecutive-point spacing per stored level (nm).
    const std::array<double, kStoredLevelCount>& stats() const noexcept { return stats_; }
    double spacing(DataLevel level) const { return stats_.at(level_index(level)); }

    std::size_t count(DataLevel level) const noexcept {
        const std::size_t nucleosomes = tables_[3].size();
        switch (level) {
            case DataLevel::Nucleotide: return nucleosomes * kNucleotidesPerNucleosome;
            case DataLevel::Atom: return nucleosomes * templates_.atoms_per_nucleosome();
            default: return tables_[level_index(level)].size();
        }
    }

    const Vec3& position(DataLevel level, std::size_t index) const {
        return tables_.at(level_index(level)).positions.at(index);
    }

    /// Children of a stored, non-finest element. Contiguous by construction.
    IndexRange children(DataLevel parent_level, std::size_t parent) const noexcept {
        const auto& offsets = child_offsets_[level_index(parent_level)];
        return {offsets[parent], offsets[parent + 1]};
    }

    /// Parent of a stored element (level > Chromosome) by binary search over child range starts.
    std::size_t parent_of(DataLevel level, std::size_t index) const noexcept {
        const auto& offsets = child_offsets_[level_index(level) - 1];
        const auto it = std::upper_bound(offsets.begin(), offsets.end(), index);
        return static_cast<std::size_t>(it - offsets.begin()) - 1;
    }

    /// Range of `to` elements descended from element `index` of level `from` (from <= to, stored).
    IndexRange descendants(DataLevel from, std::size_t index, DataLevel to) const noexcept {
        IndexRange r{index, index + 1};
        for (std::size_t l = level_index(from); l < level_index(to); ++l) {
            const auto& offsets = child_offsets_[l];
            r = {offsets[r.begin], offsets[r.end]};
        }
        return r;
    }

    bool operator==(const GenomeDataset& o) const {
        return tables_ == o.tables_ && templates_ == o.templates_;
    }

private:
    GenomeDataset() = default;

    void index_children() {
        for (std::size_t l = 0; l + 1 < kStoredLevelCount; ++l) {
            const std::size_t parents = tables_[l].size();
            auto& offsets = child_offsets_[l];
            offsets.assign(parents + 1, 0);
            for (std::size_t p : tables_[l + 1].parent_index) ++offsets[p + 1];
            for (std::size_t p = 0; p < parents; ++p) offsets[p + 1] += offsets[p];
        }
    }

    void compute_stats() {
        for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
            const auto& pos = tables_[l].positions;
            std::vector<double> gaps;
            gaps.reserve(pos.size());
            for (std::size_t i = 1; i < pos.size(); ++i) {
                const double d = distance(pos[i - 1], pos[i]);
                if (d > 0.0) gaps.push_back(d);
            }
            if (gaps.empty()) {
                stats_[l] = kNominalSpacing[l];
                continue;
            }
            const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>((gaps.size() - 1) / 2);
            std::nth_element(gaps.begin(), mid, gaps.end());
            stats_[l] = *mid;
        }
    }

    // Frames run along each chromosome's nucleosome sequence; the last nucleosome of a
    // chromosome and coincident successors reuse the previous orientation.
    void compute_frames() {
        const auto& pos = tables_[3].positions;
        frames_.resize(pos.size());
        for (std::size_t c = 0; c < tables_[0].size(); ++c) {
            const IndexRange r = descendants(DataLevel::Chromosome, c, DataLevel::Nucleosome);
            for (std::size_t i = r.begin; i < r.end; ++i) {
                if (i + 1 < r.end && pos[i] != pos[i + 1]) {
                    frames_[i] = nucleosome_frame(pos[i], pos[i + 1]);
                } else if (i > r.begin) {
                    frames_[i] = Frame{pos[i], frames_[i - 1].axes};
                } else {
                    frames_[i] = frame_from_direction(pos[i], Vec3{1, 0, 0});
                }
            }
        }
    }

    LevelTables tables_;
    TemplateSet templates_;
    std::array<std::vector<std::size_t>, kStoredLevelCount - 1> child_offsets_;
    std::array<double, kStoredLevelCount> stats_{};
    std::vector<Frame> frames_;
};

inline ValidationReport validate(const GenomeDataset& dataset) { return validate(dataset.tables()); }

inline void check_id(const GenomeDataset& dataset, const ElementId& id) {
    if (id.index >= dataset.count(id.level)) {
        throw InvalidIdError("invalid id: " + detail::where(id.level, id.index) + " (count " +
                             std::to_string(dataset.count(id.level)) + ")");
    }
}

/// Ancestor chain of an element. Virtual ids index nucleotides as nucleosome*292 + slot and
/// atoms as nucleosome*atoms_per_nucleosome + k.
inline AncestorPath ancestors(const GenomeDataset& dataset, const ElementId& id) {
    check_id(dataset, id);
    AncestorPath path;
    std::size_t index = id.index;
    auto level = id.level;
    if (level == DataLevel::Atom) {
        index /= dataset.templates().atoms_per_nucleosome();
        path.nucleosome = index;
        level = DataLevel::Nucleosome;
    } else if (level == DataLevel::Nucleotide) {
        index /= kNucleotidesPerNucleosome;
        path.nucleosome = index;
        level = DataLevel::Nucleosome;
    }
    while (level != DataLevel::Chromosome) {
        index = dataset.parent_of(level, index);
        level = static_cast<DataLevel>(level_index(level) - 1);
        switch (level) {
            case DataLevel::Chromosome: path.chromosome = index; break;
            case DataLevel::Locus: path.locus = index; break;
            case DataLevel::Fiber: path.fiber = index; break;
            default: break;
        }
    }
    return path;
}

/// Children of `id` at the next-finer stored level.
inline IndexRange child_range(const GenomeDataset& dataset, const ElementId& id) {
    if (!is_stored(id.level) || id.level == DataLevel::Nucleosome) {
        throw NoChildrenError("no stored children below " + std::string(to_string(id.level)));
    }
    check_id(dataset, id);
    return dataset.children(id.level, id.index);
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_CORE_MODEL_HPP
