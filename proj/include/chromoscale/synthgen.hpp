#ifndef CHROMOSCALE_SYNTHGEN_HPP
#define CHROMOSCALE_SYNTHGEN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromoscale/core_model.hpp"
#include "chromoscale/geometry.hpp"

namespace chromoscale {

// ---------------------------------------------------------------------------
// Deterministic random streams

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// SplitMix64 stream. Uniform doubles use the top 53 bits so values are identical on every
/// platform (std distributions are implementation-defined).
class SplitMix {
public:
    explicit constexpr SplitMix(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Independent substream for (seed, level, parent).
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t level, std::uint64_t parent) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ (level + 1)) ^ (parent * 0x9E3779B97F4A7C15ULL + 7));
}

// ---------------------------------------------------------------------------
// 3D Hilbert curve

/// Cell coordinates of Hilbert index `d` on a 2^order cube (Skilling's transpose method).
inline std::array<std::uint32_t, 3> hilbert_d2xyz(std::uint64_t d, unsigned order) noexcept {
    std::array<std::uint32_t, 3> x{0, 0, 0};
    if (order == 0) return x;
    // Distribute index bits into the transposed representation, most significant first.
    for (unsigned j = 0; j < order; ++j) {
        for (unsigned i = 0; i < 3; ++i) {
            const unsigned bit = 3 * order - 1 - (3 * j + i);
            x[i] |= static_cast<std::uint32_t>((d >> bit) & 1U) << (order - 1 - j);
        }
    }
    const std::uint32_t n = 2U << (order - 1);
    std::uint32_t t = x[2] >> 1;
    for (int i = 2; i > 0; --i) x[i] ^= x[i - 1];
    x[0] ^= t;
    for (std::uint32_t q = 2; q != n; q <<= 1) {
        const std::uint32_t p = q - 1;
        for (int i = 2; i >= 0; --i) {
            if (x[i] & q) {
                x[0] ^= p;
            } else {
                t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Generator

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GenParams {
    std::size_t chromosomes = 2;
    std::size_t loci_per_chromosome = 3;
    std::size_t fibers_per_locus = 4;
    std::size_t nucleosomes_per_fiber = 5;
    double nucleus_radius = 3000.0;  // nm
    std::uint64_t seed = 42;
    /// Upper bound on total stored points across all levels.
    std::size_t max_points = 30'000'000;

    std::array<std::size_t, kStoredLevelCount> children_per_parent() const noexcept {
        return {chromosomes, loci_per_chromosome, fibers_per_locus, nucleosomes_per_fiber};
    }
};

inline constexpr double kJitterFraction = 0.2;

/// Hilbert order needed to hold n cells.
inline unsigned hilbert_order_for(std::size_t n) noexcept {
    unsigned order = 0;
    std::uint64_t cells = 1;
    while (cells < n) {
        cells *= 8;
        ++order;
    }
    return order;
}

/// Lattice pitch for n children in a territory of the given radius.
inline double lattice_pitch(double radius, std::size_t n) noexcept {
    const double half_side = radius / std::numbers::sqrt3;
    return 2.0 * half_side / static_cast<double>(1ULL << hilbert_order_for(n));
}

/// Territory radii: index 0 is the nucleus, index l+1 the territory of a level-l element.
inline std::array<double, kStoredLevelCount + 1> territory_radii(const GenParams& params) noexcept {
    std::array<double, kStoredLevelCount + 1> r{};
    r[0] = params.nucleus_radius;
    const auto n = params.children_per_parent();
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) r[l + 1] = 0.5 * lattice_pitch(r[l], n[l]);
    return r;
}

/// Places n points along a Hilbert traversal of the cubic lattice inscribed in the territory
/// sphere, each jittered within its cell.
inline void place_children(const Vec3& center, double radius, std::size_t n, SplitMix& rng,
                           std::vector<Vec3>& out) {
    const unsigned order = hilbert_order_for(n);
    const std::uint64_t cells = 1ULL << (3 * order);
    const double half_side = radius / std::numbers::sqrt3;
    const double pitch = lattice_pitch(radius, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t cell = static_cast<std::uint64_t>(i) * cells / n;
        const auto c = hilbert_d2xyz(cell, order);
        Vec3 p = center + Vec3{-half_side + (c[0] + 0.5) * pitch, -half_side + (c[1] + 0.5) * pitch,
                               -half_side + (c[2] + 0.5) * pitch};
        p.x += (rng.uniform() - 0.5) * kJitterFraction * pitch;
        p.y += (rng.uniform() - 0.5) * kJitterFraction * pitch;
        p.z += (rng.uniform() - 0.5) * kJitterFraction * pitch;
        out.push_back(p);
    }
}

/// Built-in nucleosome: left-handed superhelix, 1.75 turns of radius 4.2 nm, wrapping
/// 146 base pairs around the local x axis; the two strands sit 1 nm either side of the
/// double-helix axis with 10.5 bp per twist.
struct NucleosomeGeometry {
    double turns = 1.75;
    double superhelix_radius = 4.2;
    double superhelix_pitch = 2.4;  // nm per turn along the axis
    double strand_radius = 1.0;
    double bp_per_twist = 10.5;
};

inline Vec3 superhelix_point(const NucleosomeGeometry& g, double bp) noexcept {
    const double f = bp / static_cast<double>(kNucleotidesPerStrand - 1);
    const double theta = -2.0 * std::numbers::pi * g.turns * f;
    const double axial = g.superhelix_pitch * g.turns * (f - 0.5);
    return {axial, g.superhelix_radius * std::cos(theta), g.superhelix_radius * std::sin(theta)};
}

inline Vec3 superhelix_tangent(const NucleosomeGeometry& g, double bp) noexcept {
    const double h = 1e-3;
    return normalized(superhelix_point(g, bp + h) - superhelix_point(g, bp - h));
}

inline NucleotideTemplate default_nucleotide_template(const NucleosomeGeometry& g = {}) {
    NucleotideTemplate t;
    t.local_positions.resize(kNucleotidesPerNucleosome);
    for (std::size_t bp = 0; bp < kNucleotidesPerStrand; ++bp) {
        const double b = static_cast<double>(bp);
        const Vec3 c = superhelix_point(g, b);
        const Vec3 tangent = superhelix_tangent(g, b);
        Vec3 inward = Vec3{0, -c.y, -c.z};
        inward = normalized(inward - tangent * dot(inward, tangent));
        const Vec3 binormal = cross(tangent, inward);
        const double phi = 2.0 * std::numbers::pi * b / g.bp_per_twist;
        const Vec3 offset = (inward * std::cos(phi) + binormal * std::sin(phi)) * g.strand_radius;
        t.local_positions[bp] = c + offset;
        t.local_positions[NucleotideTemplate::partner(bp)] = c - offset;
    }
    return t;
}

/// 35 pseudo-atoms per nucleotide: phosphate (P, 4 O), sugar ring (4 C, O), two base rings
/// (4 C + 2 N, 2 C + 2 N + O) and 14 H, laid out from the backbone toward the helix axis.
inline AtomTemplate default_atom_template(const NucleotideTemplate& nt, const NucleosomeGeometry& g = {}) {
    AtomTemplate tpl;
    tpl.builtin = true;
    tpl.per_nucleotide.resize(kNucleotidesPerNucleosome);
    for (std::size_t slot = 0; slot < kNucleotidesPerNucleosome; ++slot) {
        const std::size_t bp = NucleotideTemplate::base_pair(slot);
        const Vec3 q = nt.local_positions[slot];
        const Vec3 in = normalized(nt.pair_midpoint(bp) - q);
        Vec3 along = superhelix_tangent(g, static_cast<double>(bp));
        along = normalized(along - in * dot(along, in));
        const Vec3 side = cross(in, along);
        auto at = [&](double a, double b, double c) { return in * a + along * b + side * c; };
        auto& atoms = tpl.per_nucleotide[slot];
        atoms.reserve(35);

        const Vec3 phosphate = at(-0.55, 0.0, 0.0);
        atoms.push_back({phosphate, Element::P});
        for (const auto& d : {at(0, 0.15, 0), at(0, -0.15, 0), at(0, 0, 0.15), at(-0.15, 0, 0)}) {
            atoms.push_back({phosphate + d, Element::O});
        }
        auto ring = [&](const Vec3& center, double radius, std::initializer_list<Element> elements) {
            const double n = static_cast<double>(elements.size());
            double k = 0.0;
            for (Element e : elements) {
                const double a = 2.0 * std::numbers::pi * k / n;
                atoms.push_back({center + along * (radius * std::cos(a)) + side * (radius * std::sin(a)), e});
                k += 1.0;
            }
        };
        ring(at(-0.15, 0, 0), 0.12, {Element::C, Element::C, Element::O, Element::C, Element::C});
        ring(at(0.30, 0, 0), 0.14, {Element::C, Element::N, Element::C, Element::N, Element::C, Element::C});
        ring(at(0.58, 0, 0), 0.12, {Element::C, Element::N, Element::C, Element::N, Element::O});
        // Hydrogens on a shell around the cluster.
        for (int k = 0; k < 14; ++k) {
            const double y = 1.0 - 2.0 * (k + 0.5) / 14.0;
            const double r = std::sqrt(1.0 - y * y);
            const double a = k * 2.399963229728653;  // golden angle, rad
            atoms.push_back({at(0.1 + 0.45 * y, 0.32 * r * std::cos(a), 0.32 * r * std::sin(a)), Element::H});
        }
    }
    return tpl;
}

inline TemplateSet default_templates() {
    NucleotideTemplate nt = default_nucleotide_template();
    AtomTemplate atoms = default_atom_template(nt);
    return TemplateSet(std::move(nt), std::move(atoms));
}

/// Synthesizes a multi-level dataset by fractal space-filling packing. Pure function of params.
inline GenomeDataset generate(const GenParams& params, TemplateSet templates = default_templates()) {
    const auto n = params.children_per_parent();
    for (std::size_t c : n) {
        if (c == 0) throw std::invalid_argument("all hierarchy counts must be >= 1");
    }
    if (!(params.nucleus_radius > 0.0) || !std::isfinite(params.nucleus_radius)) {
        throw std::invalid_argument("nucleus radius must be positive");
    }
    std::array<std::size_t, kStoredLevelCount> counts{};
    double total = 0.0;
    double running = 1.0;
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        running *= static_cast<double>(n[l]);
        total += running;
    }
    if (total > static_cast<double>(params.max_points)) {
        throw CapacityError("requested " + std::to_string(static_cast<std::uint64_t>(total)) +
                            " points exceeds budget of " + std::to_string(params.max_points));
    }
    std::size_t running_count = 1;
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        running_count *= n[l];
        counts[l] = running_count;
    }

    const auto radii = territory_radii(params);
    LevelTables tables;
    for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
        auto& table = tables[l];
        table.positions.reserve(counts[l]);
        table.parent_index.reserve(counts[l]);
        const std::size_t parents = l == 0 ? 1 : counts[l - 1];
        for (std::size_t p = 0; p < parents; ++p) {
            const Vec3 center = l == 0 ? Vec3{} : tables[l - 1].positions[p];
            SplitMix rng(substream_seed(params.seed, l, p));
            place_children(center, radii[l], n[l], rng, table.positions);
            table.parent_index.insert(table.parent_index.end(), n[l], p);
        }
    }
    return GenomeDataset::build(std::move(tables), std::move(templates));
}

// ---------------------------------------------------------------------------
// Instancing helpers

/// Rigid transform of template-local points into world space.
inline std::vector<Vec3> instantiate_template(std::span<const Vec3> local, const Frame& frame) {
    std::vector<Vec3> out;
    out.reserve(local.size());
    for (const auto& p : local) out.push_back(frame.apply(p));
    return out;
}

inline std::vector<Vec3> instantiate_template(const NucleotideTemplate& tpl, const Frame& frame) {
    return instantiate_template(std::span<const Vec3>(tpl.local_positions), frame);
}

/// Interior points of the cubic Hermite curve from a to b (unit tangents scaled by the chord),
/// spaced no more than `spacing` apart. Endpoints are excluded.
inline std::vector<Vec3> hermite_linker(const Vec3& a, const Vec3& tangent_a, const Vec3& b,
                                        const Vec3& tangent_b, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("linker spacing must be positive");
    std::vector<Vec3> out;
    const double chord = distance(a, b);
    if (chord == 0.0) return out;
    const Vec3 m0 = tangent_a * chord;
    const Vec3 m1 = tangent_b * chord;
    auto eval = [&](double t) {
        const double t2 = t * t;
        const double t3 = t2 * t;
        return a * (2 * t3 - 3 * t2 + 1) + m0 * (t3 - 2 * t2 + t) + b * (-2 * t3 + 3 * t2) + m1 * (t3 - t2);
    };

    constexpr int kSegments = 1024;
    std::array<double, kSegments + 1> arc{};
    Vec3 prev = a;
    for (int i = 1; i <= kSegments; ++i) {
        const Vec3 cur = eval(static_cast<double>(i) / kSegments);
        arc[i] = arc[i - 1] + distance(prev, cur);
        prev = cur;
    }
    const double length = arc[kSegments];
    auto t_at = [&](double s) {
        const auto it = std::lower_bound(arc.begin(), arc.end(), s);
        const auto hi = std::clamp<std::ptrdiff_t>(it - arc.begin(), 1, kSegments);
        const double span = arc[hi] - arc[hi - 1];
        const double frac = span > 0 ? (s - arc[hi - 1]) / span : 0.0;
        return (static_cast<double>(hi - 1) + frac) / kSegments;
    };

    auto intervals = static_cast<std::size_t>(std::ceil(length / spacing - 1e-12));
    intervals = std::max<std::size_t>(intervals, 1);
    for (;;) {
        out.clear();
        for (std::size_t k = 1; k < intervals; ++k) {
            out.push_back(eval(t_at(length * static_cast<double>(k) / static_cast<double>(intervals))));
        }
        bool ok = true;
        Vec3 last = a;
        for (const auto& p : out) {
            ok = ok && distance(last, p) <= spacing;
            last = p;
        }
        ok = ok && distance(last, b) <= spacing;
        if (ok) return out;
        ++intervals;
    }
}

/// Linker strand from the exit of nucleosome `from` to the entry of nucleosome `to`.
inline std::vector<Vec3> linker_points(const Frame& from, const Frame& to, const NucleotideTemplate& tpl) {
    return hermite_linker(from.apply(tpl.exit_point()), from.axes[0], to.apply(tpl.entry_point()), to.axes[0],
                          tpl.linker_spacing);
}

// ---------------------------------------------------------------------------
// Template files

class TemplateError : public std::runtime_error {
public:
    TemplateError(const std::string& what, std::size_t line)
        : std::runtime_error(what + (line ? " (line " + std::to_string(line) + ")" : std::string{})),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline constexpr std::size_t kMinAtomsPerNucleotide = 20;
inline constexpr std::size_t kMaxAtomsPerNucleotide = 70;
inline constexpr double kMaxAtomOffset = 1.2;

namespace detail {

inline void check_cluster(const std::vector<AtomSite>& atoms, std::size_t slot) {
    if (atoms.size() < kMinAtomsPerNucleotide || atoms.size() > kMaxAtomsPerNucleotide) {
        throw TemplateError("nucleotide " + std::to_string(slot) + " has " + std::to_string(atoms.size()) +
                                " atoms; expected 20..70",
                            0);
    }
}

}  // namespace detail

/// Reads `nt_index dx dy dz element` records. A file that only uses nt_index 0 supplies one
/// cluster shared by every nucleotide; otherwise all 292 slots must be present.
inline AtomTemplate read_atom_template(std::istream& in) {
    std::vector<std::vector<AtomSite>> clusters(kNucleotidesPerNucleosome);
    std::string line;
    std::size_t line_no = 0;
    bool only_zero = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        long long index = 0;
        AtomSite site;
        std::string element;
        if (!(fields >> index)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw TemplateError("malformed atom record", line_no);
        }
        if (!(fields >> site.offset.x >> site.offset.y >> site.offset.z >> element)) {
            throw TemplateError("malformed atom record", line_no);
        }
        std::string extra;
        if (fields >> extra) throw TemplateError("trailing fields in atom record", line_no);
        if (index < 0 || index >= static_cast<long long>(kNucleotidesPerNucleosome)) {
            throw TemplateError("nucleotide index out of range", line_no);
        }
        if (!is_finite(site.offset) || norm(site.offset) > kMaxAtomOffset) {
            throw TemplateError("atom offset exceeds 1.2 nm", line_no);
        }
        site.element = parse_element(element);
        only_zero = only_zero && index == 0;
        clusters[static_cast<std::size_t>(index)].push_back(site);
    }
    if (only_zero) {
        for (std::size_t slot = 1; slot < kNucleotidesPerNucleosome; ++slot) clusters[slot] = clusters[0];
    }
    for (std::size_t slot = 0; slot < kNucleotidesPerNucleosome; ++slot) detail::check_cluster(clusters[slot], slot);
    return AtomTemplate{std::move(clusters), false};
}

inline void write_atom_template(std::ostream& out, const AtomTemplate& tpl) {
    char buf[160];
    for (std::size_t slot = 0; slot < tpl.per_nucleotide.size(); ++slot) {
        for (const auto& a : tpl.per_nucleotide[slot]) {
            std::snprintf(buf, sizeof buf, "%zu %.6f %.6f %.6f %s\n", slot, a.offset.x, a.offset.y, a.offset.z,
                          std::string(to_string(a.element)).c_str());
            out << buf;
        }
    }
}

/// Minimal PDB ATOM/HETATM reader (name, x, y, z, element columns only). Coordinates are in
/// angstroms; the cluster is centered on its centroid and shared by every nucleotide.
inline AtomTemplate read_pdb_cluster(std::istream& in) {
    std::vector<AtomSite> atoms;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("ATOM", 0) != 0 && line.rfind("HETATM", 0) != 0) continue;
        if (line.size() < 54) throw TemplateError("short ATOM record", line_no);
        auto column = [&](std::size_t from, std::size_t to) {
            std::string s = line.substr(from, std::min(to, line.size()) - from);
            const auto b = s.find_first_not_of(' ');
            const auto e = s.find_last_not_of(' ');
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        AtomSite site;
        try {
            site.offset = Vec3{std::stod(column(30, 38)), std::stod(column(38, 46)), std::stod(column(46, 54))} * 0.1;
        } catch (const std::exception&) {
            throw TemplateError("malformed ATOM coordinates", line_no);
        }
        std::string element = line.size() >= 78 ? column(76, 78) : std::string{};
        if (element.empty()) {
            const std::string name = column(12, 16);
            element = name.empty() ? "X" : name.substr(0, 1);
        }
        site.element = parse_element(element);
        atoms.push_back(site);
    }
    if (atoms.empty()) throw TemplateError("no ATOM records", 0);
    Vec3 centroid{};
    for (const auto& a : atoms) centroid += a.offset;
    centroid = centroid / static_cast<double>(atoms.size());
    for (auto& a : atoms) {
        a.offset -= centroid;
        if (norm(a.offset) > kMaxAtomOffset) throw TemplateError("PDB cluster wider than 1.2 nm", 0);
    }
    detail::check_cluster(atoms, 0);
    return AtomTemplate{std::vector<std::vector<AtomSite>>(kNucleotidesPerNucleosome, atoms), false};
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_SYNTHGEN_HPP
