#ifndef CHROMOSCALE_RENDER_LIST_HPP
#define CHROMOSCALE_RENDER_LIST_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromoscale/config.hpp"
#include "chromoscale/core_model.hpp"
#include "chromoscale/scale_state.hpp"
#include "chromoscale/scope_focus.hpp"
#include "chromoscale/synthgen.hpp"

namespace chromoscale {

struct Rgba8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 255;

    constexpr bool operator==(const Rgba8&) const noexcept = default;
};

enum class BatchRole : std::uint8_t { CoarseFlat = 0, CoarseShaded = 1, OverlayDetail = 2, Links = 3 };

constexpr std::string_view to_string(BatchRole r) noexcept {
    switch (r) {
        case BatchRole::CoarseFlat: return "coarse_flat";
        case BatchRole::CoarseShaded: return "coarse_shaded";
        case BatchRole::OverlayDetail: return "overlay_detail";
        case BatchRole::Links: return "links";
    }
    return "?";
}

constexpr bool is_coarse(BatchRole r) noexcept { return r == BatchRole::CoarseFlat || r == BatchRole::CoarseShaded; }

/// Slot value marking linker instances (atom then holds the linker point index).
inline constexpr std::uint16_t kLinkSlot = 0xFFFF;

/// Identity of a rendered instance. For nucleotides and atoms `index` is the owning
/// nucleosome, `slot` the nucleotide slot and `atom` the atom within that nucleotide.
struct ElementRef {
    DataLevel level = DataLevel::Chromosome;
    std::uint32_t index = 0;
    std::uint16_t slot = 0;
    std::uint16_t atom = 0;

    constexpr bool operator==(const ElementRef&) const noexcept = default;
    constexpr auto operator<=>(const ElementRef&) const noexcept = default;

    bool is_link() const noexcept { return slot == kLinkSlot; }
};

struct Instance {
    Vec3f position;
    float radius = 1.0F;
    Rgba8 color;
    float ssao_weight = 1.0F;
    float alpha = 1.0F;
    ElementRef ref;

    bool operator==(const Instance&) const noexcept = default;
};

struct RenderBatch {
    BatchRole role = BatchRole::CoarseShaded;
    int draw_order = 0;
    std::vector<Instance> instances;

    bool operator==(const RenderBatch&) const = default;
};

struct RenderStats {
    std::size_t total = 0;
    std::size_t coarse = 0;
    std::size_t overlay = 0;
    std::size_t links = 0;

    bool operator==(const RenderStats&) const = default;
};

struct RenderList {
    std::vector<RenderBatch> batches;
    ScaleParam scale;
    TransitionWeights weights;
    RenderStats stats;

    bool operator==(const RenderList& o) const {
        return batches == o.batches && scale.s == o.scale.s && scale.offset == o.scale.offset &&
               weights == o.weights && stats == o.stats;
    }
};

class InstanceCapError : public std::runtime_error {
public:
    InstanceCapError(std::size_t row, std::size_t requested, std::size_t cap)
        : std::runtime_error("instance cap exceeded at row " + std::to_string(row) + ": " +
                             std::to_string(requested) + " > " + std::to_string(cap)),
          row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// ---------------------------------------------------------------------------
// Colors

inline constexpr Rgba8 kNucleusColor{143, 168, 200, 255};
inline constexpr double kGoldenAngleDeg = 137.508;

inline Rgba8 hsl_to_rgb(double hue_deg, double s, double l) noexcept {
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double hp = hue_deg / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = l - c / 2.0;
    auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    return {q(r + m), q(g + m), q(b + m), 255};
}

inline double chromosome_hue(std::size_t chromosome) noexcept {
    return std::fmod(static_cast<double>(chromosome) * kGoldenAngleDeg, 360.0);
}

inline Rgba8 chromosome_color(std::size_t chromosome) noexcept {
    return hsl_to_rgb(chromosome_hue(chromosome), 0.55, 0.55);
}

enum class Base : std::uint8_t { A = 0, C = 1, G = 2, T = 3 };

/// Deterministic stand-in sequence: strand A bases hashed from (nucleosome, base pair),
/// strand B carries the complement.
inline Base pseudo_base(std::size_t nucleosome, std::size_t slot) noexcept {
    const std::size_t bp = NucleotideTemplate::base_pair(slot);
    const auto cls = static_cast<std::uint8_t>(splitmix64(nucleosome * kNucleotidesPerStrand + bp) & 3U);
    return static_cast<Base>(slot < kNucleotidesPerStrand ? cls : 3 - cls);
}

inline Rgba8 base_color(Base b) noexcept {
    switch (b) {
        case Base::A: return {46, 160, 67, 255};
        case Base::T: return {214, 39, 40, 255};
        case Base::G: return {255, 150, 30, 255};
        case Base::C: return {31, 100, 220, 255};
    }
    return {0, 0, 0, 255};
}

inline Rgba8 cpk_color(Element e) noexcept {
    switch (e) {
        case Element::C: return {0x90, 0x90, 0x90, 255};
        case Element::N: return {0x30, 0x50, 0xF8, 255};
        case Element::O: return {0xFF, 0x0D, 0x0D, 255};
        case Element::P: return {0xFF, 0x80, 0x00, 255};
        case Element::H: return {0xFF, 0xFF, 0xFF, 255};
        case Element::Other: return {0xFF, 0x14, 0x93, 255};
    }
    return {0xFF, 0x14, 0x93, 255};
}

inline Rgba8 mix(const Rgba8& a, const Rgba8& b, double m) noexcept {
    auto ch = [m](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * m));
    };
    return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b), 255};
}

inline Rgba8 tint(const Rgba8& c, double factor) noexcept {
    if (factor == 1.0) return c;
    auto ch = [factor](std::uint8_t x) {
        return static_cast<std::uint8_t>(std::min<long>(255, std::lround(x * factor)));
    };
    return {ch(c.r), ch(c.g), ch(c.b), c.a};
}

/// What a color mode needs to know about an element.
struct ColorKey {
    std::size_t chromosome = 0;
    std::size_t nucleosome = 0;
    std::size_t slot = 0;
    Element element = Element::Other;
};

inline Rgba8 element_color(ColorMode mode, const ColorKey& key) noexcept {
    switch (mode) {
        case ColorMode::Single: return kNucleusColor;
        case ColorMode::ByChromosome: return chromosome_color(key.chromosome);
        case ColorMode::ByNucleotide: return base_color(pseudo_base(key.nucleosome, key.slot));
        case ColorMode::ByElement: return cpk_color(key.element);
    }
    return kNucleusColor;
}

/// Color of an element on schedule row `row`, mixed toward row+1 during a color change.
inline Rgba8 element_color(const ScaleSchedule& schedule, std::size_t row, const ColorKey& key,
                           double color_mix = 0.0) noexcept {
    const Rgba8 base = element_color(schedule.rows[row].color_mode, key);
    if (color_mix <= 0.0 || row + 1 >= kScheduleRows || schedule.rows[row].transition_to_next != Transition::ColorChange) {
        return base;
    }
    return mix(base, element_color(schedule.rows[row + 1].color_mode, key), color_mix);
}

// ---------------------------------------------------------------------------
// Radii

inline constexpr double kStoredRadiusFactor = 0.4;
inline constexpr double kNucleotideRadius = 1.0;
inline constexpr double kAtomRadiusFloor = 0.06;

inline double van_der_waals_radius(Element e) noexcept {
    switch (e) {
        case Element::H: return 0.110;
        case Element::C: return 0.170;
        case Element::N: return 0.155;
        case Element::O: return 0.152;
        case Element::P: return 0.180;
        case Element::Other: return 0.0;
    }
    return 0.0;
}

inline double element_radius(DataLevel level, const std::array<double, kStoredLevelCount>& stats,
                             Element element = Element::Other) noexcept {
    if (is_stored(level)) return kStoredRadiusFactor * stats[level_index(level)];
    if (level == DataLevel::Nucleotide) return kNucleotideRadius;
    return std::max(van_der_waals_radius(element), kAtomRadiusFloor);
}

// ---------------------------------------------------------------------------
// Assembly

namespace detail {

struct Layer {
    std::size_t row = 0;          // schedule row providing data level, scope and palette
    double alpha = 1.0;
    double ssao = 1.0;
    double color_mix = 0.0;       // only for color-change rows
    BatchRole role = BatchRole::CoarseShaded;
    bool links = false;
    double link_alpha = 0.0;
};

inline IndexRange intersect(IndexRange a, IndexRange b) noexcept {
    const std::size_t lo = std::max(a.begin, b.begin);
    const std::size_t hi = std::min(a.end, b.end);
    return lo < hi ? IndexRange{lo, hi} : IndexRange{lo, lo};
}

inline IndexRange descend(const GenomeDataset& ds, DataLevel from, IndexRange r, DataLevel to) {
    if (r.empty() || from == to) return r;
    return {ds.descendants(from, r.begin, to).begin, ds.descendants(from, r.end - 1, to).end};
}

/// Stored-level element range a layer draws, optionally restricted to descendants of a
/// visible parent range.
struct LayerExtent {
    DataLevel level;
    IndexRange stored;  // range at min(level, Nucleosome)
};

class Assembler {
public:
    Assembler(const GenomeDataset& ds, const FocusState& focus, const EngineConfig& cfg)
        : ds_(ds), focus_(focus), cfg_(cfg) {}

    LayerExtent extent(const Layer& layer, const ScopeResult& scope, std::optional<LayerExtent> parent) const {
        const DataLevel level = cfg_.schedule.rows[layer.row].data_level;
        const DataLevel stored = is_stored(level) ? level : DataLevel::Nucleosome;
        IndexRange r = scope.range(stored);
        if (parent) {
            const DataLevel pl = is_stored(parent->level) ? parent->level : DataLevel::Nucleosome;
            r = intersect(r, descend(ds_, pl, parent->stored, stored));
        }
        return {level, r};
    }

    std::size_t count(const LayerExtent& e) const {
        switch (e.level) {
            case DataLevel::Nucleotide: return e.stored.size() * kNucleotidesPerNucleosome;
            case DataLevel::Atom: return e.stored.size() * ds_.templates().atoms_per_nucleosome();
            default: return e.stored.size();
        }
    }

    std::vector<std::vector<Vec3>> link_points(const LayerExtent& e) const {
        std::vector<std::vector<Vec3>> links;
        if (e.stored.size() < 2) return links;
        const auto& frames = ds_.nucleosome_frames();
        for (std::size_t n = e.stored.begin; n + 1 < e.stored.end; ++n) {
            links.push_back(linker_points(frames[n], frames[n + 1], ds_.templates().nucleotides()));
        }
        return links;
    }

    void emit(const Layer& layer, const LayerExtent& e, const ScopeResult& scope, RenderBatch& out) const {
        if (e.stored.empty()) return;
        const auto alpha = static_cast<float>(layer.alpha);
        const auto ssao = static_cast<float>(layer.ssao);
        // Group by chromosome (and fiber for nucleosome-based levels) to know each element's lineage.
        const IndexRange chromosomes = descend_up(e);
        for (std::size_t c = chromosomes.begin; c < chromosomes.end; ++c) {
            const DataLevel stored = is_stored(e.level) ? e.level : DataLevel::Nucleosome;
            const IndexRange rc = intersect(e.stored, ds_.descendants(DataLevel::Chromosome, c, stored));
            if (rc.empty()) continue;
            if (stored != DataLevel::Nucleosome) {
                AncestorPath lineage_c;
                lineage_c.chromosome = c;
                const Rgba8 color = tint(element_color(cfg_.schedule, layer.row, ColorKey{c}, layer.color_mix),
                                         focus_tint(lineage_c, layer.row, focus_, cfg_.highlight));
                const auto radius = static_cast<float>(element_radius(e.level, ds_.stats()));
                const auto& pos = ds_.table(e.level).positions;
                for (std::size_t i = rc.begin; i < rc.end; ++i) {
                    out.instances.push_back({to_float(pos[i]), radius, color, ssao, alpha,
                                             ElementRef{e.level, static_cast<std::uint32_t>(i), 0, 0}});
                }
                continue;
            }
            const IndexRange fibers = ds_.descendants(DataLevel::Chromosome, c, DataLevel::Fiber);
            for (std::size_t f = fibers.begin; f < fibers.end; ++f) {
                const IndexRange rf = intersect(rc, ds_.children(DataLevel::Fiber, f));
                if (rf.empty()) continue;
                AncestorPath lineage_f;
                lineage_f.chromosome = c;
                lineage_f.fiber = f;
                const double tint_factor = focus_tint(lineage_f, layer.row, focus_, cfg_.highlight);
                switch (e.level) {
                    case DataLevel::Nucleosome: emit_nucleosomes(layer, rf, c, tint_factor, alpha, ssao, out); break;
                    case DataLevel::Nucleotide: emit_nucleotides(layer, rf, scope, c, tint_factor, alpha, ssao, out); break;
                    case DataLevel::Atom: emit_atoms(layer, rf, scope, c, tint_factor, alpha, ssao, out); break;
                    default: break;
                }
            }
        }
    }

    void emit_links(const Layer& layer, const LayerExtent& e, const ScopeResult& scope,
                    const std::vector<std::vector<Vec3>>& links, RenderBatch& out) const {
        const std::size_t n = e.stored.size();
        for (std::size_t i = 0; i < links.size(); ++i) {
            const std::size_t nuc = e.stored.begin + i;
            const std::size_t c = *ancestors(ds_, {DataLevel::Nucleosome, nuc}).chromosome;
            const Rgba8 color = element_color(cfg_.schedule, layer.row, ColorKey{c, nuc}, layer.color_mix);
            const double fade = end_fade(static_cast<double>(i + 1), n, scope.fade_fraction);
            const auto alpha = static_cast<float>(layer.link_alpha * fade);
            if (!(alpha > 0.0F)) continue;
            for (std::size_t k = 0; k < links[i].size(); ++k) {
                out.instances.push_back({to_float(links[i][k]), static_cast<float>(kNucleotideRadius), color, 1.0F,
                                         alpha,
                                         ElementRef{DataLevel::Nucleotide, static_cast<std::uint32_t>(nuc), kLinkSlot,
                                                    static_cast<std::uint16_t>(k)}});
            }
        }
    }

private:
    IndexRange descend_up(const LayerExtent& e) const {
        const DataLevel stored = is_stored(e.level) ? e.level : DataLevel::Nucleosome;
        if (stored == DataLevel::Chromosome) return e.stored;
        std::size_t first = e.stored.begin;
        std::size_t last = e.stored.end - 1;
        for (auto l = stored; l != DataLevel::Chromosome; l = static_cast<DataLevel>(level_index(l) - 1)) {
            first = ds_.parent_of(l, first);
            last = ds_.parent_of(l, last);
        }
        return {first, last + 1};
    }

    // Sequence coordinate of base pair `bp` of window nucleosome n, in nucleosome units.
    static double window_coord(std::size_t n, const ScopeResult& scope, std::size_t bp) noexcept {
        const auto& r = scope.range(DataLevel::Nucleosome);
        return static_cast<double>(n - r.begin) + (static_cast<double>(bp) + 0.5) / kNucleotidesPerStrand;
    }

    double fade(std::size_t n, const ScopeResult& scope, std::size_t bp) const noexcept {
        if (scope.fade.empty()) return 1.0;
        return end_fade(window_coord(n, scope, bp), scope.range(DataLevel::Nucleosome).size(), scope.fade_fraction);
    }

    void emit_nucleosomes(const Layer& layer, IndexRange r, std::size_t c, double tint_factor, float alpha,
                          float ssao, RenderBatch& out) const {
        const Rgba8 color = tint(element_color(cfg_.schedule, layer.row, ColorKey{c}, layer.color_mix), tint_factor);
        const auto radius = static_cast<float>(element_radius(DataLevel::Nucleosome, ds_.stats()));
        const auto& pos = ds_.table(DataLevel::Nucleosome).positions;
        for (std::size_t i = r.begin; i < r.end; ++i) {
            out.instances.push_back({to_float(pos[i]), radius, color, ssao, alpha,
                                     ElementRef{DataLevel::Nucleosome, static_cast<std::uint32_t>(i), 0, 0}});
        }
    }

    void emit_nucleotides(const Layer& layer, IndexRange r, const ScopeResult& scope, std::size_t c,
                          double tint_factor, float alpha, float ssao, RenderBatch& out) const {
        const auto& local = ds_.templates().nucleotides().local_positions;
        const auto& frames = ds_.nucleosome_frames();
        const auto radius = static_cast<float>(kNucleotideRadius);
        for (std::size_t n = r.begin; n < r.end; ++n) {
            const Frame& f = frames[n];
            for (std::size_t slot = 0; slot < kNucleotidesPerNucleosome; ++slot) {
                const float a = alpha * static_cast<float>(fade(n, scope, NucleotideTemplate::base_pair(slot)));
                if (!(a > 0.0F)) continue;
                const Rgba8 color =
                    tint(element_color(cfg_.schedule, layer.row, ColorKey{c, n, slot}, layer.color_mix), tint_factor);
                out.instances.push_back({to_float(f.apply(local[slot])), radius, color, ssao, a,
                                         ElementRef{DataLevel::Nucleotide, static_cast<std::uint32_t>(n),
                                                    static_cast<std::uint16_t>(slot), 0}});
            }
        }
    }

    void emit_atoms(const Layer& layer, IndexRange r, const ScopeResult& scope, std::size_t c, double tint_factor,
                    float alpha, float ssao, RenderBatch& out) const {
        const auto& tpl = ds_.templates();
        const auto& frames = ds_.nucleosome_frames();
        std::array<float, 6> radius{};
        for (std::size_t e = 0; e < radius.size(); ++e) {
            radius[e] = static_cast<float>(element_radius(DataLevel::Atom, ds_.stats(), static_cast<Element>(e)));
        }
        for (std::size_t n = r.begin; n < r.end; ++n) {
            const Frame& f = frames[n];
            for (std::size_t slot = 0; slot < kNucleotidesPerNucleosome; ++slot) {
                const float a = alpha * static_cast<float>(fade(n, scope, NucleotideTemplate::base_pair(slot)));
                if (!(a > 0.0F)) continue;
                const IndexRange atoms = tpl.atoms_of(slot);
                std::array<std::optional<Rgba8>, 6> colors{};
                for (std::size_t k = atoms.begin; k < atoms.end; ++k) {
                    const Element el = tpl.atom_element(k);
                    auto& color = colors[static_cast<std::size_t>(el)];
                    if (!color) {
                        color = tint(element_color(cfg_.schedule, layer.row, ColorKey{c, n, slot, el}, layer.color_mix),
                                     tint_factor);
                    }
                    out.instances.push_back({to_float(f.apply(tpl.atom_local(k))), radius[static_cast<std::size_t>(el)],
                                             *color, ssao, a,
                                             ElementRef{DataLevel::Atom, static_cast<std::uint32_t>(n),
                                                        static_cast<std::uint16_t>(slot),
                                                        static_cast<std::uint16_t>(k - atoms.begin)}});
                }
            }
        }
    }

    const GenomeDataset& ds_;
    const FocusState& focus_;
    const EngineConfig& cfg_;
};

}  // namespace detail

/// Builds the ordered instance batches for one frame: the coarse representation of the
/// current row (flattened as the transition proceeds), then the finer row's detail restricted
/// to children of visible coarse elements. Pure and deterministic.
inline RenderList assemble(const GenomeDataset& ds, const ScaleParam& scale, const FocusState& focus,
                           const EngineConfig& cfg = {}) {
    scale.check();
    const auto& schedule = cfg.schedule;
    RenderList list;
    list.scale = scale;
    list.weights = transition_weights(scale, schedule, cfg.phases);
    const auto& w = list.weights;
    const std::size_t k = w.row;
    const auto transition = schedule.rows[k].transition_to_next;

    detail::Layer coarse{k, 1.0, 1.0, 0.0, BatchRole::CoarseShaded, false, 0.0};
    std::optional<detail::Layer> overlay;
    if (transition == Transition::VisualEmbedding) {
        coarse.alpha = w.coarse_alpha;
        coarse.ssao = w.ssao_weight;
        coarse.role = w.ssao_weight > 0.0 ? BatchRole::CoarseShaded : BatchRole::CoarseFlat;
        coarse.link_alpha = w.coarse_alpha;
        if (w.overlay_alpha > 0.0) {
            overlay = detail::Layer{k + 1, w.overlay_alpha, 1.0, 0.0, BatchRole::OverlayDetail, false, w.overlay_alpha};
        }
    } else if (transition == Transition::ColorChange) {
        coarse.color_mix = w.color_mix;
        coarse.link_alpha = 1.0 - w.color_mix;
    } else {
        coarse.link_alpha = 1.0;
    }

    detail::Assembler assembler(ds, focus, cfg);
    const ScopeResult coarse_scope = visible_scope(ds, schedule.rows[k], focus, cfg.end_fade_fraction);
    const auto coarse_extent = assembler.extent(coarse, coarse_scope, std::nullopt);
    coarse.links = coarse_scope.link_detail && coarse.link_alpha > 0.0;

    std::optional<ScopeResult> overlay_scope;
    std::optional<detail::LayerExtent> overlay_extent;
    if (overlay) {
        overlay_scope = visible_scope(ds, schedule.rows[k + 1], focus, cfg.end_fade_fraction);
        overlay_extent = assembler.extent(*overlay, *overlay_scope, coarse_extent);
        overlay->links = overlay_scope->link_detail;
    }

    std::vector<std::vector<Vec3>> coarse_links;
    std::vector<std::vector<Vec3>> overlay_links;
    if (coarse.links) coarse_links = assembler.link_points(coarse_extent);
    if (overlay && overlay->links) overlay_links = assembler.link_points(*overlay_extent);

    auto link_total = [](const std::vector<std::vector<Vec3>>& links) {
        std::size_t n = 0;
        for (const auto& l : links) n += l.size();
        return n;
    };
    const std::size_t requested = assembler.count(coarse_extent) + link_total(coarse_links) +
                                  (overlay ? assembler.count(*overlay_extent) + link_total(overlay_links) : 0);
    if (requested > cfg.instance_cap) throw InstanceCapError(k, requested, cfg.instance_cap);

    RenderBatch coarse_batch{coarse.role, 0, {}};
    coarse_batch.instances.reserve(assembler.count(coarse_extent));
    assembler.emit(coarse, coarse_extent, coarse_scope, coarse_batch);
    list.stats.coarse = coarse_batch.instances.size();
    list.batches.push_back(std::move(coarse_batch));

    if (coarse.links) {
        RenderBatch links{BatchRole::Links, 1, {}};
        assembler.emit_links(coarse, coarse_extent, coarse_scope, coarse_links, links);
        list.stats.links += links.instances.size();
        if (!links.instances.empty()) list.batches.push_back(std::move(links));
    }
    if (overlay) {
        RenderBatch batch{BatchRole::OverlayDetail, 2, {}};
        batch.instances.reserve(assembler.count(*overlay_extent));
        assembler.emit(*overlay, *overlay_extent, *overlay_scope, batch);
        list.stats.overlay = batch.instances.size();
        list.batches.push_back(std::move(batch));
        if (overlay->links) {
            RenderBatch links{BatchRole::Links, 3, {}};
            assembler.emit_links(*overlay, *overlay_extent, *overlay_scope, overlay_links, links);
            list.stats.links += links.instances.size();
            if (!links.instances.empty()) list.batches.push_back(std::move(links));
        }
    }
    list.stats.total = list.stats.coarse + list.stats.overlay + list.stats.links;
    return list;
}

// ---------------------------------------------------------------------------
// Binary layout: 24 bytes per instance, little-endian.
//   f32 x, y, z, radius | u8 r, g, b, a | u8 ssao (0-255) | u8 role | u16 reserved

inline constexpr std::size_t kInstanceBytes = 24;

namespace detail {

inline void put_u32(std::uint8_t* p, std::uint32_t v) noexcept {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

inline std::uint32_t get_u32(const std::uint8_t* p) noexcept {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint8_t unit_to_byte(float v) noexcept {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
}

}  // namespace detail

/// Wire form of an instance. The alpha byte carries the instance alpha.
struct WireInstance {
    Vec3f position;
    float radius = 0.0F;
    Rgba8 color;
    std::uint8_t ssao = 0;
    BatchRole role = BatchRole::CoarseShaded;

    bool operator==(const WireInstance&) const = default;
};

inline void encode_instance(const Instance& in, BatchRole role, std::uint8_t* p) noexcept {
    detail::put_u32(p + 0, std::bit_cast<std::uint32_t>(in.position.x));
    detail::put_u32(p + 4, std::bit_cast<std::uint32_t>(in.position.y));
    detail::put_u32(p + 8, std::bit_cast<std::uint32_t>(in.position.z));
    detail::put_u32(p + 12, std::bit_cast<std::uint32_t>(in.radius));
    p[16] = in.color.r;
    p[17] = in.color.g;
    p[18] = in.color.b;
    p[19] = detail::unit_to_byte(in.alpha);
    p[20] = detail::unit_to_byte(in.ssao_weight);
    p[21] = static_cast<std::uint8_t>(role);
    p[22] = 0;
    p[23] = 0;
}

/// All batches in draw order, concatenated.
inline std::vector<std::uint8_t> encode_instances(const RenderList& list) {
    std::vector<std::uint8_t> bytes(list.stats.total * kInstanceBytes);
    std::size_t offset = 0;
    for (const auto& batch : list.batches) {
        for (const auto& inst : batch.instances) {
            encode_instance(inst, batch.role, bytes.data() + offset);
            offset += kInstanceBytes;
        }
    }
    bytes.resize(offset);
    return bytes;
}

inline std::vector<WireInstance> decode_instances(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % kInstanceBytes != 0) {
        throw std::invalid_argument("instance payload is not a multiple of 24 bytes");
    }
    std::vector<WireInstance> out(bytes.size() / kInstanceBytes);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint8_t* p = bytes.data() + i * kInstanceBytes;
        auto& w = out[i];
        w.position = {std::bit_cast<float>(detail::get_u32(p)), std::bit_cast<float>(detail::get_u32(p + 4)),
                      std::bit_cast<float>(detail::get_u32(p + 8))};
        w.radius = std::bit_cast<float>(detail::get_u32(p + 12));
        w.color = {p[16], p[17], p[18], p[19]};
        w.ssao = p[20];
        if (p[21] > static_cast<std::uint8_t>(BatchRole::Links)) throw std::invalid_argument("unknown batch role");
        w.role = static_cast<BatchRole>(p[21]);
    }
    return out;
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_RENDER_LIST_HPP
