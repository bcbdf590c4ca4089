#ifndef CHROMOSCALE_SCOPE_FOCUS_HPP
#define CHROMOSCALE_SCOPE_FOCUS_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromoscale/core_model.hpp"
#include "chromoscale/scale_state.hpp"

namespace chromoscale {

inline constexpr std::size_t kFiberWindow = 5;

struct FocusState {
    std::size_t chromosome = 0;
    std::size_t focus_fiber = 0;
    /// Up to five consecutive fibers of the focus chromosome containing focus_fiber.
    IndexRange fiber_window{};
    Vec3 focus_point{};

    bool operator==(const FocusState&) const = default;
};

/// Five consecutive fibers around f, shifted (not truncated) at the ends of [lo, hi).
inline IndexRange fiber_window_around(std::size_t f, IndexRange fibers) noexcept {
    const std::size_t half = kFiberWindow / 2;
    const std::size_t last_start = fibers.size() > kFiberWindow ? fibers.end - kFiberWindow : fibers.begin;
    const std::size_t begin = std::clamp(f >= fibers.begin + half ? f - half : fibers.begin, fibers.begin, last_start);
    return {begin, std::min(begin + kFiberWindow, fibers.end)};
}

inline FocusState set_focus_fiber(const GenomeDataset& ds, std::size_t fiber) {
    if (fiber >= ds.count(DataLevel::Fiber)) {
        throw InvalidIdError("invalid focus fiber " + std::to_string(fiber));
    }
    FocusState focus;
    focus.chromosome = *ancestors(ds, {DataLevel::Fiber, fiber}).chromosome;
    focus.focus_fiber = fiber;
    focus.fiber_window =
        fiber_window_around(fiber, ds.descendants(DataLevel::Chromosome, focus.chromosome, DataLevel::Fiber));
    focus.focus_point = ds.position(DataLevel::Fiber, fiber);
    return focus;
}

/// Focus on the chromosome's median fiber (lower middle for even counts).
inline FocusState set_focus_chromosome(const GenomeDataset& ds, std::size_t chromosome) {
    if (chromosome >= ds.count(DataLevel::Chromosome)) {
        throw InvalidIdError("invalid focus chromosome " + std::to_string(chromosome));
    }
    const IndexRange fibers = ds.descendants(DataLevel::Chromosome, chromosome, DataLevel::Fiber);
    return set_focus_fiber(ds, fibers.begin + (fibers.size() - 1) / 2);
}

inline FocusState default_focus(const GenomeDataset& ds) {
    if (ds.count(DataLevel::Chromosome) == 0) throw std::invalid_argument("empty dataset");
    return set_focus_chromosome(ds, 0);
}

/// Sequence-end fade over a window of n elements, evaluated at continuous coordinate
/// u in [0, n] (element i spans [i, i+1]). Ramps are `fraction * n` long.
inline double end_fade(double u, std::size_t n, double fraction) noexcept {
    const double length = fraction * static_cast<double>(n);
    if (length <= 0.0) return 1.0;
    return std::clamp(std::min(u, static_cast<double>(n) - u) / length, 0.0, 1.0);
}

struct ScopeResult {
    /// Index range per stored level that is in scope.
    std::array<IndexRange, kStoredLevelCount> ranges{};
    /// Per-nucleosome fade for window scopes (empty otherwise); element i gets the minimum of
    /// the ramp over its extent, so the outermost elements are 0.
    std::vector<double> fade;
    double fade_fraction = 0.0;
    bool link_detail = false;

    const IndexRange& range(DataLevel level) const { return ranges.at(level_index(level)); }
    double fade_at(std::size_t nucleosome) const {
        const auto& r = range(DataLevel::Nucleosome);
        return fade.empty() ? 1.0 : fade.at(nucleosome - r.begin);
    }
};

inline ScopeResult visible_scope(const GenomeDataset& ds, const ScheduleRow& row, const FocusState& focus,
                                 double fade_fraction = 0.1) {
    ScopeResult scope;
    switch (row.scope_mode) {
        case ScopeMode::AllChromosomes:
            for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
                scope.ranges[l] = {0, ds.count(static_cast<DataLevel>(l))};
            }
            break;
        case ScopeMode::FocusChromosome:
            for (std::size_t l = 0; l < kStoredLevelCount; ++l) {
                scope.ranges[l] = ds.descendants(DataLevel::Chromosome, focus.chromosome, static_cast<DataLevel>(l));
            }
            break;
        case ScopeMode::FiberWindowWithLinks:
        case ScopeMode::FiberWindow: {
            const IndexRange w = focus.fiber_window;
            scope.ranges[0] = {focus.chromosome, focus.chromosome + 1};
            scope.ranges[1] = {ds.parent_of(DataLevel::Fiber, w.begin), ds.parent_of(DataLevel::Fiber, w.end - 1) + 1};
            scope.ranges[2] = w;
            scope.ranges[3] = {ds.children(DataLevel::Fiber, w.begin).begin, ds.children(DataLevel::Fiber, w.end - 1).end};
            scope.link_detail = row.scope_mode == ScopeMode::FiberWindowWithLinks;
            scope.fade_fraction = fade_fraction;
            const std::size_t n = scope.ranges[3].size();
            scope.fade.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = static_cast<double>(i);
                scope.fade[i] = std::min(end_fade(u, n, fade_fraction), end_fade(u + 1.0, n, fade_fraction));
            }
            break;
        }
    }
    return scope;
}

/// Brightness multiplier for elements next in focus: the focus chromosome on rows 0-2, the
/// fiber window on row 3, nothing finer.
inline double focus_tint(const AncestorPath& lineage, std::size_t row, const FocusState& focus,
                         double highlight = 1.15) noexcept {
    if (row <= 2) return lineage.chromosome == focus.chromosome ? highlight : 1.0;
    if (row == 3) return lineage.fiber && focus.fiber_window.contains(*lineage.fiber) ? highlight : 1.0;
    return 1.0;
}

/// Ancestors of an element together with the element itself.
inline AncestorPath lineage(const GenomeDataset& ds, const ElementId& id) {
    AncestorPath path = ancestors(ds, id);
    switch (id.level) {
        case DataLevel::Chromosome: path.chromosome = id.index; break;
        case DataLevel::Locus: path.locus = id.index; break;
        case DataLevel::Fiber: path.fiber = id.index; break;
        case DataLevel::Nucleosome: path.nucleosome = id.index; break;
        default: break;
    }
    return path;
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_SCOPE_FOCUS_HPP
