#ifndef CHROMOSCALE_SCALE_STATE_HPP
#define CHROMOSCALE_SCALE_STATE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chromoscale/core_model.hpp"

namespace chromoscale {

inline constexpr std::size_t kScheduleRows = 8;
inline constexpr double kMaxScale = 7.0;
inline constexpr double kMaxScaleOffset = 0.9;

enum class ColorMode : std::uint8_t { Single, ByChromosome, ByNucleotide, ByElement };
enum class ScopeMode : std::uint8_t { AllChromosomes, FocusChromosome, FiberWindowWithLinks, FiberWindow };
enum class Transition : std::uint8_t { VisualEmbedding, ColorChange, None };

constexpr std::string_view to_string(ColorMode m) noexcept {
    switch (m) {
        case ColorMode::Single: return "single";
        case ColorMode::ByChromosome: return "by_chromosome";
        case ColorMode::ByNucleotide: return "by_nucleotide";
        case ColorMode::ByElement: return "by_element";
    }
    return "?";
}

constexpr std::string_view to_string(ScopeMode m) noexcept {
    switch (m) {
        case ScopeMode::AllChromosomes: return "all_chromosomes";
        case ScopeMode::FocusChromosome: return "focus_chromosome";
        case ScopeMode::FiberWindowWithLinks: return "fiber_window_with_links";
        case ScopeMode::FiberWindow: return "fiber_window";
    }
    return "?";
}

constexpr std::string_view to_string(Transition t) noexcept {
    switch (t) {
        case Transition::VisualEmbedding: return "visual_embedding";
        case Transition::ColorChange: return "color_change";
        case Transition::None: return "none";
    }
    return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view name, const std::array<Enum, N>& values) {
    for (Enum v : values) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

struct ScheduleRow {
    DataLevel data_level = DataLevel::Chromosome;
    ColorMode color_mode = ColorMode::Single;
    ScopeMode scope_mode = ScopeMode::AllChromosomes;
    std::string semantic_name;
    Transition transition_to_next = Transition::VisualEmbedding;

    bool operator==(const ScheduleRow&) const = default;
};

/// Mapping from semantic rows to data levels, colors, rendered subsets and transitions.
struct ScaleSchedule {
    std::array<ScheduleRow, kScheduleRows> rows{};

    const ScheduleRow& operator[](std::size_t k) const { return rows.at(k); }
    bool operator==(const ScaleSchedule&) const = default;
};

inline ScaleSchedule default_schedule() {
    using DL = DataLevel;
    using CM = ColorMode;
    using SM = ScopeMode;
    using TR = Transition;
    return ScaleSchedule{{{
        {DL::Chromosome, CM::Single, SM::AllChromosomes, "nucleus", TR::VisualEmbedding},
        {DL::Locus, CM::ByChromosome, SM::AllChromosomes, "chromosome", TR::VisualEmbedding},
        {DL::Fiber, CM::ByChromosome, SM::AllChromosomes, "chromosome with detail", TR::VisualEmbedding},
        {DL::Nucleosome, CM::ByChromosome, SM::FocusChromosome, "fibers", TR::VisualEmbedding},
        {DL::Nucleotide, CM::ByChromosome, SM::FiberWindowWithLinks, "nucleosomes", TR::ColorChange},
        {DL::Nucleotide, CM::ByNucleotide, SM::FiberWindow, "nucleotides", TR::VisualEmbedding},
        {DL::Atom, CM::ByNucleotide, SM::FiberWindow, "nucleotides with detail", TR::ColorChange},
        {DL::Atom, CM::ByElement, SM::FiberWindow, "individual atoms", TR::None},
    }}};
}

/// Structural rules a schedule must satisfy: data levels never get coarser, the last row has
/// no transition, and color changes keep the data level.
inline void check_schedule(const ScaleSchedule& schedule) {
    for (std::size_t k = 0; k < kScheduleRows; ++k) {
        const auto& row = schedule.rows[k];
        const bool last = k + 1 == kScheduleRows;
        if (last != (row.transition_to_next == Transition::None)) {
            throw std::invalid_argument("schedule row " + std::to_string(k) +
                                        ": only the last row may (and must) have transition none");
        }
        if (last) continue;
        const auto& next = schedule.rows[k + 1];
        if (level_index(next.data_level) < level_index(row.data_level)) {
            throw std::invalid_argument("schedule row " + std::to_string(k + 1) + " is coarser than its predecessor");
        }
        if (row.transition_to_next == Transition::ColorChange && next.data_level != row.data_level) {
            throw std::invalid_argument("schedule row " + std::to_string(k) +
                                        ": color_change requires the same data level on both rows");
        }
        if (row.transition_to_next == Transition::VisualEmbedding && next.data_level == row.data_level) {
            throw std::invalid_argument("schedule row " + std::to_string(k) +
                                        ": visual_embedding requires a finer data level");
        }
    }
}

/// Breakpoints of the piecewise-linear transition ramps, in phase units t in [0,1].
struct PhaseBreakpoints {
    double flatten_end = 0.35;  // ssao 1->0 over [0, flatten_end]
    double overlay_end = 0.70;  // overlay 0->1 over [flatten_end, overlay_end]; coarse 1->0 after
    double color_begin = 0.25;
    double color_end = 0.75;

    void check() const {
        if (!(0.0 < flatten_end && flatten_end < overlay_end && overlay_end < 1.0)) {
            throw std::invalid_argument("phase breakpoints must satisfy 0 < flatten_end < overlay_end < 1");
        }
        if (!(0.0 <= color_begin && color_begin < color_end && color_end <= 1.0)) {
            throw std::invalid_argument("color ramp must satisfy 0 <= color_begin < color_end <= 1");
        }
    }
};

/// Global scale parameter plus the user's representation offset.
struct ScaleParam {
    double s = 0.0;
    double offset = 0.0;

    void check() const {
        if (!(s >= 0.0 && s <= kMaxScale)) throw std::domain_error("scale s must lie in [0, 7]");
        if (!(offset >= -kMaxScaleOffset && offset <= kMaxScaleOffset)) {
            throw std::domain_error("scale offset must lie in [-0.9, 0.9]");
        }
    }

    /// s + offset clamped to [0, 7].
    double effective() const noexcept { return std::clamp(s + offset, 0.0, kMaxScale); }
    std::size_t row() const noexcept {
        return std::min(static_cast<std::size_t>(std::floor(effective())), kScheduleRows - 1);
    }
    double phase() const noexcept { return effective() - static_cast<double>(row()); }
};

struct TransitionWeights {
    std::size_t row = 0;
    double t = 0.0;
    double ssao_weight = 1.0;
    double coarse_alpha = 1.0;
    double overlay_alpha = 0.0;
    double color_mix = 0.0;

    bool operator==(const TransitionWeights&) const = default;
};

/// Linear ramp 0 -> 1 across [a, b].
inline double ramp(double t, double a, double b) noexcept {
    if (t <= a) return 0.0;
    if (t >= b) return 1.0;
    return (t - a) / (b - a);
}

inline TransitionWeights transition_weights(const ScaleParam& p, const ScaleSchedule& schedule,
                                            const PhaseBreakpoints& phases = {}) {
    TransitionWeights w;
    w.row = p.row();
    w.t = p.phase();
    switch (schedule[w.row].transition_to_next) {
        case Transition::VisualEmbedding:
            w.ssao_weight = 1.0 - ramp(w.t, 0.0, phases.flatten_end);
            w.overlay_alpha = ramp(w.t, phases.flatten_end, phases.overlay_end);
            w.coarse_alpha = 1.0 - ramp(w.t, phases.overlay_end, 1.0);
            w.color_mix = w.overlay_alpha;
            break;
        case Transition::ColorChange:
            w.ssao_weight = 1.0;
            w.color_mix = ramp(w.t, phases.color_begin, phases.color_end);
            w.overlay_alpha = w.color_mix;
            w.coarse_alpha = 1.0 - w.color_mix;
            break;
        case Transition::None:
            break;
    }
    return w;
}

/// Visible state of one schedule row's representation: opacity and opacity * 3D shading.
struct LayerState {
    double alpha = 0.0;
    double shaded_alpha = 0.0;
};

/// What the renderer shows, per schedule row. Unlike raw weights this is continuous across
/// integer s: the overlay that finishes row k is exactly the coarse layer that starts row k+1.
inline std::array<LayerState, kScheduleRows> layer_states(const ScaleParam& p, const ScaleSchedule& schedule,
                                                         const PhaseBreakpoints& phases = {}) {
    std::array<LayerState, kScheduleRows> layers{};
    const auto w = transition_weights(p, schedule, phases);
    const std::size_t k = w.row;
    switch (schedule[k].transition_to_next) {
        case Transition::VisualEmbedding:
            layers[k] = {w.coarse_alpha, w.coarse_alpha * w.ssao_weight};
            layers[k + 1] = {w.overlay_alpha, w.overlay_alpha};
            break;
        case Transition::ColorChange:
            layers[k] = {1.0 - w.color_mix, 1.0 - w.color_mix};
            layers[k + 1] = {w.color_mix, w.color_mix};
            break;
        case Transition::None:
            layers[k] = {1.0, 1.0};
            break;
    }
    return layers;
}

// ---------------------------------------------------------------------------
// Camera distance <-> scale

/// Reference viewing distances; per-row distances are geometric between d0 and d7.
struct CameraScaleConfig {
    double d0 = 12000.0;  // nm
    double d7 = 5.0;      // nm

    void check() const {
        if (!(d0 > d7 && d7 > 0.0) || !std::isfinite(d0)) throw std::invalid_argument("require d0 > d7 > 0");
    }

    double row_distance(std::size_t k) const noexcept {
        if (k == 0) return d0;
        if (k >= kScheduleRows - 1) return d7;
        return d0 * std::pow(d7 / d0, static_cast<double>(k) / kMaxScale);
    }
};

inline double scale_from_distance(double d, const CameraScaleConfig& cfg) {
    if (!(d > 0.0)) throw std::domain_error("camera distance must be positive");
    if (d >= cfg.d0) return 0.0;
    if (d <= cfg.d7) return kMaxScale;
    const double ld = std::log(d);
    std::size_t k = 0;
    while (k + 1 < kScheduleRows - 1 && d < cfg.row_distance(k + 1)) ++k;
    const double lk = std::log(cfg.row_distance(k));
    const double lk1 = std::log(cfg.row_distance(k + 1));
    const double s = static_cast<double>(k) + (lk - ld) / (lk - lk1);
    return std::clamp(s, 0.0, kMaxScale);
}

inline double distance_from_scale(double s, const CameraScaleConfig& cfg) {
    if (!(s >= 0.0 && s <= kMaxScale)) throw std::domain_error("scale s must lie in [0, 7]");
    const auto k = std::min(static_cast<std::size_t>(std::floor(s)), kScheduleRows - 2);
    const double lk = std::log(cfg.row_distance(k));
    const double lk1 = std::log(cfg.row_distance(k + 1));
    return std::exp(lk - (s - static_cast<double>(k)) * (lk - lk1));
}

/// Zoom speed in nm per wheel notch.
inline double camera_speed(double d, double c = 0.1) {
    if (!(d > 0.0)) throw std::domain_error("camera distance must be positive");
    return c * d;
}

/// Distance after `notches` wheel steps (positive zooms in). Each step moves by camera_speed.
inline double zoom_distance(double d, int notches, double c = 0.1) {
    for (int i = 0; i < notches; ++i) d -= camera_speed(d, c);
    for (int i = 0; i > notches; --i) d /= (1.0 - c);
    return d;
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_SCALE_STATE_HPP
