#ifndef CHROMOSCALE_CONFIG_HPP
#define CHROMOSCALE_CONFIG_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "chromoscale/scale_state.hpp"

namespace chromoscale {

/// Tunables shared by assembly, the session and the CLI. Every field has a default; a JSON
/// config file may override any subset.
struct EngineConfig {
    ScaleSchedule schedule = default_schedule();
    PhaseBreakpoints phases{};
    CameraScaleConfig camera{};
    double zoom_speed = 0.1;
    double fov_deg = 40.0;
    double end_fade_fraction = 0.1;
    double highlight = 1.15;
    std::size_t instance_cap = 2'000'000;

    void check() const {
        check_schedule(schedule);
        phases.check();
        camera.check();
        if (!(zoom_speed > 0.0 && zoom_speed < 1.0)) throw std::invalid_argument("zoom_speed must be in (0,1)");
        if (!(fov_deg > 0.0 && fov_deg < 120.0)) throw std::invalid_argument("fov_deg must be in (0,120)");
        if (!(end_fade_fraction >= 0.0 && end_fade_fraction <= 0.5)) {
            throw std::invalid_argument("end_fade_fraction must be in [0,0.5]");
        }
        if (!(highlight >= 1.0)) throw std::invalid_argument("highlight must be >= 1");
        if (instance_cap == 0) throw std::invalid_argument("instance_cap must be positive");
    }
};

inline nlohmann::json schedule_to_json(const ScaleSchedule& schedule) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : schedule.rows) {
        rows.push_back({{"data_level", to_string(r.data_level)},
                        {"color_mode", to_string(r.color_mode)},
                        {"scope_mode", to_string(r.scope_mode)},
                        {"semantic_name", r.semantic_name},
                        {"transition", to_string(r.transition_to_next)}});
    }
    return rows;
}

inline ScaleSchedule schedule_from_json(const nlohmann::json& rows) {
    if (!rows.is_array() || rows.size() != kScheduleRows) {
        throw std::invalid_argument("schedule must be an array of 8 rows");
    }
    constexpr std::array colors{ColorMode::Single, ColorMode::ByChromosome, ColorMode::ByNucleotide,
                                ColorMode::ByElement};
    constexpr std::array scopes{ScopeMode::AllChromosomes, ScopeMode::FocusChromosome,
                                ScopeMode::FiberWindowWithLinks, ScopeMode::FiberWindow};
    constexpr std::array transitions{Transition::VisualEmbedding, Transition::ColorChange, Transition::None};
    ScaleSchedule schedule;
    for (std::size_t k = 0; k < kScheduleRows; ++k) {
        const auto& j = rows[k];
        auto field = [&](const char* name) { return j.at(name).get<std::string>(); };
        auto bad = [&](const char* name) {
            return std::invalid_argument("schedule row " + std::to_string(k) + ": bad " + name);
        };
        const auto level = parse_level(field("data_level"));
        const auto color = parse_enum(field("color_mode"), colors);
        const auto scope = parse_enum(field("scope_mode"), scopes);
        const auto transition = parse_enum(field("transition"), transitions);
        if (!level) throw bad("data_level");
        if (!color) throw bad("color_mode");
        if (!scope) throw bad("scope_mode");
        if (!transition) throw bad("transition");
        schedule.rows[k] = {*level, *color, *scope, j.value("semantic_name", std::string{}), *transition};
    }
    check_schedule(schedule);
    return schedule;
}

inline nlohmann::json config_to_json(const EngineConfig& c) {
    return {{"schedule", schedule_to_json(c.schedule)},
            {"phases",
             {{"flatten_end", c.phases.flatten_end},
              {"overlay_end", c.phases.overlay_end},
              {"color_begin", c.phases.color_begin},
              {"color_end", c.phases.color_end}}},
            {"camera", {{"d0", c.camera.d0}, {"d7", c.camera.d7}, {"zoom_speed", c.zoom_speed}, {"fov_deg", c.fov_deg}}},
            {"scope", {{"end_fade_fraction", c.end_fade_fraction}, {"highlight", c.highlight}}},
            {"render", {{"instance_cap", c.instance_cap}}}};
}

inline EngineConfig config_from_json(const nlohmann::json& j) {
    EngineConfig c;
    try {
        if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
        if (j.contains("phases")) {
            const auto& p = j.at("phases");
            c.phases.flatten_end = p.value("flatten_end", c.phases.flatten_end);
            c.phases.overlay_end = p.value("overlay_end", c.phases.overlay_end);
            c.phases.color_begin = p.value("color_begin", c.phases.color_begin);
            c.phases.color_end = p.value("color_end", c.phases.color_end);
        }
        if (j.contains("camera")) {
            const auto& cam = j.at("camera");
            c.camera.d0 = cam.value("d0", c.camera.d0);
            c.camera.d7 = cam.value("d7", c.camera.d7);
            c.zoom_speed = cam.value("zoom_speed", c.zoom_speed);
            c.fov_deg = cam.value("fov_deg", c.fov_deg);
        }
        if (j.contains("scope")) {
            const auto& s = j.at("scope");
            c.end_fade_fraction = s.value("end_fade_fraction", c.end_fade_fraction);
            c.highlight = s.value("highlight", c.highlight);
        }
        if (j.contains("render")) c.instance_cap = j.at("render").value("instance_cap", c.instance_cap);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.check();
    return c;
}

inline EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_CONFIG_HPP
