#ifndef CHROMOSCALE_SESSION_HPP
#define CHROMOSCALE_SESSION_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chromoscale/config.hpp"
#include "chromoscale/core_model.hpp"
#include "chromoscale/headless_render.hpp"
#include "chromoscale/render_list.hpp"
#include "chromoscale/scale_state.hpp"
#include "chromoscale/scope_focus.hpp"

namespace chromoscale {

inline constexpr int kProtocolVersion = 1;

/// One server -> client message. render_list events carry the instance bytes, which go out
/// as a binary frame right after the JSON text frame.
struct Event {
    nlohmann::json message;
    std::vector<std::uint8_t> binary;

    std::string type() const { return message.value("type", std::string{}); }
    bool has_binary() const noexcept { return message.value("type", std::string{}) == "render_list"; }
};

/// Rejected command; carries the error code reported to the client.
class CommandError : public std::runtime_error {
public:
    CommandError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline Vec3 json_vec(const nlohmann::json& j, const char* name) {
    if (!j.contains(name)) throw CommandError("invalid_argument", std::string("missing field ") + name);
    const auto& a = j.at(name);
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number()) {
        throw CommandError("invalid_argument", std::string(name) + " must be an array of 3 numbers");
    }
    const Vec3 v{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
    if (!is_finite(v)) throw CommandError("invalid_argument", std::string(name) + " must be finite");
    return v;
}

inline double json_number(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || !j.at(name).is_number()) {
        throw CommandError("invalid_argument", std::string("field ") + name + " must be a number");
    }
    const double v = j.at(name).get<double>();
    if (!std::isfinite(v)) throw CommandError("invalid_argument", std::string("field ") + name + " must be finite");
    return v;
}

inline std::int64_t json_integer(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || !j.at(name).is_number_integer()) {
        throw CommandError("invalid_argument", std::string("field ") + name + " must be an integer");
    }
    return j.at(name).get<std::int64_t>();
}

// Rodrigues rotation of v about unit axis k.
inline Vec3 rotate_about(const Vec3& v, const Vec3& k, double radians) {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return v * c + cross(k, v) * s + k * (dot(k, v) * (1.0 - c));
}

}  // namespace detail

/// Interactive state of one client: camera, scale, focus and the last assembled frame.
/// Commands are applied transactionally; a rejected command leaves the session untouched.
class Session {
public:
    static constexpr int kDefaultWidth = 800;
    static constexpr int kDefaultHeight = 600;

    Session(std::shared_ptr<const GenomeDataset> dataset, EngineConfig config)
        : ds_(std::move(dataset)), cfg_(std::move(config)) {
        if (!ds_) throw std::invalid_argument("session needs a dataset");
        cfg_.check();
        State st;
        st.focus = default_focus(*ds_);
        st.camera = camera_at_scale(st.focus.focus_point, 0.0, cfg_.camera, cfg_.fov_deg, kDefaultWidth, kDefaultHeight);
        st.scale = {scale_from_distance(st.camera.distance(), cfg_.camera), 0.0};
        st.frame = assemble(*ds_, st.scale, st.focus, cfg_);
        state_ = std::move(st);
    }

    const GenomeDataset& dataset() const noexcept { return *ds_; }
    const EngineConfig& config() const noexcept { return cfg_; }
    const CameraPose& camera() const noexcept { return state_.camera; }
    const ScaleParam& scale() const noexcept { return state_.scale; }
    const FocusState& focus() const noexcept { return state_.focus; }
    const RenderList& frame() const noexcept { return state_.frame; }
    std::uint64_t frames_sent() const noexcept { return seq_; }

    nlohmann::json session_info() const {
        nlohmann::json counts;
        for (auto level : {DataLevel::Chromosome, DataLevel::Locus, DataLevel::Fiber, DataLevel::Nucleosome,
                           DataLevel::Nucleotide, DataLevel::Atom}) {
            counts[std::string(to_string(level))] = ds_->count(level);
        }
        return {{"type", "session_info"},
                {"format_version", kProtocolVersion},
                {"counts", counts},
                {"schedule", schedule_to_json(cfg_.schedule)},
                {"instance_bytes", kInstanceBytes},
                {"camera", camera_json(state_.camera)},
                {"focus", focus_json(state_.focus)},
                {"scale", scale_json(state_.frame)}};
    }

    /// Parses one text frame and applies it.
    std::vector<Event> handle(std::string_view text) {
        nlohmann::json cmd;
        try {
            cmd = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            return {error_event("malformed", std::string("invalid JSON: ") + e.what(), nullptr)};
        }
        return handle_command(cmd);
    }

    std::vector<Event> handle_command(const nlohmann::json& cmd) {
        if (!cmd.is_object() || !cmd.contains("type") || !cmd.at("type").is_string()) {
            return {error_event("malformed", "command must be an object with a string \"type\"", cmd)};
        }
        std::vector<Event> events;
        try {
            events = apply(cmd.at("type").get<std::string>(), cmd);
        } catch (const CommandError& e) {
            return {error_event(e.code(), e.what(), cmd)};
        } catch (const InstanceCapError& e) {
            return {error_event("instance_cap", e.what(), cmd)};
        } catch (const std::exception& e) {
            return {error_event("invalid_argument", e.what(), cmd)};
        }
        if (cmd.contains("id")) {
            for (auto& ev : events) ev.message["id"] = cmd.at("id");
        }
        return events;
    }

    static nlohmann::json camera_json(const CameraPose& c) {
        return {{"eye", detail::vec_json(c.eye)},
                {"target", detail::vec_json(c.target)},
                {"up", detail::vec_json(c.up)},
                {"fov_deg", c.fov_deg},
                {"width", c.width},
                {"height", c.height},
                {"distance", c.distance()}};
    }

    static nlohmann::json focus_json(const FocusState& f) {
        return {{"chromosome", f.chromosome},
                {"fiber", f.focus_fiber},
                {"fiber_window", {f.fiber_window.begin, f.fiber_window.end}},
                {"point", detail::vec_json(f.focus_point)}};
    }

    static nlohmann::json scale_json(const RenderList& l) {
        return {{"s", l.scale.s},
                {"offset", l.scale.offset},
                {"effective", l.scale.effective()},
                {"row", l.weights.row},
                {"t", l.weights.t},
                {"ssao_weight", l.weights.ssao_weight},
                {"coarse_alpha", l.weights.coarse_alpha},
                {"overlay_alpha", l.weights.overlay_alpha},
                {"color_mix", l.weights.color_mix}};
    }

private:
    struct State {
        CameraPose camera;
        ScaleParam scale;
        FocusState focus;
        RenderList frame;
    };

    std::vector<Event> apply(const std::string& type, const nlohmann::json& cmd) {
        if (type == "hello") {
            const auto v = detail::json_integer(cmd, "format_version");
            if (v != kProtocolVersion) {
                throw CommandError("unsupported_version", "server speaks format_version " +
                                                              std::to_string(kProtocolVersion) + ", got " +
                                                              std::to_string(v));
            }
            return {Event{session_info(), {}}};
        }
        if (type == "request_frame") return {render_event()};

        State next = state_;
        std::optional<Event> extra;
        if (type == "set_camera") {
            CameraPose cam = next.camera;
            cam.eye = detail::json_vec(cmd, "eye");
            cam.target = detail::json_vec(cmd, "target");
            if (cmd.contains("up")) cam.up = detail::json_vec(cmd, "up");
            if (cmd.contains("width")) cam.width = static_cast<int>(detail::json_integer(cmd, "width"));
            if (cmd.contains("height")) cam.height = static_cast<int>(detail::json_integer(cmd, "height"));
            check_camera(cam);
            next.camera = cam;
        } else if (type == "orbit") {
            const double yaw = detail::json_number(cmd, "yaw_deg") * std::numbers::pi / 180.0;
            const double pitch = detail::json_number(cmd, "pitch_deg") * std::numbers::pi / 180.0;
            CameraPose cam = next.camera;
            const ViewRays basis(cam);
            Vec3 offset = cam.eye - cam.target;
            const Vec3 up = basis.up();
            offset = detail::rotate_about(offset, up, yaw);
            const Vec3 right = detail::rotate_about(basis.right(), up, yaw);
            offset = detail::rotate_about(offset, right, pitch);
            cam.up = normalized(detail::rotate_about(up, right, pitch));
            cam.eye = cam.target + offset;
            check_camera(cam);
            next.camera = cam;
        } else if (type == "zoom") {
            const auto notches = detail::json_integer(cmd, "notches");
            if (notches < -1000 || notches > 1000) throw CommandError("invalid_argument", "notches out of range");
            const double d = zoom_distance(next.camera.distance(), static_cast<int>(notches), cfg_.zoom_speed);
            if (!(d > 0.0) || !std::isfinite(d)) throw CommandError("invalid_argument", "zoom leaves valid range");
            next.camera.eye = next.camera.target + normalized(next.camera.eye - next.camera.target) * d;
            check_camera(next.camera);
        } else if (type == "pick") {
            const auto x = detail::json_integer(cmd, "x");
            const auto y = detail::json_integer(cmd, "y");
            if (x < 0 || y < 0 || x >= next.camera.width || y >= next.camera.height) {
                throw CommandError("invalid_argument", "pick position outside the viewport");
            }
            const auto hit = pick(next.frame, next.camera, static_cast<int>(x), static_cast<int>(y));
            nlohmann::json result{{"type", "pick_result"}, {"hit", hit.has_value()}};
            if (hit) {
                result["element"] = {{"level", std::string(to_string(hit->ref.level))},
                                     {"index", hit->ref.index},
                                     {"slot", hit->ref.slot},
                                     {"atom", hit->ref.atom},
                                     {"link", hit->ref.is_link()},
                                     {"role", std::string(to_string(hit->role))},
                                     {"depth", hit->depth}};
                retarget(next, focus_for_hit(hit->ref));
            }
            result["focus"] = focus_json(next.focus);
            extra = Event{std::move(result), {}};
        } else if (type == "set_focus_chromosome") {
            retarget(next, set_focus_chromosome(*ds_, checked_index(cmd, DataLevel::Chromosome)));
        } else if (type == "set_focus_fiber") {
            retarget(next, set_focus_fiber(*ds_, checked_index(cmd, DataLevel::Fiber)));
        } else if (type == "set_scale_offset") {
            const double offset = detail::json_number(cmd, "offset");
            if (!(offset >= -kMaxScaleOffset && offset <= kMaxScaleOffset)) {
                throw CommandError("invalid_argument", "offset must lie in [-0.9, 0.9]");
            }
            next.scale.offset = offset;
        } else {
            throw CommandError("unknown_command", "unknown command type \"" + type + "\"");
        }

        next.scale.s = scale_from_distance(next.camera.distance(), cfg_.camera);
        next.frame = assemble(*ds_, next.scale, next.focus, cfg_);
        state_ = std::move(next);
        std::vector<Event> events;
        if (extra) events.push_back(std::move(*extra));
        events.push_back(render_event());
        return events;
    }

    static void check_camera(const CameraPose& cam) {
        if (cam.width < 1 || cam.height < 1 || cam.width > 16384 || cam.height > 16384) {
            throw CommandError("invalid_argument", "viewport size out of range");
        }
        try {
            cam.check();
        } catch (const std::invalid_argument& e) {
            throw CommandError("invalid_argument", e.what());
        }
    }

    std::size_t checked_index(const nlohmann::json& cmd, DataLevel level) const {
        const auto i = detail::json_integer(cmd, "index");
        if (i < 0 || static_cast<std::uint64_t>(i) >= ds_->count(level)) {
            throw CommandError("invalid_argument", "no " + std::string(to_string(level)) + " with index " +
                                                       std::to_string(i));
        }
        return static_cast<std::size_t>(i);
    }

    FocusState focus_for_hit(const ElementRef& ref) const {
        switch (ref.level) {
            case DataLevel::Chromosome: return set_focus_chromosome(*ds_, ref.index);
            case DataLevel::Locus:
                return set_focus_chromosome(*ds_, ds_->parent_of(DataLevel::Locus, ref.index));
            case DataLevel::Fiber: return set_focus_fiber(*ds_, ref.index);
            default:  // nucleosome, nucleotide, atom and linker refs all index a nucleosome
                return set_focus_fiber(*ds_, ds_->parent_of(DataLevel::Nucleosome, ref.index));
        }
    }

    // The eye stays put and the camera turns to the new focus, so distance and scale follow.
    static void retarget(State& st, const FocusState& focus) {
        st.focus = focus;
        if (focus.focus_point == st.camera.eye) return;
        CameraPose cam = st.camera;
        cam.target = focus.focus_point;
        if (norm(cross(cam.target - cam.eye, cam.up)) < 1e-9 * cam.distance()) {
            cam.up = std::abs(cam.up.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        }
        st.camera = cam;
    }

    Event render_event() {
        const RenderList& l = state_.frame;
        nlohmann::json batches = nlohmann::json::array();
        std::size_t first = 0;
        for (const auto& b : l.batches) {
            batches.push_back({{"role", std::string(to_string(b.role))},
                               {"role_code", static_cast<int>(b.role)},
                               {"draw_order", b.draw_order},
                               {"first", first},
                               {"count", b.instances.size()}});
            first += b.instances.size();
        }
        Event ev;
        ev.binary = encode_instances(l);
        ev.message = {{"type", "render_list"},
                      {"seq", ++seq_},
                      {"batches", batches},
                      {"stats",
                       {{"total", l.stats.total},
                        {"coarse", l.stats.coarse},
                        {"overlay", l.stats.overlay},
                        {"links", l.stats.links}}},
                      {"scale", scale_json(l)},
                      {"camera", camera_json(state_.camera)},
                      {"focus", focus_json(state_.focus)},
                      {"instance_bytes", kInstanceBytes},
                      {"byte_length", ev.binary.size()}};
        return ev;
    }

    static Event error_event(const std::string& code, const std::string& message, const nlohmann::json& cmd) {
        nlohmann::json m{{"type", "error"}, {"code", code}, {"message", message}};
        if (cmd.is_object()) {
            if (cmd.contains("type")) m["command"] = cmd.at("type");
            if (cmd.contains("id")) m["id"] = cmd.at("id");
        }
        return {std::move(m), {}};
    }

    std::shared_ptr<const GenomeDataset> ds_;
    EngineConfig cfg_;
    State state_;
    std::uint64_t seq_ = 0;
};

}  // namespace chromoscale

#endif  // CHROMOSCALE_SESSION_HPP
