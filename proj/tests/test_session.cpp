#include <gtest/gtest.h>

#include <random>

#include "chromoscale/session.hpp"
#include "oracles.hpp"

using namespace chromoscale;
using nlohmann::json;

namespace {

std::shared_ptr<const GenomeDataset> dataset() {
    static const auto ds = std::make_shared<const GenomeDataset>(oracle::seed42());
    return ds;
}

struct SessionTest : ::testing::Test {
    Session session{dataset(), EngineConfig{}};

    std::vector<Event> send(const json& cmd) { return session.handle(cmd.dump()); }

    void expect_consistent() {
        EXPECT_LT(std::abs(scale_from_distance(session.camera().distance(), session.config().camera) -
                           session.scale().s),
                  1e-9);
    }
};

}  // namespace

TEST_F(SessionTest, StartsAtNucleusScale) {
    EXPECT_NEAR(session.scale().s, 0.0, 1e-9);
    EXPECT_EQ(session.focus().chromosome, 0U);
    EXPECT_EQ(session.frame().weights.row, 0U);
    expect_consistent();
    const auto info = session.session_info();
    EXPECT_EQ(info["counts"]["nucleosome"], 120);
    EXPECT_EQ(info["schedule"].size(), 8U);
}

TEST_F(SessionTest, HelloChecksVersion) {
    auto ev = send({{"type", "hello"}, {"format_version", 1}});
    ASSERT_EQ(ev.size(), 1U);
    EXPECT_EQ(ev[0].type(), "session_info");
    ev = send({{"type", "hello"}, {"format_version", 2}});
    ASSERT_EQ(ev.size(), 1U);
    EXPECT_EQ(ev[0].message["code"], "unsupported_version");
}

TEST_F(SessionTest, ZoomUsesCameraSpeed) {
    const Vec3 target = session.camera().target;
    auto ev = send({{"type", "set_camera"},
                    {"eye", {target.x, target.y, target.z + 1000.0}},
                    {"target", {target.x, target.y, target.z}}});
    ASSERT_EQ(ev.back().type(), "render_list");
    EXPECT_NEAR(session.camera().distance(), 1000.0, 1e-9);
    ev = send({{"type", "zoom"}, {"notches", 1}});
    ASSERT_EQ(ev.size(), 1U);
    EXPECT_EQ(ev[0].type(), "render_list");
    EXPECT_NEAR(session.camera().distance(), 900.0, 1e-9);
    EXPECT_NEAR(session.scale().s, scale_from_distance(900.0, {}), 1e-12);
    EXPECT_EQ(ev[0].message["byte_length"], ev[0].binary.size());
    EXPECT_EQ(ev[0].binary.size(), session.frame().stats.total * kInstanceBytes);
    expect_consistent();
}

TEST_F(SessionTest, MalformedAndUnknownCommandsLeaveStateUnchanged) {
    const auto camera = session.camera();
    const auto scale = session.scale();
    auto ev = session.handle("{not json");
    ASSERT_EQ(ev.size(), 1U);
    EXPECT_EQ(ev[0].message["code"], "malformed");
    ev = send({{"type", "teleport"}});
    EXPECT_EQ(ev[0].message["code"], "unknown_command");
    ev = send({{"type", "zoom"}, {"notches", "lots"}});
    EXPECT_EQ(ev[0].message["code"], "invalid_argument");
    ev = send({{"type", "set_focus_fiber"}, {"index", 24}});
    EXPECT_EQ(ev[0].type(), "error");
    ev = send({{"type", "set_scale_offset"}, {"offset", 0.95}});
    EXPECT_EQ(ev[0].type(), "error");
    ev = send({{"type", "set_camera"}, {"eye", {0, 0, 0}}, {"target", {0, 0, 0}}});
    EXPECT_EQ(ev[0].type(), "error");
    ev = send(json::array({1, 2}));
    EXPECT_EQ(ev[0].message["code"], "malformed");
    EXPECT_EQ(session.camera(), camera);
    EXPECT_EQ(session.scale().s, scale.s);
}

TEST_F(SessionTest, ScaleOffsetKeepsCamera) {
    const Vec3 t = session.camera().target;
    const double d = distance_from_scale(0.6, session.config().camera);
    send({{"type", "set_camera"}, {"eye", {t.x, t.y, t.z + d}}, {"target", {t.x, t.y, t.z}}});
    EXPECT_EQ(session.frame().weights.row, 0U);
    const auto camera = session.camera();
    const auto ev = send({{"type", "set_scale_offset"}, {"offset", 0.5}, {"id", 7}});
    ASSERT_EQ(ev.size(), 1U);
    EXPECT_EQ(ev[0].message["id"], 7);
    EXPECT_EQ(session.camera(), camera);
    EXPECT_EQ(session.frame().weights.row, 1U);
    EXPECT_DOUBLE_EQ(session.scale().offset, 0.5);
    EXPECT_EQ(ev[0].message["camera"], Session::camera_json(camera));
}

TEST_F(SessionTest, PickOnBackgroundKeepsFocus) {
    const auto focus = session.focus();
    const auto ev = send({{"type", "pick"}, {"x", 0}, {"y", 0}});
    ASSERT_EQ(ev.size(), 2U);
    EXPECT_EQ(ev[0].type(), "pick_result");
    EXPECT_FALSE(ev[0].message["hit"].get<bool>());
    EXPECT_EQ(ev[1].type(), "render_list");
    EXPECT_EQ(session.focus(), focus);
}

TEST_F(SessionTest, PickOnElementRefocuses) {
    const auto& ds = *dataset();
    send({{"type", "set_focus_fiber"}, {"index", 20}});
    // Project a fiber of chromosome 1 to the screen and click it.
    const auto cam = session.camera();
    for (int y = 0; y < cam.height; y += 4) {
        for (int x = 0; x < cam.width; x += 4) {
            const auto hit = pick(session.frame(), cam, x, y);
            if (!hit) continue;
            const Vec3 eye = cam.eye;
            const auto ev = send({{"type", "pick"}, {"x", x}, {"y", y}});
            ASSERT_EQ(ev[0].type(), "pick_result");
            ASSERT_TRUE(ev[0].message["hit"].get<bool>());
            EXPECT_EQ(ev[0].message["element"]["index"], hit->ref.index);
            const std::size_t chrom = *oracle::stored_lineage(ds, hit->ref.level, hit->ref.index)[0];
            EXPECT_EQ(session.focus().chromosome, chrom);
            EXPECT_EQ(session.camera().eye, eye);  // eye stays, camera retargets
            EXPECT_EQ(session.camera().target, session.focus().focus_point);
            expect_consistent();
            return;
        }
    }
    FAIL() << "no pickable element on screen";
}

TEST_F(SessionTest, FocusChangeRetargetsFromFixedEye) {
    const Vec3 eye = session.camera().eye;
    send({{"type", "set_focus_chromosome"}, {"index", 1}});
    EXPECT_EQ(session.focus().chromosome, 1U);
    EXPECT_EQ(session.camera().eye, eye);
    EXPECT_EQ(session.camera().target, dataset()->position(DataLevel::Fiber, 17));
    expect_consistent();
    send({{"type", "set_focus_fiber"}, {"index", 3}});
    EXPECT_EQ(session.focus().fiber_window, (IndexRange{1, 6}));
    expect_consistent();
}

TEST_F(SessionTest, OrbitPreservesDistance) {
    const double d = session.camera().distance();
    send({{"type", "orbit"}, {"yaw_deg", 30.0}, {"pitch_deg", -20.0}});
    EXPECT_NEAR(session.camera().distance(), d, 1e-9 * d);
    EXPECT_NEAR(dot(normalized(session.camera().target - session.camera().eye), session.camera().up), 0.0, 1e-9);
    for (int k = 0; k < 20; ++k) send({{"type", "orbit"}, {"yaw_deg", 0.0}, {"pitch_deg", 25.0}});
    EXPECT_NEAR(session.camera().distance(), d, 1e-9 * d);
    expect_consistent();
}

TEST_F(SessionTest, InstanceCapRejectsWithoutMutation) {
    EngineConfig cfg;
    cfg.instance_cap = 5000;
    Session small(dataset(), cfg);
    const auto camera = small.camera();
    const auto ev = small.handle(json{{"type", "set_scale_offset"}, {"offset", 0.0}}.dump());
    EXPECT_EQ(ev.back().type(), "render_list");
    const Vec3 t = camera.target;
    const auto err = small.handle(
        json{{"type", "set_camera"}, {"eye", {t.x, t.y, t.z + 5.0}}, {"target", {t.x, t.y, t.z}}}.dump());
    ASSERT_EQ(err.size(), 1U);
    EXPECT_EQ(err[0].message["code"], "instance_cap");
    EXPECT_EQ(small.camera(), camera);
}

TEST_F(SessionTest, RandomCommandsKeepScaleConsistentAndReplayDeterministically) {
    std::mt19937_64 rng(12);
    std::vector<std::string> log;
    for (int i = 0; i < 60; ++i) {
        json cmd;
        switch (rng() % 6) {
            case 0: cmd = {{"type", "zoom"}, {"notches", static_cast<int>(rng() % 13) - 3}}; break;
            case 1: cmd = {{"type", "orbit"}, {"yaw_deg", static_cast<double>(rng() % 90)}, {"pitch_deg", 10.0}}; break;
            case 2: cmd = {{"type", "pick"}, {"x", rng() % 800}, {"y", rng() % 600}}; break;
            case 3: cmd = {{"type", "set_focus_fiber"}, {"index", rng() % 24}}; break;
            case 4: cmd = {{"type", "set_scale_offset"}, {"offset", (static_cast<int>(rng() % 19) - 9) / 10.0}}; break;
            default: cmd = {{"type", "request_frame"}}; break;
        }
        log.push_back(cmd.dump());
    }
    auto replay = [&] {
        Session s(dataset(), EngineConfig{});
        std::vector<std::vector<std::uint8_t>> payloads;
        for (const auto& line : log) {
            for (auto& ev : s.handle(line)) {
                if (ev.has_binary()) payloads.push_back(ev.binary);
            }
            EXPECT_LT(std::abs(scale_from_distance(s.camera().distance(), s.config().camera) - s.scale().s), 1e-9);
        }
        return payloads;
    };
    const auto a = replay();
    const auto b = replay();
    EXPECT_EQ(a, b);
    EXPECT_GE(a.size(), 50U);
}
