#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chromoscale/config.hpp"
#include "chromoscale/scale_state.hpp"

using namespace chromoscale;

TEST(Schedule, DefaultTableRows) {
    const auto s = default_schedule();
    EXPECT_NO_THROW(check_schedule(s));
    EXPECT_EQ(s[0].data_level, DataLevel::Chromosome);
    EXPECT_EQ(s[0].color_mode, ColorMode::Single);
    EXPECT_EQ(s[3].scope_mode, ScopeMode::FocusChromosome);
    EXPECT_EQ(s[4].data_level, DataLevel::Nucleotide);
    EXPECT_EQ(s[4].scope_mode, ScopeMode::FiberWindowWithLinks);
    EXPECT_EQ(s[4].transition_to_next, Transition::ColorChange);
    EXPECT_EQ(s[6].transition_to_next, Transition::ColorChange);
    EXPECT_EQ(s[7].color_mode, ColorMode::ByElement);
    EXPECT_EQ(s[7].transition_to_next, Transition::None);
}

TEST(Schedule, RejectsInvalidSchedules) {
    auto s = default_schedule();
    s.rows[3].data_level = DataLevel::Locus;
    EXPECT_THROW(check_schedule(s), std::invalid_argument);
    s = default_schedule();
    s.rows[7].transition_to_next = Transition::ColorChange;
    EXPECT_THROW(check_schedule(s), std::invalid_argument);
    s = default_schedule();
    s.rows[4].transition_to_next = Transition::VisualEmbedding;
    EXPECT_THROW(check_schedule(s), std::invalid_argument);
}

TEST(ScaleParam, DomainAndRow) {
    EXPECT_THROW((ScaleParam{7.5, 0}.check()), std::domain_error);
    EXPECT_THROW((ScaleParam{-0.1, 0}.check()), std::domain_error);
    EXPECT_THROW((ScaleParam{3, 0.95}.check()), std::domain_error);
    EXPECT_EQ((ScaleParam{7.0, 0}.row()), 7U);
    EXPECT_EQ((ScaleParam{6.99, 0}.row()), 6U);
    EXPECT_EQ((ScaleParam{3.2, 0.9}.row()), 4U);
    EXPECT_DOUBLE_EQ((ScaleParam{0.2, -0.5}.effective()), 0.0);
}

TEST(TransitionWeights, WorkedExamples) {
    const auto sched = default_schedule();
    auto w = transition_weights({0.5, 0}, sched);
    EXPECT_EQ(w.row, 0U);
    EXPECT_DOUBLE_EQ(w.ssao_weight, 0.0);
    EXPECT_NEAR(w.overlay_alpha, 0.15 / 0.35, 1e-12);  // 0.4286
    EXPECT_DOUBLE_EQ(w.coarse_alpha, 1.0);

    w = transition_weights({2.2, 0}, sched);
    EXPECT_NEAR(w.ssao_weight, 1.0 - 0.2 / 0.35, 1e-12);
    EXPECT_DOUBLE_EQ(w.overlay_alpha, 0.0);

    w = transition_weights({3.85, 0}, sched);
    EXPECT_NEAR(w.coarse_alpha, 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(w.overlay_alpha, 1.0);

    w = transition_weights({4.5, 0}, sched);  // color change row
    EXPECT_DOUBLE_EQ(w.ssao_weight, 1.0);
    EXPECT_NEAR(w.color_mix, 0.5, 1e-12);

    w = transition_weights({7.0, 0}, sched);
    EXPECT_EQ(w.row, 7U);
    EXPECT_DOUBLE_EQ(w.coarse_alpha, 1.0);
    EXPECT_DOUBLE_EQ(w.overlay_alpha, 0.0);
}

TEST(TransitionWeights, PureStateAtIntegers) {
    const auto sched = default_schedule();
    for (int k = 0; k <= 7; ++k) {
        const auto w = transition_weights({static_cast<double>(k), 0}, sched);
        EXPECT_EQ(w.row, static_cast<std::size_t>(k));
        EXPECT_DOUBLE_EQ(w.ssao_weight, 1.0);
        EXPECT_DOUBLE_EQ(w.coarse_alpha, 1.0);
        EXPECT_DOUBLE_EQ(w.overlay_alpha, 0.0);
        EXPECT_DOUBLE_EQ(w.color_mix, 0.0);
        const auto layers = layer_states({static_cast<double>(k), 0}, sched);
        for (int r = 0; r <= 7; ++r) EXPECT_DOUBLE_EQ(layers[r].alpha, r == k ? 1.0 : 0.0);
    }
}

TEST(TransitionWeights, WeightsStayInUnitIntervalAndMonotone) {
    const auto sched = default_schedule();
    std::mt19937_64 rng(3);
    for (int k = 0; k < 7; ++k) {
        double prev_overlay = -1.0;
        double prev_coarse = 2.0;
        for (int i = 0; i <= 1000; ++i) {
            const double s = k + i / 1000.0 * 0.999999;
            const auto w = transition_weights({s, 0}, sched);
            for (double v : {w.ssao_weight, w.coarse_alpha, w.overlay_alpha, w.color_mix}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
            EXPECT_GE(w.overlay_alpha, prev_overlay);
            EXPECT_LE(w.coarse_alpha, prev_coarse);
            prev_overlay = w.overlay_alpha;
            prev_coarse = w.coarse_alpha;
        }
    }
}

TEST(TransitionWeights, LayerStatesAreContinuousAcrossIntegers) {
    const auto sched = default_schedule();
    for (int k = 1; k <= 7; ++k) {
        const auto below = layer_states({k - 1e-9, 0}, sched);
        const auto at = layer_states({static_cast<double>(k), 0}, sched);
        for (int r = 0; r <= 7; ++r) {
            EXPECT_NEAR(below[r].alpha, at[r].alpha, 1e-7) << "k=" << k << " r=" << r;
            EXPECT_NEAR(below[r].shaded_alpha, at[r].shaded_alpha, 1e-7) << "k=" << k << " r=" << r;
        }
    }
}

TEST(CameraScale, RowDistancesAreGeometric) {
    const CameraScaleConfig cfg;
    const double ratio = cfg.row_distance(1) / cfg.row_distance(0);
    for (std::size_t k = 1; k < 7; ++k) {
        EXPECT_NEAR(cfg.row_distance(k + 1) / cfg.row_distance(k), ratio, 1e-12);
    }
    EXPECT_DOUBLE_EQ(cfg.row_distance(0), 12000.0);
    EXPECT_DOUBLE_EQ(cfg.row_distance(7), 5.0);
    // roughly half an order of magnitude per row
    EXPECT_NEAR(std::log10(1.0 / ratio), 0.48, 0.02);
}

TEST(CameraScale, InverseRoundTripAndClamping) {
    const CameraScaleConfig cfg;
    for (int i = 0; i <= 700; ++i) {
        const double s = i / 100.0;
        EXPECT_NEAR(scale_from_distance(distance_from_scale(s, cfg), cfg), s, 1e-9);
    }
    EXPECT_DOUBLE_EQ(scale_from_distance(1e6, cfg), 0.0);
    EXPECT_DOUBLE_EQ(scale_from_distance(1.0, cfg), 7.0);
    EXPECT_THROW(scale_from_distance(0.0, cfg), std::domain_error);
    EXPECT_THROW(distance_from_scale(7.1, cfg), std::domain_error);
    EXPECT_NEAR(distance_from_scale(0.0, cfg), 12000.0, 1e-9);
    EXPECT_NEAR(distance_from_scale(7.0, cfg), 5.0, 1e-12);
}

TEST(CameraScale, ZoomStepsAreProportionalToDistance) {
    EXPECT_DOUBLE_EQ(camera_speed(1000.0), 100.0);
    EXPECT_NEAR(zoom_distance(1000.0, 1), 900.0, 1e-9);
    EXPECT_NEAR(zoom_distance(1000.0, 3), 729.0, 1e-9);
    EXPECT_NEAR(zoom_distance(zoom_distance(1000.0, 4), -4), 1000.0, 1e-9);
    EXPECT_THROW(camera_speed(-1.0), std::domain_error);
}

TEST(Config, JsonRoundTripAndOverrides) {
    EngineConfig c;
    c.phases.flatten_end = 0.3;
    c.instance_cap = 1234;
    const auto back = config_from_json(config_to_json(c));
    EXPECT_DOUBLE_EQ(back.phases.flatten_end, 0.3);
    EXPECT_EQ(back.instance_cap, 1234U);
    EXPECT_EQ(back.schedule, default_schedule());

    const auto partial = config_from_json(nlohmann::json{{"camera", {{"d0", 20000.0}}}});
    EXPECT_DOUBLE_EQ(partial.camera.d0, 20000.0);
    EXPECT_DOUBLE_EQ(partial.camera.d7, 5.0);

    EXPECT_THROW(config_from_json(nlohmann::json{{"phases", {{"flatten_end", 0.8}}}}), std::invalid_argument);
    auto bad = config_to_json(c);
    bad["schedule"][2]["color_mode"] = "plaid";
    EXPECT_THROW(config_from_json(bad), std::invalid_argument);
}
