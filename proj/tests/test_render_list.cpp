#include <gtest/gtest.h>

#include <cstring>
#include <set>

#include "chromoscale/render_list.hpp"
#include "oracles.hpp"

using namespace chromoscale;

namespace {

struct Fixture : ::testing::Test {
    GenomeDataset ds = oracle::seed42();
    FocusState focus = set_focus_fiber(ds, 6);
    EngineConfig cfg;

    RenderList at(double s, double offset = 0.0) { return assemble(ds, {s, offset}, focus, cfg); }
};

std::size_t count_level(const RenderList& l, DataLevel level, bool links) {
    std::size_t n = 0;
    for (const auto& b : l.batches) {
        for (const auto& i : b.instances) n += i.ref.level == level && i.ref.is_link() == links;
    }
    return n;
}

}  // namespace

using RenderListTest = Fixture;

TEST_F(RenderListTest, NucleusRowIsOneShadedBatch) {
    const auto l = at(0.0);
    ASSERT_EQ(l.batches.size(), 1U);
    EXPECT_EQ(l.batches[0].role, BatchRole::CoarseShaded);
    ASSERT_EQ(l.batches[0].instances.size(), 2U);
    for (const auto& i : l.batches[0].instances) {
        // the focus chromosome is drawn lighter
        EXPECT_EQ(i.color, i.ref.index == focus.chromosome ? tint(kNucleusColor, 1.15) : kNucleusColor);
        EXPECT_FLOAT_EQ(i.ssao_weight, 1.0F);
        EXPECT_FLOAT_EQ(i.alpha, 1.0F);
        EXPECT_FLOAT_EQ(i.radius, static_cast<float>(0.4 * ds.spacing(DataLevel::Chromosome)));
    }
}

TEST_F(RenderListTest, EmbeddingMidTransition) {
    const auto l = at(0.5);
    ASSERT_EQ(l.batches.size(), 2U);
    EXPECT_EQ(l.batches[0].role, BatchRole::CoarseFlat);
    EXPECT_EQ(l.batches[1].role, BatchRole::OverlayDetail);
    EXPECT_LT(l.batches[0].draw_order, l.batches[1].draw_order);
    EXPECT_EQ(l.batches[1].instances.size(), 6U);
    for (const auto& i : l.batches[1].instances) {
        EXPECT_NEAR(i.alpha, 0.15 / 0.35, 1e-6);
        EXPECT_EQ(i.ref.level, DataLevel::Locus);
    }
    EXPECT_EQ(l.stats.total, 8U);
}

TEST_F(RenderListTest, TemplateExpansionCounts) {
    // 5 window fibers x 5 nucleosomes x 292 nucleotides; atoms x 35
    for (double s : {4.0, 4.5, 5.0}) {
        EXPECT_EQ(count_level(at(s), DataLevel::Nucleotide, false), 5U * 5U * 292U) << s;
    }
    for (double s : {6.0, 6.5, 7.0}) {
        EXPECT_EQ(count_level(at(s), DataLevel::Atom, false), 5U * 5U * 292U * 35U) << s;
    }
    EXPECT_EQ(count_level(at(5.5), DataLevel::Atom, false), 5U * 5U * 292U * 35U);
    EXPECT_EQ(count_level(at(5.5), DataLevel::Nucleotide, false), 5U * 5U * 292U);
}

TEST_F(RenderListTest, LinksOnlyOnTheLinkedRow) {
    EXPECT_GT(count_level(at(4.0), DataLevel::Nucleotide, true), 0U);
    EXPECT_GT(count_level(at(3.5), DataLevel::Nucleotide, true), 0U);
    EXPECT_EQ(count_level(at(3.2), DataLevel::Nucleotide, true), 0U);
    EXPECT_EQ(count_level(at(5.0), DataLevel::Nucleotide, true), 0U);
    EXPECT_EQ(count_level(at(4.9), DataLevel::Nucleotide, true), 0U);  // fully faded into nucleotide colors
    for (const auto& b : at(4.0).batches) {
        if (b.role != BatchRole::Links) continue;
        for (const auto& i : b.instances) {
            EXPECT_GT(i.alpha, 0.0F);
            EXPECT_LE(i.alpha, 1.0F);
        }
    }
}

TEST_F(RenderListTest, ColorChangeMixesPalettes) {
    const auto l = at(4.5);
    ASSERT_GE(l.batches.size(), 1U);
    const auto& inst = l.batches[0].instances.front();
    ASSERT_EQ(inst.ref.level, DataLevel::Nucleotide);
    const Rgba8 from = chromosome_color(focus.chromosome);
    const Rgba8 to = base_color(pseudo_base(inst.ref.index, inst.ref.slot));
    EXPECT_EQ(inst.color, mix(from, to, 0.5));
    const auto pure = at(5.0);
    const auto& p = pure.batches[0].instances.front();
    EXPECT_EQ(p.color, base_color(pseudo_base(p.ref.index, p.ref.slot)));
}

TEST_F(RenderListTest, OverlayInstancesDescendFromVisibleCoarseElements) {
    for (int i = 0; i <= 700; i += 5) {
        const double s = i / 100.0;
        const auto l = at(s);
        const auto w = l.weights;
        std::set<std::pair<DataLevel, std::size_t>> coarse;
        DataLevel coarse_level = DataLevel::Chromosome;
        for (const auto& b : l.batches) {
            if (!is_coarse(b.role)) continue;
            for (const auto& inst : b.instances) {
                if (inst.alpha <= 0.0F) continue;
                coarse_level = inst.ref.level;
                const DataLevel stored = is_stored(inst.ref.level) ? inst.ref.level : DataLevel::Nucleosome;
                coarse.insert({stored, inst.ref.index});
            }
        }
        for (const auto& b : l.batches) {
            if (b.draw_order < 2) continue;
            for (const auto& inst : b.instances) {
                const DataLevel stored = is_stored(coarse_level) ? coarse_level : DataLevel::Nucleosome;
                const std::size_t parent = oracle::stored_index_at(ds, inst.ref, stored);
                ASSERT_TRUE(coarse.contains({stored, parent})) << "s=" << s << " row " << w.row;
            }
        }
    }
}

TEST_F(RenderListTest, DrawOrderAndDeterminism) {
    for (double s : {0.0, 0.6, 2.5, 3.5, 3.9, 4.3, 6.2}) {
        const auto l = at(s);
        for (std::size_t b = 1; b < l.batches.size(); ++b) {
            EXPECT_LT(l.batches[b - 1].draw_order, l.batches[b].draw_order);
        }
        bool seen_overlay = false;
        for (const auto& b : l.batches) {
            if (b.role == BatchRole::OverlayDetail) seen_overlay = true;
            EXPECT_FALSE(seen_overlay && is_coarse(b.role));
        }
        EXPECT_EQ(l, at(s));
        std::size_t total = 0;
        for (const auto& b : l.batches) total += b.instances.size();
        EXPECT_EQ(total, l.stats.total);
    }
}

TEST_F(RenderListTest, ScaleOffsetShiftsRow) {
    const auto l = at(3.2, 0.9);
    EXPECT_EQ(l.weights.row, 4U);
    EXPECT_EQ(l.batches[0].instances.front().ref.level, DataLevel::Nucleotide);
    EXPECT_THROW(at(3.0, 1.0), std::domain_error);
    EXPECT_THROW(at(7.5), std::domain_error);
}

TEST_F(RenderListTest, InstanceCapNamesRow) {
    cfg.instance_cap = 10'000;
    EXPECT_NO_THROW(at(1.0));
    try {
        at(6.0);
        FAIL() << "expected InstanceCapError";
    } catch (const InstanceCapError& e) {
        EXPECT_EQ(e.row(), 6U);
        EXPECT_NE(std::string(e.what()).find("row 6"), std::string::npos);
    }
}

TEST_F(RenderListTest, FocusTintHighlightsFocusChromosome) {
    const auto l = at(1.0);
    const Rgba8 base0 = chromosome_color(0);
    const Rgba8 base1 = chromosome_color(1);
    for (const auto& i : l.batches[0].instances) {
        const auto c = *ancestors(ds, {DataLevel::Locus, i.ref.index}).chromosome;
        EXPECT_EQ(i.color, c == 0 ? tint(base0, 1.15) : base1);
    }
}

TEST(Colors, Palettes) {
    EXPECT_EQ(chromosome_color(0), hsl_to_rgb(0.0, 0.55, 0.55));
    EXPECT_NEAR(chromosome_hue(3), std::fmod(3 * 137.508, 360.0), 1e-12);
    EXPECT_EQ(hsl_to_rgb(120.0, 1.0, 0.5), (Rgba8{0, 255, 0, 255}));
    EXPECT_EQ(hsl_to_rgb(0.0, 0.0, 1.0), (Rgba8{255, 255, 255, 255}));
    EXPECT_EQ(cpk_color(Element::O), (Rgba8{255, 13, 13, 255}));
    EXPECT_EQ(base_color(Base::A), (Rgba8{46, 160, 67, 255}));
    for (std::size_t n = 0; n < 20; ++n) {
        for (std::size_t slot = 0; slot < 146; ++slot) {
            const auto a = static_cast<int>(pseudo_base(n, slot));
            const auto b = static_cast<int>(pseudo_base(n, NucleotideTemplate::partner(slot)));
            EXPECT_EQ(a + b, 3);  // A-T, C-G complement
        }
    }
    EXPECT_EQ(mix({0, 0, 0, 255}, {200, 100, 50, 255}, 0.5), (Rgba8{100, 50, 25, 255}));
    EXPECT_EQ(tint({100, 250, 0, 255}, 1.15), (Rgba8{115, 255, 0, 255}));
}

TEST(Radii, PerLevel) {
    const std::array<double, 4> stats{1000, 200, 40, 10};
    EXPECT_DOUBLE_EQ(element_radius(DataLevel::Fiber, stats), 16.0);
    EXPECT_DOUBLE_EQ(element_radius(DataLevel::Nucleotide, stats), 1.0);
    EXPECT_DOUBLE_EQ(element_radius(DataLevel::Atom, stats, Element::P), 0.18);
    EXPECT_DOUBLE_EQ(element_radius(DataLevel::Atom, stats, Element::Other), 0.06);
}

TEST(Wire, LayoutIsLittleEndian24Bytes) {
    Instance in;
    in.position = {1.0F, -2.0F, 0.5F};
    in.radius = 3.0F;
    in.color = {10, 20, 30, 255};
    in.alpha = 0.5F;
    in.ssao_weight = 1.0F;
    std::array<std::uint8_t, 24> buf{};
    encode_instance(in, BatchRole::Links, buf.data());
    // 1.0f = 0x3F800000
    EXPECT_EQ(buf[0], 0x00);
    EXPECT_EQ(buf[2], 0x80);
    EXPECT_EQ(buf[3], 0x3F);
    // -2.0f = 0xC0000000
    EXPECT_EQ(buf[7], 0xC0);
    EXPECT_EQ(buf[16], 10);
    EXPECT_EQ(buf[18], 30);
    EXPECT_EQ(buf[19], 128);  // round(0.5 * 255)
    EXPECT_EQ(buf[20], 255);
    EXPECT_EQ(buf[21], 3);
    EXPECT_EQ(buf[22], 0);
    EXPECT_EQ(buf[23], 0);
}

TEST_F(RenderListTest, WireRoundTrip) {
    for (double s : {0.5, 3.5, 4.0}) {
        const auto l = at(s);
        const auto bytes = encode_instances(l);
        ASSERT_EQ(bytes.size(), l.stats.total * kInstanceBytes);
        const auto wire = decode_instances(bytes);
        std::size_t k = 0;
        for (const auto& b : l.batches) {
            for (const auto& i : b.instances) {
                const auto& w = wire[k++];
                EXPECT_EQ(w.position, i.position);
                EXPECT_EQ(w.radius, i.radius);
                EXPECT_EQ(w.color.r, i.color.r);
                EXPECT_EQ(w.color.a, static_cast<std::uint8_t>(std::lround(i.alpha * 255.0F)));
                EXPECT_EQ(w.role, b.role);
            }
        }
    }
    std::vector<std::uint8_t> odd(25);
    EXPECT_THROW(decode_instances(odd), std::invalid_argument);
    std::vector<std::uint8_t> bad_role(24);
    bad_role[21] = 9;
    EXPECT_THROW(decode_instances(bad_role), std::invalid_argument);
}
