#include <gtest/gtest.h>

#include <random>

#include "chromoscale/core_model.hpp"
#include "chromoscale/synthgen.hpp"
#include "oracles.hpp"

using namespace chromoscale;

namespace {

LevelTables small_tables() {
    LevelTables t;
    t[0].positions = {{0, 0, 0}, {100, 0, 0}};
    t[0].parent_index = {0, 0};
    t[1].positions = {{1, 0, 0}, {2, 0, 0}, {101, 0, 0}};
    t[1].parent_index = {0, 0, 1};
    t[2].positions = {{1, 1, 0}, {2, 1, 0}, {101, 1, 0}};
    t[2].parent_index = {0, 1, 2};
    t[3].positions = {{1, 1, 1}, {1, 1, 2}, {2, 1, 1}, {101, 1, 1}};
    t[3].parent_index = {0, 0, 1, 2};
    return t;
}

}  // namespace

TEST(CoreModel, LevelNamesRoundTrip) {
    for (auto l : {DataLevel::Chromosome, DataLevel::Locus, DataLevel::Fiber, DataLevel::Nucleosome,
                   DataLevel::Nucleotide, DataLevel::Atom}) {
        EXPECT_EQ(parse_level(to_string(l)), l);
    }
    EXPECT_FALSE(parse_level("gene").has_value());
    EXPECT_EQ(parse_element("P"), Element::P);
    EXPECT_EQ(parse_element("Fe"), Element::Other);
}

TEST(CoreModel, TemplateSlotPairing) {
    EXPECT_EQ(NucleotideTemplate::base_pair(0), 0U);
    EXPECT_EQ(NucleotideTemplate::base_pair(145), 145U);
    EXPECT_EQ(NucleotideTemplate::base_pair(146), 145U);
    EXPECT_EQ(NucleotideTemplate::base_pair(291), 0U);
    for (std::size_t s = 0; s < kNucleotidesPerNucleosome; ++s) {
        EXPECT_EQ(NucleotideTemplate::partner(NucleotideTemplate::partner(s)), s);
        EXPECT_EQ(NucleotideTemplate::base_pair(s), NucleotideTemplate::base_pair(NucleotideTemplate::partner(s)));
    }
}

TEST(CoreModel, BuildValidTables) {
    const auto ds = GenomeDataset::build(small_tables(), default_templates());
    EXPECT_TRUE(validate(ds).ok());
    EXPECT_EQ(ds.count(DataLevel::Nucleosome), 4U);
    EXPECT_EQ(ds.count(DataLevel::Nucleotide), 4U * 292U);
    EXPECT_EQ(ds.count(DataLevel::Atom), 4U * 292U * 35U);
    EXPECT_EQ(ds.children(DataLevel::Chromosome, 0), (IndexRange{0, 2}));
    EXPECT_EQ(ds.children(DataLevel::Fiber, 0), (IndexRange{0, 2}));
    EXPECT_EQ(ds.parent_of(DataLevel::Nucleosome, 3), 2U);
    EXPECT_EQ(ds.descendants(DataLevel::Chromosome, 1, DataLevel::Nucleosome), (IndexRange{3, 4}));
    EXPECT_EQ(child_range(ds, {DataLevel::Locus, 1}), (IndexRange{1, 2}));
    EXPECT_THROW(child_range(ds, {DataLevel::Nucleosome, 0}), NoChildrenError);
    EXPECT_THROW(child_range(ds, {DataLevel::Atom, 0}), NoChildrenError);
    EXPECT_THROW(ancestors(ds, {DataLevel::Locus, 3}), InvalidIdError);
}

TEST(CoreModel, AncestorsOfVirtualIds) {
    const auto ds = GenomeDataset::build(small_tables(), default_templates());
    const auto p = ancestors(ds, {DataLevel::Nucleotide, 3 * 292 + 17});
    EXPECT_EQ(p.nucleosome, 3U);
    EXPECT_EQ(p.fiber, 2U);
    EXPECT_EQ(p.locus, 2U);
    EXPECT_EQ(p.chromosome, 1U);
    const auto a = ancestors(ds, {DataLevel::Atom, 2 * 292 * 35 + 5});
    EXPECT_EQ(a.nucleosome, 2U);
    EXPECT_EQ(a.chromosome, 0U);
    EXPECT_EQ(ancestors(ds, {DataLevel::Chromosome, 1}), AncestorPath{});
}

TEST(CoreModel, AncestorsAndChildrenMatchBruteForce) {
    const auto ds = generate(GenParams{3, 2, 5, 7, 3000.0, 9});
    for (std::size_t l = 0; l < 4; ++l) {
        const auto level = static_cast<DataLevel>(l);
        for (std::size_t i = 0; i < ds.count(level); ++i) {
            EXPECT_EQ(ancestors(ds, {level, i}), oracle::ancestors(ds, {level, i}));
            if (l < 3) {
                const auto r = child_range(ds, {level, i});
                const auto kids = oracle::children(ds, level, i);
                ASSERT_EQ(r.size(), kids.size());
                for (std::size_t k = 0; k < kids.size(); ++k) EXPECT_EQ(r.begin + k, kids[k]);
            }
        }
    }
    std::mt19937_64 rng(5);
    for (int k = 0; k < 500; ++k) {
        const ElementId nt{DataLevel::Nucleotide, rng() % ds.count(DataLevel::Nucleotide)};
        EXPECT_EQ(ancestors(ds, nt), oracle::ancestors(ds, nt));
        const ElementId at{DataLevel::Atom, rng() % ds.count(DataLevel::Atom)};
        EXPECT_EQ(ancestors(ds, at), oracle::ancestors(ds, at));
    }
}

TEST(CoreModel, ValidationCodes) {
    auto t = small_tables();
    t[1].parent_index[2] = 5;
    EXPECT_EQ(validate(t).count("parent-range"), 1U);

    t = small_tables();
    t[3].parent_index = {0, 1, 0, 2};
    EXPECT_GE(validate(t).count("parent-order"), 1U);

    t = small_tables();
    t[2].positions[1].y = std::nan("");
    EXPECT_EQ(validate(t).count("non-finite"), 1U);

    t = small_tables();
    t[3].parent_index.pop_back();
    EXPECT_EQ(validate(t).count("size-mismatch"), 1U);

    t = small_tables();
    t[2].parent_index = {0, 0, 2};
    EXPECT_EQ(validate(t).count("childless-parent"), 1U);

    t = small_tables();
    t[0].positions.clear();
    t[0].parent_index.clear();
    EXPECT_GE(validate(t).count("chromosome-count"), 1U);

    t = small_tables();
    t[1].parent_index[2] = 5;
    EXPECT_THROW(GenomeDataset::build(t, default_templates()), DatasetError);
}

TEST(CoreModel, PlantedDefectsAreAllReported) {
    // Randomly corrupt a valid dataset and check each planted defect is reported at its location.
    const auto ds = generate(GenParams{2, 3, 4, 5, 3000.0, 42});
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        LevelTables t = ds.tables();
        const std::size_t l = 1 + rng() % 3;
        const std::size_t i = rng() % t[l].size();
        const int kind = static_cast<int>(rng() % 2);
        if (kind == 0) {
            t[l].parent_index[i] = t[l - 1].size() + rng() % 5;
            const auto r = validate(t);
            EXPECT_GE(r.count("parent-range"), 1U);
            const std::string where = std::string(to_string(static_cast<DataLevel>(l))) + "[" + std::to_string(i) + "]";
            bool located = false;
            for (const auto& v : r.violations) {
                if (v.code == "parent-range" && v.location == where) located = true;
            }
            EXPECT_TRUE(located);
        } else {
            t[l].positions[i].z = std::numeric_limits<double>::infinity();
            EXPECT_EQ(validate(t).count("non-finite"), 1U);
        }
    }
}

TEST(CoreModel, SpacingStatsAreMedianGaps) {
    const auto ds = GenomeDataset::build(small_tables(), default_templates());
    // nucleosome gaps along the sequence: 1, sqrt(2), 99.0 (lower median = sqrt 2)
    EXPECT_NEAR(ds.spacing(DataLevel::Nucleosome), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(ds.spacing(DataLevel::Chromosome), 100.0, 1e-12);
}

TEST(CoreModel, NucleosomeFramesFollowSequence) {
    const auto ds = GenomeDataset::build(small_tables(), default_templates());
    const auto& fr = ds.nucleosome_frames();
    ASSERT_EQ(fr.size(), 4U);
    EXPECT_NEAR(distance(fr[0].axes[0], Vec3{0, 0, 1}), 0.0, 1e-12);
    // last nucleosome of chromosome 0 reuses its predecessor's axes
    EXPECT_EQ(fr[2].axes, fr[1].axes);
    EXPECT_EQ(fr[2].origin, ds.position(DataLevel::Nucleosome, 2));
}
