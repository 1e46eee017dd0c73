#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "chirplab/common.hpp"
#include "chirplab/pseudolabel.hpp"
#include "chirplab/rng.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace chirplab;
using namespace chirplab::pseudolabel;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

dataset::EmbeddingTable one_row_table(std::vector<double> logits) {
    dataset::EmbeddingTable table;
    table.embedding_dim = 1;
    std::vector<std::string> codes;
    for (std::size_t i = 0; i < logits.size(); ++i) codes.push_back("sp" + std::to_string(i));
    table.vocab = dataset::SpeciesVocabulary(codes);
    table.has_logits = true;
    dataset::EmbeddingRecord rec;
    rec.recording_id = "r0";
    rec.interval_start_sec = 0;
    rec.embedding = {0.0};
    rec.logits = std::move(logits);
    table.records.push_back(std::move(rec));
    return table;
}
}  // namespace

TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(2.0) == doctest::Approx(0.880797).epsilon(1e-6));
    CHECK(sigmoid(kNegInf) == 0.0);
    CHECK_THROWS_AS(sigmoid(std::numeric_limits<double>::quiet_NaN()), ValidationError);

    SUBCASE("stable across the contract range") {
        for (double x : {-1000.0, -700.0, -40.0, 40.0, 700.0, 1000.0}) {
            const double p = sigmoid(x);
            CHECK(std::isfinite(p));
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
        CHECK(sigmoid(1000.0) == 1.0);
        CHECK(sigmoid(-1000.0) == 0.0);
    }
}

TEST_CASE("threshold_predictions") {
    SUBCASE("derived: sigmoid(2) > 0.5 > sigmoid(-1)") {
        CHECK(threshold_predictions({2.0, -1.0}, 0.5) == LabelVector{1, 0});
    }
    SUBCASE("strict inequality at the boundary") {
        CHECK(threshold_predictions({0.0}, 0.5) == LabelVector{0});
    }
    SUBCASE("-inf logits never fire") {
        CHECK(threshold_predictions({kNegInf, kNegInf}, 0.5) == LabelVector{0, 0});
        CHECK(threshold_predictions({kNegInf, kNegInf}, 0.01) == LabelVector{0, 0});
    }
    SUBCASE("threshold must be a probability") {
        CHECK_THROWS_AS(threshold_predictions({0.0}, 0.0), ValidationError);
        CHECK_THROWS_AS(threshold_predictions({0.0}, 1.0), ValidationError);
    }
    SUBCASE("raising the threshold never turns a 0 into a 1") {
        SplitMix64 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> logits(6);
            for (double& v : logits) v = rng.next_double() * 8.0 - 4.0;
            const double t1 = 0.1 + 0.4 * rng.next_double();
            const double t2 = t1 + (0.99 - t1) * rng.next_double();
            auto low = threshold_predictions(logits, t1);
            auto high = threshold_predictions(logits, t2);
            for (std::size_t i = 0; i < logits.size(); ++i) {
                CHECK(high[i] <= low[i]);
            }
        }
    }
}

TEST_CASE("call_indicator") {
    CHECK(call_indicator({0, 0, 0}) == 0);
    CHECK(call_indicator({0, 1, 0}) == 1);
    CHECK(call_indicator({1, 1}) == 1);
    CHECK(call_indicator({}) == 0);
}

TEST_CASE("species_onehot") {
    dataset::SpeciesVocabulary vocab({"grnsan", "comior1", "lirplo"});
    CHECK(species_onehot("comior1", vocab) == LabelVector{0, 1, 0});

    dataset::SpeciesVocabulary single({"bncwoo3"});
    CHECK(species_onehot("bncwoo3", single) == LabelVector{1});

    CHECK_THROWS_WITH_AS(species_onehot("zzz", vocab), doctest::Contains("zzz"), ValidationError);
}

TEST_CASE("augment_with_species") {
    SUBCASE("call detected adds the folder species") {
        CHECK(augment_with_species({1, 0, 0}, {0, 1, 0}) == LabelVector{1, 1, 0});
    }
    SUBCASE("no call means no augmentation") {
        CHECK(augment_with_species({0, 0, 0}, {0, 1, 0}) == LabelVector{0, 0, 0});
    }
    SUBCASE("idempotent when already detected") {
        CHECK(augment_with_species({0, 1, 0}, {0, 1, 0}) == LabelVector{0, 1, 0});
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(augment_with_species({1, 0}, {1}), ValidationError);
    }

    SUBCASE("exhaustive agreement with the boolean formula up to length 4") {
        for (std::size_t len = 1; len <= 4; ++len) {
            for (unsigned y_mask = 0; y_mask < (1u << len); ++y_mask) {
                for (unsigned s_mask = 0; s_mask < (1u << len); ++s_mask) {
                    LabelVector y(len), s(len);
                    for (std::size_t i = 0; i < len; ++i) {
                        y[i] = (y_mask >> i) & 1;
                        s[i] = (s_mask >> i) & 1;
                    }
                    CHECK(augment_with_species(y, s) == oracles::label_or_gated_species(y, s));
                }
            }
        }
    }
    SUBCASE("never removes a label; unchanged when gated off") {
        SplitMix64 rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t len = 1 + rng.next_below(6);
            LabelVector y(len), s(len);
            for (std::size_t i = 0; i < len; ++i) {
                y[i] = static_cast<std::uint8_t>(rng.next_below(2));
                s[i] = static_cast<std::uint8_t>(rng.next_below(2));
            }
            auto out = augment_with_species(y, s);
            for (std::size_t i = 0; i < len; ++i) CHECK(out[i] >= y[i]);
            if (!call_indicator(y)) CHECK(out == y);
        }
    }
}

TEST_CASE("build_label_matrix") {
    PseudoLabelConfig aug_on{0.5, true};
    PseudoLabelConfig aug_off{0.5, false};

    SUBCASE("composition of thresholding and augmentation") {
        auto table = one_row_table({2.0, -1.0});
        auto labels = build_label_matrix(table, {{"r0", "sp1"}}, aug_on);
        REQUIRE(labels.size() == 1);
        CHECK(labels.rows[0] == LabelVector{1, 1});
        CHECK(labels.recording_ids[0] == "r0");
        CHECK(labels.codes == std::vector<std::string>{"sp0", "sp1"});
    }
    SUBCASE("augmentation off thresholds only") {
        auto table = one_row_table({2.0, -1.0});
        auto labels = build_label_matrix(table, {}, aug_off);
        CHECK(labels.rows[0] == LabelVector{1, 0});
    }
    SUBCASE("all -inf logits stay all-zero even with augmentation") {
        auto table = one_row_table({kNegInf, kNegInf});
        auto labels = build_label_matrix(table, {{"r0", "sp1"}}, aug_on);
        CHECK(labels.rows[0] == LabelVector{0, 0});
    }
    SUBCASE("missing folder species listed in the error") {
        auto table = one_row_table({2.0, -1.0});
        CHECK_THROWS_WITH_AS(build_label_matrix(table, {}, aug_on), doctest::Contains("r0"),
                             ValidationError);
    }
    SUBCASE("logit-free table rejected") {
        dataset::EmbeddingTable table;
        table.embedding_dim = 1;
        table.vocab = dataset::SpeciesVocabulary({"sp0"});
        table.has_logits = false;
        CHECK_THROWS_AS(build_label_matrix(table, {}, aug_off), ValidationError);
    }
}

TEST_CASE("folder species and label matrix files") {
    testsupport::TempDir tmp("plfiles");

    SUBCASE("folder map parses and rejects duplicates") {
        auto path = tmp.write("map.csv", "recording_id,species_code\nr0,sp1\nr1,sp0\n");
        auto map = load_folder_species(path);
        CHECK(map.size() == 2);
        CHECK(map.at("r0") == "sp1");

        auto dup = tmp.write("dup.csv", "recording_id,species_code\nr0,sp1\nr0,sp0\n");
        CHECK_THROWS_AS(load_folder_species(dup), ValidationError);
    }
    SUBCASE("label matrix round-trips") {
        LabelMatrix labels;
        labels.codes = {"sp0", "sp1", "sp2"};
        labels.recording_ids = {"a", "a", "b"};
        labels.interval_starts = {0, 5, 0};
        labels.rows = {{1, 0, 1}, {0, 0, 0}, {0, 1, 0}};
        write_label_matrix(labels, tmp.file("labels.csv"));
        auto loaded = load_label_matrix(tmp.file("labels.csv"));
        CHECK(loaded.codes == labels.codes);
        CHECK(loaded.recording_ids == labels.recording_ids);
        CHECK(loaded.interval_starts == labels.interval_starts);
        CHECK(loaded.rows == labels.rows);
    }
    SUBCASE("non-binary label cell rejected") {
        auto bad = tmp.write("bad.csv", "recording_id,interval_start_sec,sp0\nr0,0,2\n");
        CHECK_THROWS_AS(load_label_matrix(bad), ValidationError);
    }
}
