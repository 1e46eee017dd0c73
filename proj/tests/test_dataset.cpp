#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "chirplab/common.hpp"
#include "chirplab/dataset.hpp"
#include "chirplab/rng.hpp"
#include "support/tempdir.hpp"

using namespace chirplab;
using namespace chirplab::dataset;
using testsupport::TempDir;

namespace {

std::string manifest_json(std::size_t dim, bool has_logits, const std::string& vocab_file) {
    return std::string("{\"embedding_dim\": ") + std::to_string(dim) +
           ", \"has_logits\": " + (has_logits ? "true" : "false") + ", \"vocabulary\": \"" +
           vocab_file + "\", \"source_tag\": \"test\"}";
}

}  // namespace

TEST_CASE("load_vocabulary basics") {
    TempDir tmp("vocab");

    SUBCASE("three codes in file order") {
        auto path = tmp.write("vocab.txt", "grnsan\ncomior1\nlirplo\n");
        auto vocab = load_vocabulary(path);
        CHECK(vocab.size() == 3);
        CHECK(vocab.index_of("comior1") == 1);
        CHECK(vocab.code_at(0) == "grnsan");
        CHECK(vocab.code_at(2) == "lirplo");
    }
    SUBCASE("singleton") {
        auto path = tmp.write("one.txt", "bncwoo3\n");
        auto vocab = load_vocabulary(path);
        CHECK(vocab.size() == 1);
        CHECK(vocab.index_of("bncwoo3") == 0);
    }
    SUBCASE("duplicate rejected, naming the code") {
        auto path = tmp.write("dup.txt", "grnsan\ngrnsan\n");
        CHECK_THROWS_WITH_AS(load_vocabulary(path), doctest::Contains("grnsan"), ValidationError);
    }
    SUBCASE("empty file rejected") {
        auto path = tmp.write("empty.txt", "");
        CHECK_THROWS_AS(load_vocabulary(path), ValidationError);
    }
    SUBCASE("blank lines are skipped, not indexed") {
        auto path = tmp.write("gaps.txt", "a\n\nb\n\n");
        auto vocab = load_vocabulary(path);
        CHECK(vocab.size() == 2);
        CHECK(vocab.index_of("b") == 1);
    }
    SUBCASE("missing file is an IO error") {
        CHECK_THROWS_AS(load_vocabulary(tmp.file("nope.txt")), IoError);
    }
}

TEST_CASE("load_embedding_table") {
    TempDir tmp("table");
    tmp.write("vocab.txt", "sp0\nsp1\n");
    auto manifest = tmp.write("manifest.json", manifest_json(2, true, "vocab.txt"));

    SUBCASE("schema echo: 4 rows, 2 embedding and 2 logit values each") {
        auto data = tmp.write("data.csv",
                              "recording_id,interval_start_sec,emb_0,emb_1,logit_0,logit_1\n"
                              "a,0,1.0,2.0,0.5,-0.5\n"
                              "a,5,3.0,4.0,1.5,-inf\n"
                              "b,0,5.0,6.0,-1.0,2.5\n"
                              "b,5,7.0,8.0,0.0,0.0\n");
        auto table = load_embedding_table(data, manifest);
        CHECK(table.size() == 4);
        CHECK(table.embedding_dim == 2);
        CHECK(table.has_logits);
        CHECK(table.vocab.size() == 2);
        CHECK(table.source_tag == "test");
        for (const auto& rec : table.records) {
            CHECK(rec.embedding.size() == 2);
            CHECK(rec.logits.size() == 2);
        }
        CHECK(table.records[1].logits[1] == -std::numeric_limits<double>::infinity());
        // sigmoid of -inf must be exactly 0; checked at the type boundary here
        CHECK(1.0 / (1.0 + std::exp(-table.records[1].logits[1])) == 0.0);
    }
    SUBCASE("header/manifest dimension mismatch names both counts") {
        auto data3 = tmp.write("wide.csv",
                               "recording_id,interval_start_sec,emb_0,emb_1,emb_2\n"
                               "a,0,1,2,3\n");
        auto manifest2 = tmp.write("manifest2.json", manifest_json(2, false, "vocab.txt"));
        try {
            load_embedding_table(data3, manifest2);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("5") != std::string::npos);
            CHECK(msg.find("4") != std::string::npos);
        }
    }
    SUBCASE("NaN rejected with the row number") {
        auto data = tmp.write("nan.csv",
                              "recording_id,interval_start_sec,emb_0,emb_1,logit_0,logit_1\n"
                              "a,0,1.0,2.0,0.5,-0.5\n"
                              "a,5,nan,4.0,1.5,0.0\n");
        CHECK_THROWS_WITH_AS(load_embedding_table(data, manifest), doctest::Contains("row 3"),
                             ValidationError);
    }
    SUBCASE("-inf in an embedding column rejected") {
        auto data = tmp.write("embinf.csv",
                              "recording_id,interval_start_sec,emb_0,emb_1,logit_0,logit_1\n"
                              "a,0,-inf,2.0,0.5,-0.5\n");
        CHECK_THROWS_AS(load_embedding_table(data, manifest), ValidationError);
    }
    SUBCASE("duplicate (recording_id, interval) rejected") {
        auto data = tmp.write("dup.csv",
                              "recording_id,interval_start_sec,emb_0,emb_1,logit_0,logit_1\n"
                              "a,0,1.0,2.0,0.5,-0.5\n"
                              "a,0,3.0,4.0,1.5,0.0\n");
        CHECK_THROWS_AS(load_embedding_table(data, manifest), ValidationError);
    }
    SUBCASE("interval not a multiple of 5 rejected") {
        auto data = tmp.write("grain.csv",
                              "recording_id,interval_start_sec,emb_0,emb_1,logit_0,logit_1\n"
                              "a,3,1.0,2.0,0.5,-0.5\n");
        CHECK_THROWS_AS(load_embedding_table(data, manifest), ValidationError);
    }
}

TEST_CASE("embedding table round-trips through the CSV format") {
    TempDir tmp("roundtrip");
    tmp.write("vocab.txt", "sp0\nsp1\nsp2\n");
    auto manifest = tmp.write("manifest.json", manifest_json(4, true, "vocab.txt"));

    EmbeddingTable table;
    table.embedding_dim = 4;
    table.vocab = load_vocabulary(tmp.file("vocab.txt"));
    table.source_tag = "test";
    table.has_logits = true;
    SplitMix64 rng(99);
    for (int i = 0; i < 12; ++i) {
        EmbeddingRecord rec;
        rec.recording_id = "rec" + std::to_string(i / 3);
        rec.interval_start_sec = (i % 3) * 5;
        for (int k = 0; k < 4; ++k) rec.embedding.push_back(rng.next_double() * 2000.0 - 1000.0);
        for (int k = 0; k < 3; ++k) {
            rec.logits.push_back(k == i % 3 ? -std::numeric_limits<double>::infinity()
                                            : rng.next_double() * 20.0 - 10.0);
        }
        table.records.push_back(rec);
    }

    write_embedding_table(table, tmp.file("out.csv"));
    auto loaded = load_embedding_table(tmp.file("out.csv"), manifest);
    REQUIRE(loaded.size() == table.size());
    CHECK(loaded.embedding_dim == table.embedding_dim);
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(loaded.records[i].recording_id == table.records[i].recording_id);
        CHECK(loaded.records[i].interval_start_sec == table.records[i].interval_start_sec);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(loaded.records[i].embedding[k] == table.records[i].embedding[k]);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(loaded.records[i].logits[k] == table.records[i].logits[k]);
        }
    }
}

namespace {

EmbeddingTable tiny_table(std::size_t n) {
    EmbeddingTable table;
    table.embedding_dim = 1;
    table.vocab = SpeciesVocabulary({"sp0"});
    table.has_logits = false;
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingRecord rec;
        rec.recording_id = "r" + std::to_string(i);
        rec.interval_start_sec = 0;
        rec.embedding = {static_cast<double>(i)};
        table.records.push_back(rec);
    }
    return table;
}

}  // namespace

TEST_CASE("train_val_split") {
    SUBCASE("floor arithmetic: N=10, 0.8 -> (8,2)") {
        auto pair = train_val_split(tiny_table(10), 0.8, 7);
        CHECK(pair.train.size() == 8);
        CHECK(pair.validation.size() == 2);
    }
    SUBCASE("floor arithmetic: N=5, 0.5 -> (2,3)") {
        auto pair = train_val_split(tiny_table(5), 0.5, 7);
        CHECK(pair.train.size() == 2);
        CHECK(pair.validation.size() == 3);
    }
    SUBCASE("identical membership across runs") {
        auto a = train_val_split(tiny_table(10), 0.8, 7);
        auto b = train_val_split(tiny_table(10), 0.8, 7);
        for (std::size_t i = 0; i < a.train.size(); ++i) {
            CHECK(a.train.records[i].recording_id == b.train.records[i].recording_id);
        }
        for (std::size_t i = 0; i < a.validation.size(); ++i) {
            CHECK(a.validation.records[i].recording_id == b.validation.records[i].recording_id);
        }
    }
    SUBCASE("disjoint and exhaustive") {
        auto table = tiny_table(23);
        auto pair = train_val_split(table, 0.7, 3);
        std::set<std::string> seen;
        for (const auto& rec : pair.train.records) seen.insert(rec.recording_id);
        for (const auto& rec : pair.validation.records) seen.insert(rec.recording_id);
        CHECK(seen.size() == 23);
        CHECK(pair.train.size() + pair.validation.size() == 23);
    }
    SUBCASE("fraction bounds enforced") {
        CHECK_THROWS_AS(train_val_split(tiny_table(4), 0.0, 1), ValidationError);
        CHECK_THROWS_AS(train_val_split(tiny_table(4), 1.0, 1), ValidationError);
        CHECK_THROWS_AS(train_val_split(tiny_table(4), 1.5, 1), ValidationError);
    }
    SUBCASE("empty table rejected") {
        CHECK_THROWS_AS(train_val_split(tiny_table(0), 0.8, 1), ValidationError);
    }
}

TEST_CASE("aggregate_windows") {
    SUBCASE("two-point mean") {
        CHECK(aggregate_windows({{1, 3}, {3, 5}}) == std::vector<double>{2, 4});
    }
    SUBCASE("single window is identity") {
        CHECK(aggregate_windows({{7.5}}) == std::vector<double>{7.5});
    }
    SUBCASE("hand mean of three vectors") {
        CHECK(aggregate_windows({{0, 0}, {0, 0}, {6, 3}}) == std::vector<double>{2, 1});
    }
    SUBCASE("n copies of v is exactly v") {
        const std::vector<double> v = {0.1, -2.5, 3.75, 1e-3};
        for (std::size_t n = 1; n <= 6; ++n) {
            std::vector<std::vector<double>> windows(n, v);
            CHECK(aggregate_windows(windows) == v);
        }
    }
    SUBCASE("empty list rejected") {
        CHECK_THROWS_AS(aggregate_windows({}), ValidationError);
    }
    SUBCASE("mixed dimensions rejected") {
        CHECK_THROWS_AS(aggregate_windows({{1, 2}, {1}}), ValidationError);
    }
}

TEST_CASE("flatten_frames") {
    SUBCASE("row-major 2x2") {
        CHECK(flatten_frames({{1, 2}, {3, 4}}) == std::vector<double>{1, 2, 3, 4});
    }
    SUBCASE("5x150 flattens to 750") {
        std::vector<std::vector<double>> frames(5, std::vector<double>(150, 0.25));
        CHECK(flatten_frames(frames).size() == 750);
    }
    SUBCASE("single row is the row itself") {
        CHECK(flatten_frames({{9, 8, 7}}) == std::vector<double>{9, 8, 7});
    }
    SUBCASE("ragged rows rejected") {
        CHECK_THROWS_AS(flatten_frames({{1, 2}, {3}}), ValidationError);
    }
    SUBCASE("flatten then reshape recovers the matrix") {
        SplitMix64 rng(5);
        std::vector<std::vector<double>> frames(3, std::vector<double>(4));
        for (auto& row : frames) {
            for (double& v : row) v = rng.next_double();
        }
        auto flat = flatten_frames(frames);
        for (std::size_t f = 0; f < 3; ++f) {
            for (std::size_t k = 0; k < 4; ++k) {
                CHECK(flat[f * 4 + k] == frames[f][k]);
            }
        }
    }
}

TEST_CASE("summarize_table") {
    auto with_logits = [](std::vector<std::vector<double>> logit_rows) {
        EmbeddingTable table;
        table.embedding_dim = 1;
        table.vocab = SpeciesVocabulary({"sp0", "sp1"});
        table.has_logits = true;
        int i = 0;
        for (auto& logits : logit_rows) {
            EmbeddingRecord rec;
            rec.recording_id = "r" + std::to_string(i++);
            rec.interval_start_sec = 0;
            rec.embedding = {0.0};
            rec.logits = std::move(logits);
            table.records.push_back(std::move(rec));
        }
        return table;
    };

    SUBCASE("720 intervals is one hour") {
        std::vector<std::vector<double>> rows(720, {10.0, -10.0});
        auto summary = summarize_table(with_logits(rows), 0.5);
        CHECK(summary.interval_count == 720);
        CHECK(summary.total_hours == doctest::Approx(1.0));
    }
    SUBCASE("saturated logits give call fraction 1") {
        std::vector<std::vector<double>> rows(4, {10.0, -10.0});
        CHECK(summarize_table(with_logits(rows), 0.5).call_fraction == 1.0);
    }
    SUBCASE("hand count: 1 of 4 rows detected") {
        auto table = with_logits({{2.0, -3.0}, {-1.0, -1.0}, {-5.0, -5.0}, {0.0, 0.0}});
        CHECK(summarize_table(table, 0.5).call_fraction == doctest::Approx(0.25));
    }
    SUBCASE("logit-free table rejected") {
        EmbeddingTable table;
        table.embedding_dim = 1;
        table.vocab = SpeciesVocabulary({"sp0"});
        table.has_logits = false;
        CHECK_THROWS_AS(summarize_table(table, 0.5), ValidationError);
    }
}
