#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "intermit/errors.hpp"
#include "intermit/store.hpp"
#include "intermit/textio.hpp"
#include "testutil.hpp"

using namespace intermit;
using testutil::make_history;

namespace {

Night night(int day) { return Night::from_ymd(2020, 1, static_cast<unsigned>(day)); }

Dataset random_dataset(std::mt19937& rng, std::size_t max_tests, std::size_t max_len) {
    std::vector<VerdictHistory> histories;
    const std::size_t count = 1 + rng() % max_tests;
    for (std::size_t t = 0; t < count; ++t) {
        const auto sequence =
            testutil::random_sequence(rng, 1 + rng() % max_len);
        // occasional odd characters exercise CSV quoting
        const std::string params = (t % 3 == 0) ? "rate=1,burst=\"x\"" : "default";
        histories.push_back(make_history(
            {"sys" + std::to_string(t % 4), "script" + std::to_string(t), params}, sequence,
            Night::from_ymd(2020, 1, 1).next()));
    }
    return dataset_from_histories(std::move(histories), "random");
}

}  // namespace

TEST_CASE("jsonl ingest orders records and groups them per test") {
    const std::string text =
        R"({"night":"2020-01-03","system":"b","script":"s","params":"d","verdict":"fail"})" "\n"
        R"({"night":"2020-01-01","system":"a","script":"s","params":"d","verdict":"pass"})" "\n"
        "\n"
        R"({"night":"2020-01-02","system":"a","script":"s","params":"d","verdict":"invalid"})" "\n";
    const Dataset dataset = ingest(text, RecordFormat::Jsonl, "test");
    REQUIRE(dataset.histories.size() == 2);
    CHECK(dataset.histories[0].key.test_system == "a");
    CHECK(dataset.histories[0].verdicts ==
          std::vector<Verdict>{Verdict::Pass, Verdict::Invalid});
    CHECK(dataset.histories[1].key.test_system == "b");
    CHECK(dataset.nights.size() == 3);
    CHECK(dataset.provenance == "test");
    CHECK(dataset.total_verdicts() == 3);
}

TEST_CASE("exact duplicates collapse and conflicting verdicts throw") {
    const std::string duplicate =
        R"({"night":"2020-01-01","system":"a","script":"s","params":"d","verdict":"pass"})" "\n"
        R"({"night":"2020-01-01","system":"a","script":"s","params":"d","verdict":"pass"})" "\n";
    CHECK(ingest(duplicate, RecordFormat::Jsonl).total_verdicts() == 1);

    const std::string conflict =
        R"({"night":"2020-01-01","system":"a","script":"s","params":"d","verdict":"pass"})" "\n"
        R"({"night":"2020-01-01","system":"a","script":"s","params":"d","verdict":"fail"})" "\n";
    CHECK_THROWS_AS(ingest(conflict, RecordFormat::Jsonl), ConflictingVerdict);
}

TEST_CASE("jsonl parse errors name the offending line") {
    const auto line_of = [](const std::string& text) {
        try {
            ingest(text, RecordFormat::Jsonl);
        } catch (const ParseError& e) {
            return e.line;
        }
        return std::size_t{0};
    };
    const std::string good =
        R"({"night":"2020-01-01","system":"a","script":"s","params":"d","verdict":"pass"})" "\n";
    CHECK(line_of(good + "{oops\n") == 2);
    CHECK(line_of(good + "[1,2]\n") == 2);
    CHECK(line_of(good + R"({"night":"2020-01-02","system":"a","script":"s","params":"d"})"
                         "\n") == 2);
    CHECK(line_of(good +
                  R"({"night":"2020-01-02","system":"a","script":"s","params":"d","verdict":"ok"})"
                  "\n") == 2);
    CHECK(line_of(good +
                  R"({"night":"2020-1-2","system":"a","script":"s","params":"d","verdict":"pass"})"
                  "\n") == 2);
    CHECK(line_of(
              good +
              R"({"night":"2020-01-02","system":1,"script":"s","params":"d","verdict":"pass"})"
              "\n") == 2);
    CHECK(line_of(
              good +
              R"({"night":"2020-01-02","system":"a","script":"s","params":"d","verdict":"pass","extra":1})"
              "\n") == 2);
}

TEST_CASE("csv ingest wants the exact header and five fields") {
    const std::string text =
        "night,system,script,params,verdict\n"
        "2020-01-02,a,s,d,pass\r\n"
        "2020-01-01,a,s,\"x,y\",fail\n";
    const Dataset dataset = ingest(text, RecordFormat::Csv);
    REQUIRE(dataset.histories.size() == 2);
    CHECK(dataset.histories[0].key.parameter_setting == "d");
    CHECK(dataset.histories[1].key.parameter_setting == "x,y");
    CHECK(dataset.histories[1].verdicts == std::vector<Verdict>{Verdict::Fail});

    CHECK_THROWS_AS(ingest("wrong,header\n", RecordFormat::Csv), ParseError);
    CHECK_THROWS_AS(
        ingest("night,system,script,params,verdict\n2020-01-01,a,s,d\n", RecordFormat::Csv),
        ParseError);
    CHECK_THROWS_AS(
        ingest("night,system,script,params,verdict\n2020-01-01,a,s,\"d,pass\n",
               RecordFormat::Csv),
        ParseError);
}

TEST_CASE("empty input is an empty dataset in both formats") {
    CHECK(ingest("", RecordFormat::Jsonl).histories.empty());
    CHECK(ingest("", RecordFormat::Csv).histories.empty());
    CHECK(ingest("\n\n", RecordFormat::Jsonl).histories.empty());
    CHECK(ingest("night,system,script,params,verdict\n", RecordFormat::Csv).histories.empty());
}

TEST_CASE("export emits the documented bytes") {
    const Dataset dataset = dataset_from_records(
        {
            {{"rig2", "boot", "d"}, night(2), Verdict::Fail},
            {{"rig1", "boot", "a,b"}, night(1), Verdict::Pass},
        },
        "test");
    CHECK(export_records(dataset, RecordFormat::Jsonl) ==
          R"({"night":"2020-01-01","system":"rig1","script":"boot","params":"a,b","verdict":"pass"})"
          "\n"
          R"({"night":"2020-01-02","system":"rig2","script":"boot","params":"d","verdict":"fail"})"
          "\n");
    CHECK(export_records(dataset, RecordFormat::Csv) ==
          "night,system,script,params,verdict\n"
          "2020-01-01,rig1,boot,\"a,b\",pass\n"
          "2020-01-02,rig2,boot,d,fail\n");
}

TEST_CASE("export then ingest reproduces the dataset in both formats") {
    std::mt19937 rng(4242);
    for (int round = 0; round < 40; ++round) {
        const Dataset dataset = random_dataset(rng, 12, 40);
        for (const RecordFormat format : {RecordFormat::Jsonl, RecordFormat::Csv}) {
            const Dataset again = ingest(export_records(dataset, format), format, "again");
            CHECK(again.content_equals(dataset));
            // and the canonical bytes are a fixed point
            CHECK(export_records(again, format) == export_records(dataset, format));
        }
    }
}

TEST_CASE("content equality ignores provenance") {
    const Dataset a = dataset_from_records({{{"s", "t", "d"}, night(1), Verdict::Pass}}, "one");
    const Dataset b = dataset_from_records({{{"s", "t", "d"}, night(1), Verdict::Pass}}, "two");
    CHECK(a.content_equals(b));
    CHECK_FALSE(a.provenance == b.provenance);
}

TEST_CASE("key fields with line breaks are rejected") {
    CHECK_THROWS_AS(
        dataset_from_records({{{"s\n", "t", "d"}, night(1), Verdict::Pass}}, ""), DataError);
    CHECK_THROWS_AS(
        dataset_from_histories({make_history({"s", "t\r", "d"}, {Verdict::Pass})}, ""),
        DataError);
}

TEST_CASE("duplicate keys are rejected when wrapping histories") {
    CHECK_THROWS_AS(dataset_from_histories({make_history({"s", "t", "d"}, {Verdict::Pass}),
                                            make_history({"s", "t", "d"}, {Verdict::Fail})},
                                           ""),
                    DataError);
}

TEST_CASE("query_history returns a copy or an empty shell") {
    const Dataset dataset =
        dataset_from_records({{{"s", "t", "d"}, night(1), Verdict::Pass}}, "");
    CHECK(query_history(dataset, {"s", "t", "d"}).size() == 1);
    const VerdictHistory missing = query_history(dataset, {"s", "nope", "d"});
    CHECK(missing.empty());
    CHECK(missing.key.test_script == "nope");
    CHECK(dataset.find({"s", "nope", "d"}) == nullptr);
}

TEST_CASE("query_night matches a full scan of up to a thousand records") {
    std::mt19937 rng(31337);
    const Dataset dataset = random_dataset(rng, 40, 25);  // ≤ 1000 records
    REQUIRE(dataset.total_verdicts() <= 1000);
    for (int day = 1; day <= 28; ++day) {
        const auto got = query_night(dataset, night(day));
        std::vector<VerdictRecord> expected;
        for (const VerdictHistory& history : dataset.histories)
            for (std::size_t i = 0; i < history.size(); ++i)
                if (history.nights[i] == night(day))
                    expected.push_back({history.key, history.nights[i], history.verdicts[i]});
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].key == expected[i].key);
            CHECK(got[i].verdict == expected[i].verdict);
        }
    }
    CHECK(query_night(dataset, Night::from_ymd(1999, 1, 1)).empty());
}

TEST_CASE("revision logs parse from both formats and round-trip") {
    const std::string csv =
        "night,sw_revision,tw_revision\n"
        "2020-01-01,r100,t5\n"
        "2020-01-02,r101,t5\n";
    const RevisionLog log = parse_revision_log(csv, RecordFormat::Csv);
    REQUIRE(log.entries.size() == 2);
    CHECK(log.entries[0].sw_revision == "r100");
    CHECK(log.entries[1].night.to_string() == "2020-01-02");
    CHECK(export_revision_log(log, RecordFormat::Csv) == csv);

    const std::string jsonl = export_revision_log(log, RecordFormat::Jsonl);
    CHECK(parse_revision_log(jsonl, RecordFormat::Jsonl) == log);
}

TEST_CASE("revision logs must be strictly ascending by night") {
    const std::string unordered_nights =
        "night,sw_revision,tw_revision\n"
        "2020-01-02,r1,t1\n"
        "2020-01-01,r1,t1\n";
    CHECK_THROWS_AS(parse_revision_log(unordered_nights, RecordFormat::Csv), ParseError);
    const std::string duplicate_night =
        "night,sw_revision,tw_revision\n"
        "2020-01-01,r1,t1\n"
        "2020-01-01,r2,t1\n";
    CHECK_THROWS_AS(parse_revision_log(duplicate_night, RecordFormat::Csv), ParseError);
}

TEST_CASE("run lengths follow log entries, not calendar nights") {
    RevisionLog log;
    log.entries = {
        {night(1), "r1", "t1"},
        {night(2), "r1", "t1"},
        {night(7), "r1", "t2"},  // calendar gap: still one SW run of 3
        {night(8), "r2", "t2"},
        {night(9), "r2", "t2"},
        {night(10), "r3", "t2"},
    };
    const RunLengthStats stats = run_length_stats(log);
    // SW runs [3,2,1]
    CHECK(stats.sw.min == 1);
    CHECK(stats.sw.max == 3);
    CHECK(stats.sw.mean == 2.0);
    CHECK(stats.sw.median == 2.0);
    CHECK(stats.sw.std_population == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(stats.sw.std_sample == doctest::Approx(1.0).epsilon(1e-12));
    // TW runs [2,4]
    CHECK(stats.tw.min == 2);
    CHECK(stats.tw.max == 4);
    CHECK(stats.tw.median == 3.0);
    // pair runs [2,1,2,1]
    CHECK(stats.both.min == 1);
    CHECK(stats.both.max == 2);
    CHECK(stats.both.median == 1.5);  // mean of the central pair
}

TEST_CASE("a single-entry log has unit runs and zero spread") {
    RevisionLog log;
    log.entries = {{night(1), "r", "t"}};
    const RunLengthStats stats = run_length_stats(log);
    CHECK(stats.sw.min == 1);
    CHECK(stats.sw.max == 1);
    CHECK(stats.sw.mean == 1.0);
    CHECK(stats.sw.std_population == 0.0);
    CHECK(stats.sw.std_sample == 0.0);
    CHECK_THROWS_AS(run_length_stats(RevisionLog{}), EmptyLog);
}

TEST_CASE("revision ids that differ only as a pair break the combined runs") {
    RevisionLog log;
    log.entries = {
        {night(1), "a", "x"},
        {night(2), "b", "x"},  // sw breaks, tw continues
        {night(3), "b", "y"},  // tw breaks, sw continues
        {night(4), "b", "y"},
    };
    const RunLengthStats stats = run_length_stats(log);
    CHECK(stats.sw.max == 3);    // runs [1,3]
    CHECK(stats.tw.max == 2);    // runs [2,2]
    CHECK(stats.both.max == 2);  // runs [1,1,2]
    CHECK(stats.both.min == 1);
}
