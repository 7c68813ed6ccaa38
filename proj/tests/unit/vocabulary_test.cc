#include "oracles.h"
#include "vidmeta/random.h"
#include "vidmeta/vocabulary.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

using namespace vidmeta;
using namespace vidmeta::fixture;

TEST(Vocabulary, CountsAndValueFragment)
{
    const std::vector<MetadataString> strings = parse_all({
        "moov/mvhd", "moov/mvhd", "moov/mvhd",
        "moov/trak/tkhd/@track_ID=1", "moov/trak/tkhd/@track_ID=1",
        "moov/trak/tkhd/@width=600.0",
    });
    const std::vector<std::vector<MetadataString>> corpus = {strings};
    const Vocabulary v = build_vocabulary(corpus);
    const FeatureVector x = vectorize(strings, v);
    ASSERT_EQ(x.values.size(), 3u);
    EXPECT_EQ(x.values[static_cast<std::size_t>(v.index_of_cat1("moov/mvhd"))], 3.0);
    EXPECT_EQ(x.values[static_cast<std::size_t>(v.index_of_cat2d("moov/trak/tkhd/@track_ID=1"))], 2.0);
    EXPECT_EQ(x.values[static_cast<std::size_t>(v.index_of_cat2c("moov/trak/tkhd/@width"))], 600.0);
}

TEST(Vocabulary, LayoutIsSortedByCategory)
{
    const std::vector<std::vector<MetadataString>> corpus = {
        parse_all({"moov/udta", "moov", "moov/@b=1", "moov/@a=2", "moov/@duration=5"}),
    };
    const Vocabulary v = build_vocabulary(corpus);
    const std::vector<std::string> expected = {"moov", "moov/udta", "moov/@a=2", "moov/@b=1", "moov/@duration"};
    EXPECT_EQ(v.entry_texts(), expected);
    EXPECT_EQ(v.index_of_cat1("nope"), -1);
}

TEST(Vocabulary, MatchesNaiveOracle)
{
    Rng rng(11);
    const ContinuousKeyList continuous{{"duration", "width"}};
    for (int round = 0; round < 100; ++round) {
        std::vector<std::vector<MetadataString>> corpus;
        for (int i = 0; i < 5; ++i) {
            corpus.push_back(random_collection(rng));
        }
        const Vocabulary v = build_vocabulary(corpus, continuous);
        NaiveVectorizer oracle;
        oracle.continuous_keys = {"duration", "width"};
        oracle.fit(corpus);
        ASSERT_EQ(v.entry_texts(), oracle.layout);
        for (int i = 0; i < 5; ++i) {
            const auto probe = random_collection(rng);
            EXPECT_EQ(vectorize(probe, v).values, oracle.transform(probe));
        }
    }
}

TEST(Vocabulary, ContinuousLastValueWinsAndBadValuesWarn)
{
    const auto strings = parse_all({"a/@duration=5", "a/@duration=7", "a/@duration=oops"});
    const std::vector<std::vector<MetadataString>> corpus = {strings};
    const Vocabulary v = build_vocabulary(corpus);
    std::vector<std::string> warnings;
    const FeatureVector x = vectorize(strings, v, &warnings);
    ASSERT_EQ(x.values.size(), 1u);
    EXPECT_EQ(x.values[0], 7.0);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("NonNumericContinuousValue"), std::string::npos);
}

TEST(Vocabulary, FullPathPatternsRestrictContinuousKeys)
{
    const ContinuousKeyList only_mvhd{{"moov/mvhd/@duration"}};
    const auto strings = parse_all({"moov/mvhd/@duration=10", "moov/trak1/tkhd/@duration=9"});
    const std::vector<std::vector<MetadataString>> corpus = {strings};
    const Vocabulary v = build_vocabulary(corpus, only_mvhd);
    EXPECT_EQ(v.cat2c_keys(), std::vector<std::string>{"moov/mvhd/@duration"});
    EXPECT_EQ(v.cat2d(), std::vector<std::string>{"moov/trak1/tkhd/@duration=9"});
}

TEST(Vocabulary, JsonRoundTripAndHash)
{
    const std::vector<std::vector<MetadataString>> corpus = {parse_all({"moov", "moov/@duration=3", "moov/@x=1"})};
    const Vocabulary v = build_vocabulary(corpus);
    const Vocabulary back = Vocabulary::from_json(v.to_json());
    EXPECT_EQ(back.entry_texts(), v.entry_texts());
    EXPECT_EQ(back.hash(), v.hash());

    const std::vector<std::vector<MetadataString>> other = {parse_all({"moov", "moov/@x=2"})};
    EXPECT_NE(build_vocabulary(other).hash(), v.hash());

    nlohmann::json tampered = v.to_json();
    tampered["cat1"].push_back("zzz");
    EXPECT_THROW(Vocabulary::from_json(tampered), Error);
}

TEST(Vocabulary, FeatureCsv)
{
    const auto strings = parse_all({"moov", "moov/@k=a,b"});
    const std::vector<std::vector<MetadataString>> corpus = {strings};
    const Vocabulary v = build_vocabulary(corpus);
    std::ostringstream out;
    const std::vector<std::string> ids = {"f1"};
    const std::vector<FeatureVector> rows = {vectorize(strings, v)};
    write_feature_csv(out, v, ids, rows);
    EXPECT_EQ(out.str(), "id,moov,\"moov/@k=a,b\"\nf1,1,1\n");
}
