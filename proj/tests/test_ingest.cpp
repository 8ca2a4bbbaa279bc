#include <gtest/gtest.h>

#include <sstream>

#include "reshare/error.hpp"
#include "reshare/ingest.hpp"
#include "reshare/rng.hpp"

using namespace reshare;

namespace {

CascadeParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_cascades(in);
}

const char* kThree =
    R"({"cascade_id":"c1","events":[{"post_id":"p0","user_id":"a","t":100,"followers":10},)"
    R"({"post_id":"p1","user_id":"b","t":105,"followers":20},)"
    R"({"post_id":"p2","user_id":"c","t":103,"followers":30}]})";

}  // namespace

TEST(Ingest, WellFormedRecord) {
  const auto r = parse(std::string(kThree) + "\n");
  ASSERT_EQ(r.cascades.size(), 1u);
  EXPECT_TRUE(r.rejections.empty());
  const auto& c = r.cascades[0];
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.events[0].post_id, "p0");
  EXPECT_EQ(c.events[1].post_id, "p2");
  EXPECT_EQ(c.events[2].post_id, "p1");
}

TEST(Ingest, NullFollowersRejected) {
  const auto r = parse(
      R"({"cascade_id":"c1","events":[{"post_id":"p0","user_id":"a","t":1,"followers":null},)"
      R"({"post_id":"p1","user_id":"b","t":2,"followers":5}]})"
      "\n");
  EXPECT_TRUE(r.cascades.empty());
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, RejectReason::MissingFollowers);
  EXPECT_EQ(to_string(r.rejections[0].reason), "MISSING_FOLLOWERS");
  EXPECT_EQ(r.rejections[0].cascade_id, "c1");
}

TEST(Ingest, MissingFollowersFieldRejected) {
  const auto r = parse(
      R"({"cascade_id":"c1","events":[{"post_id":"p0","user_id":"a","t":1},)"
      R"({"post_id":"p1","user_id":"b","t":2,"followers":5}]})"
      "\n");
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, RejectReason::MissingFollowers);
}

TEST(Ingest, ReshareBeforeRootRejected) {
  const auto r = parse(
      R"({"cascade_id":"c1","events":[{"post_id":"p0","user_id":"a","t":10,"followers":1},)"
      R"({"post_id":"p1","user_id":"b","t":9,"followers":5}]})"
      "\n");
  EXPECT_TRUE(r.cascades.empty());
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(to_string(r.rejections[0].reason), "TIMESTAMP_DISORDER");
}

TEST(Ingest, EqualTimestampsSortByPostId) {
  const auto r = parse(
      R"({"cascade_id":"c1","events":[{"post_id":"r","user_id":"a","t":10,"followers":1},)"
      R"({"post_id":"z","user_id":"b","t":10,"followers":5},)"
      R"({"post_id":"m","user_id":"c","t":10,"followers":5}]})"
      "\n");
  ASSERT_EQ(r.cascades.size(), 1u);
  EXPECT_EQ(r.cascades[0].events[0].post_id, "r");
  EXPECT_EQ(r.cascades[0].events[1].post_id, "m");
  EXPECT_EQ(r.cascades[0].events[2].post_id, "z");
}

TEST(Ingest, SizeOneDropped) {
  const auto r = parse(
      R"({"cascade_id":"c1","events":[{"post_id":"p0","user_id":"a","t":10,"followers":1}]})"
      "\n");
  EXPECT_TRUE(r.cascades.empty());
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(to_string(r.rejections[0].reason), "TOO_SMALL");
}

TEST(Ingest, MalformedLineDoesNotStopStream) {
  const auto r = parse(std::string("{not json\n") + kThree + "\n\n[1,2]\n");
  EXPECT_EQ(r.cascades.size(), 1u);
  ASSERT_EQ(r.rejections.size(), 2u);
  EXPECT_EQ(r.rejections[0].reason, RejectReason::Malformed);
  EXPECT_EQ(r.rejections[0].line, 1u);
  EXPECT_EQ(r.rejections[1].line, 4u);
  EXPECT_EQ(r.records, 3u);
}

TEST(Ingest, NegativeValuesAndDuplicates) {
  const auto r = parse(
      R"({"cascade_id":"c1","events":[{"post_id":"p0","user_id":"a","t":1,"followers":-3},)"
      R"({"post_id":"p1","user_id":"b","t":2,"followers":5}]})"
      "\n"
      R"({"cascade_id":"c2","events":[{"post_id":"p0","user_id":"a","t":1,"followers":3},)"
      R"({"post_id":"p0","user_id":"b","t":2,"followers":5}]})"
      "\n" +
      std::string(kThree) + "\n" + kThree + "\n");
  EXPECT_EQ(r.cascades.size(), 1u);
  ASSERT_EQ(r.rejections.size(), 3u);
  EXPECT_EQ(r.rejections[0].reason, RejectReason::InvalidValue);
  EXPECT_EQ(r.rejections[1].reason, RejectReason::DuplicatePostId);
  EXPECT_EQ(r.rejections[2].reason, RejectReason::DuplicateCascadeId);
}

TEST(Ingest, UnreadableFileIsFatal) {
  try {
    parse_cascades_file("/nonexistent/cascades.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(Ingest, RoundTripIsIdempotent) {
  auto rng = make_stream(3, "ingest-roundtrip", 0);
  std::ostringstream text;
  for (int c = 0; c < 50; ++c) {
    const auto n = 2 + rng.below(8);
    text << R"({"cascade_id":"c)" << c << R"(","events":[)";
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto t = i == 0 ? 1000 : 1000 + static_cast<std::int64_t>(rng.below(50));
      text << (i ? "," : "") << R"({"post_id":"p)" << rng.below(1000) * 100 + i
           << R"(","user_id":"u)" << rng.below(20) << R"(","t":)" << t
           << R"(,"followers":)" << rng.below(5000) << "}";
    }
    text << "]}\n";
  }
  const auto first = parse(text.str());
  EXPECT_EQ(first.cascades.size() + first.rejections.size(), first.records);
  std::ostringstream again;
  write_cascades(again, first.cascades);
  const auto second = parse(again.str());
  EXPECT_TRUE(second.rejections.empty());
  EXPECT_EQ(first.cascades, second.cascades);
  std::ostringstream third;
  write_cascades(third, second.cascades);
  EXPECT_EQ(again.str(), third.str());
}

TEST(Ingest, ShuffledReshareOrderIsIrrelevant) {
  const auto a = parse(
      R"({"cascade_id":"c","events":[{"post_id":"r","user_id":"a","t":1,"followers":1},)"
      R"({"post_id":"x","user_id":"b","t":4,"followers":5},)"
      R"({"post_id":"y","user_id":"c","t":2,"followers":5},)"
      R"({"post_id":"w","user_id":"d","t":4,"followers":5}]})"
      "\n");
  const auto b = parse(
      R"({"cascade_id":"c","events":[{"post_id":"r","user_id":"a","t":1,"followers":1},)"
      R"({"post_id":"w","user_id":"d","t":4,"followers":5},)"
      R"({"post_id":"y","user_id":"c","t":2,"followers":5},)"
      R"({"post_id":"x","user_id":"b","t":4,"followers":5}]})"
      "\n");
  EXPECT_EQ(a.cascades, b.cascades);
}

TEST(Ingest, FollowerEdges) {
  {
    std::istringstream in("follower_id,followee_id\na,b\na,b\n");
    const auto r = parse_follower_edges(in);
    EXPECT_EQ(r.graph.edge_count(), 1u);
    EXPECT_TRUE(r.graph.follows("a", "b"));
    EXPECT_EQ(r.duplicates_dropped, 1u);
  }
  {
    std::istringstream in("follower_id,followee_id\na,a\n");
    const auto r = parse_follower_edges(in);
    EXPECT_EQ(r.graph.edge_count(), 0u);
    EXPECT_EQ(r.self_loops_dropped, 1u);
  }
  {
    std::istringstream in("follower_id,followee_id\na,b\nb,a\n");
    const auto r = parse_follower_edges(in);
    EXPECT_EQ(r.graph.edge_count(), 2u);
    EXPECT_TRUE(r.graph.follows("b", "a"));
    EXPECT_FALSE(r.graph.follows("c", "a"));
  }
  {
    std::istringstream in("follower_id,followee_id\na,b,c\nx\nd,e\n");
    const auto r = parse_follower_edges(in);
    EXPECT_EQ(r.graph.edge_count(), 1u);
    ASSERT_EQ(r.rejections.size(), 2u);
    EXPECT_EQ(r.rejections[0].line, 2u);
  }
}

TEST(Ingest, FollowerRoundTrip) {
  std::istringstream in("follower_id,followee_id\nz,a\nb,c\na,z\n");
  const auto r = parse_follower_edges(in);
  std::ostringstream out;
  write_follower_edges(out, r.graph);
  EXPECT_EQ(out.str(), "follower_id,followee_id\na,z\nb,c\nz,a\n");
}

TEST(Ingest, UserProfiles) {
  Cascade c1{"c1", {{"p0", "u", 0, 100}, {"p1", "v", 1, 50}}};
  Cascade c2{"c2", {{"q0", "w", 0, 0}, {"q1", "u", 1, 300}, {"q2", "w", 2, 0}}};
  const auto profiles = compute_user_profiles({c1, c2});
  EXPECT_DOUBLE_EQ(profiles.at("u").mean_followers, 200.0);
  EXPECT_EQ(profiles.at("u").n_events, 2u);
  EXPECT_DOUBLE_EQ(profiles.at("v").mean_followers, 50.0);
  EXPECT_DOUBLE_EQ(profiles.at("w").mean_followers, 0.0);
}

TEST(Ingest, RejectionsSerialize) {
  std::vector<Rejection> rej{{3, "c9", RejectReason::TooSmall, "1 event"}};
  std::ostringstream out;
  write_rejections(out, rej);
  EXPECT_NE(out.str().find(R"("cascade_id":"c9")"), std::string::npos);
  EXPECT_NE(out.str().find(R"("reason":"TOO_SMALL")"), std::string::npos);
}
