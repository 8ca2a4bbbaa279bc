#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "reshare/types.hpp"

namespace reshare {

enum class RejectReason {
  Malformed,
  MissingFollowers,
  InvalidValue,
  TimestampDisorder,
  DuplicatePostId,
  DuplicateCascadeId,
  TooSmall,
};

std::string_view to_string(RejectReason reason);

struct Rejection {
  std::size_t line = 0;  // 1-based input line
  std::string cascade_id;
  RejectReason reason = RejectReason::Malformed;
  std::string detail;
};

struct CascadeParseResult {
  std::vector<Cascade> cascades;
  std::vector<Rejection> rejections;
  std::size_t records = 0;  // non-blank input lines
};

/// Reads line-delimited cascade records. The first listed event is the
/// original post; reshares are ordered by (t, post_id) behind it. A reshare
/// earlier than the original post rejects the record. Throws Error(Io) if the
/// stream cannot be read.
CascadeParseResult parse_cascades(std::istream& in);
CascadeParseResult parse_cascades_file(const std::string& path);

/// Writes cascades in the same line format parse_cascades accepts.
void write_cascades(std::ostream& out, const std::vector<Cascade>& cascades);

void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections);

struct RowRejection {
  std::size_t line = 0;
  std::string detail;
};

struct FollowerParseResult {
  FollowerGraph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
  std::vector<RowRejection> rejections;
};

/// Reads a `follower_id,followee_id` CSV with header.
FollowerParseResult parse_follower_edges(std::istream& in);
FollowerParseResult parse_follower_edges_file(const std::string& path);

void write_follower_edges(std::ostream& out, const FollowerGraph& graph);

/// Mean observed follower count of every user across the corpus.
ProfileMap compute_user_profiles(const std::vector<Cascade>& corpus);

}  // namespace reshare
