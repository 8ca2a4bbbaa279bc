#include "reshare/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "reshare/error.hpp"

namespace reshare {

using nlohmann::json;

bool FollowerGraph::add_edge(const std::string& follower, const std::string& followee) {
  if (follower == followee) return false;
  if (!out_[follower].insert(followee).second) return false;
  ++edges_;
  return true;
}

bool FollowerGraph::follows(const std::string& follower, const std::string& followee) const {
  const auto it = out_.find(follower);
  return it != out_.end() && it->second.contains(followee);
}

std::vector<std::pair<std::string, std::string>> FollowerGraph::sorted_edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(edges_);
  for (const auto& [a, targets] : out_)
    for (const auto& b : targets) out.emplace_back(a, b);
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::Malformed: return "MALFORMED";
    case RejectReason::MissingFollowers: return "MISSING_FOLLOWERS";
    case RejectReason::InvalidValue: return "INVALID_VALUE";
    case RejectReason::TimestampDisorder: return "TIMESTAMP_DISORDER";
    case RejectReason::DuplicatePostId: return "DUPLICATE_POST_ID";
    case RejectReason::DuplicateCascadeId: return "DUPLICATE_CASCADE_ID";
    case RejectReason::TooSmall: return "TOO_SMALL";
  }
  return "UNKNOWN";
}

namespace {

struct RecordError {
  RejectReason reason;
  std::string detail;
};

bool read_id(const json& obj, const char* key, std::string& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (it->is_string()) {
    out = it->get<std::string>();
    return !out.empty();
  }
  if (it->is_number_integer()) {
    out = it->dump();
    return true;
  }
  return false;
}

// Integral JSON number; floats are accepted when they hold an integer value.
bool read_integer(const json& v, std::int64_t& out) {
  if (v.is_number_integer()) {
    out = v.get<std::int64_t>();
    return true;
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) return false;
    out = static_cast<std::int64_t>(d);
    return true;
  }
  return false;
}

std::optional<RecordError> parse_record(const json& rec, Cascade& cascade) {
  if (!rec.is_object()) return RecordError{RejectReason::Malformed, "record is not an object"};
  if (!read_id(rec, "cascade_id", cascade.cascade_id))
    return RecordError{RejectReason::Malformed, "missing cascade_id"};
  const auto ev = rec.find("events");
  if (ev == rec.end() || !ev->is_array())
    return RecordError{RejectReason::Malformed, "missing events array"};

  std::optional<RecordError> missing_followers;
  std::optional<RecordError> invalid;
  for (const auto& e : *ev) {
    if (!e.is_object()) return RecordError{RejectReason::Malformed, "event is not an object"};
    ReshareEvent event;
    if (!read_id(e, "post_id", event.post_id))
      return RecordError{RejectReason::Malformed, "event without post_id"};
    if (!read_id(e, "user_id", event.user_id))
      return RecordError{RejectReason::Malformed, "event " + event.post_id + " without user_id"};
    const auto t = e.find("t");
    if (t == e.end() || !read_integer(*t, event.t))
      return RecordError{RejectReason::Malformed, "event " + event.post_id + " without integer t"};
    const auto f = e.find("followers");
    if (f == e.end() || f->is_null()) {
      if (!missing_followers)
        missing_followers = RecordError{RejectReason::MissingFollowers,
                                        "event " + event.post_id + " has no follower count"};
    } else if (!read_integer(*f, event.followers)) {
      return RecordError{RejectReason::Malformed,
                         "event " + event.post_id + " has a non-integer follower count"};
    }
    if ((event.t < 0 || event.followers < 0) && !invalid)
      invalid = RecordError{RejectReason::InvalidValue,
                            "event " + event.post_id + " has a negative t or follower count"};
    cascade.events.push_back(std::move(event));
  }
  if (missing_followers) return missing_followers;
  if (invalid) return invalid;

  std::unordered_set<std::string_view> seen;
  for (const auto& e : cascade.events)
    if (!seen.insert(e.post_id).second)
      return RecordError{RejectReason::DuplicatePostId, "post_id " + e.post_id + " repeats"};

  if (cascade.events.size() < 2)
    return RecordError{RejectReason::TooSmall, "cascade has no reshares"};

  const std::int64_t root_t = cascade.events.front().t;
  for (std::size_t i = 1; i < cascade.events.size(); ++i)
    if (cascade.events[i].t < root_t)
      return RecordError{RejectReason::TimestampDisorder,
                         "reshare " + cascade.events[i].post_id + " predates the original post"};

  std::stable_sort(cascade.events.begin() + 1, cascade.events.end(),
                   [](const ReshareEvent& a, const ReshareEvent& b) {
                     return a.t != b.t ? a.t < b.t : a.post_id < b.post_id;
                   });
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

CascadeParseResult parse_cascades(std::istream& in) {
  if (!in) throw Error(ErrorCode::Io, "cascade stream is not readable");
  CascadeParseResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.records;
    Cascade cascade;
    std::optional<RecordError> err;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      err = RecordError{RejectReason::Malformed, "invalid JSON"};
    } else {
      err = parse_record(rec, cascade);
    }
    if (!err && !ids.insert(cascade.cascade_id).second)
      err = RecordError{RejectReason::DuplicateCascadeId, "cascade_id seen on an earlier line"};
    if (err) {
      result.rejections.push_back(
          Rejection{line_no, cascade.cascade_id, err->reason, std::move(err->detail)});
      continue;
    }
    result.cascades.push_back(std::move(cascade));
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure on cascade stream");
  return result;
}

CascadeParseResult parse_cascades_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_cascades(in);
}

void write_cascades(std::ostream& out, const std::vector<Cascade>& cascades) {
  for (const auto& c : cascades) {
    nlohmann::ordered_json rec;
    rec["cascade_id"] = c.cascade_id;
    auto& events = rec["events"] = nlohmann::ordered_json::array();
    for (const auto& e : c.events) {
      nlohmann::ordered_json ev;
      ev["post_id"] = e.post_id;
      ev["user_id"] = e.user_id;
      ev["t"] = e.t;
      ev["followers"] = e.followers;
      events.push_back(std::move(ev));
    }
    out << rec.dump() << '\n';
  }
}

void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections) {
  for (const auto& r : rejections) {
    nlohmann::ordered_json rec;
    rec["cascade_id"] = r.cascade_id;
    rec["reason"] = std::string(to_string(r.reason));
    rec["line"] = r.line;
    rec["detail"] = r.detail;
    out << rec.dump() << '\n';
  }
}

FollowerParseResult parse_follower_edges(std::istream& in) {
  if (!in) throw Error(ErrorCode::Io, "follower stream is not readable");
  FollowerParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "follower_id,followee_id")
        throw Error(ErrorCode::Parse, "expected header follower_id,followee_id");
      header_seen = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      result.rejections.push_back(RowRejection{line_no, "expected 2 columns"});
      continue;
    }
    const std::string a(trim(row.substr(0, comma)));
    const std::string b(trim(row.substr(comma + 1)));
    if (a.empty() || b.empty()) {
      result.rejections.push_back(RowRejection{line_no, "empty user id"});
      continue;
    }
    if (a == b) {
      ++result.self_loops_dropped;
      continue;
    }
    if (!result.graph.add_edge(a, b)) ++result.duplicates_dropped;
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure on follower stream");
  if (!header_seen) throw Error(ErrorCode::Parse, "follower file is empty");
  return result;
}

FollowerParseResult parse_follower_edges_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_follower_edges(in);
}

void write_follower_edges(std::ostream& out, const FollowerGraph& graph) {
  out << "follower_id,followee_id\n";
  for (const auto& [a, b] : graph.sorted_edges()) out << a << ',' << b << '\n';
}

ProfileMap compute_user_profiles(const std::vector<Cascade>& corpus) {
  std::unordered_map<std::string, std::pair<long double, std::size_t>> acc;
  for (const auto& c : corpus)
    for (const auto& e : c.events) {
      auto& [sum, count] = acc[e.user_id];
      sum += static_cast<long double>(e.followers);
      ++count;
    }
  ProfileMap profiles;
  profiles.reserve(acc.size());
  for (auto& [user, sc] : acc)
    profiles.emplace(user, UserProfile{user, static_cast<double>(sc.first / sc.second), sc.second});
  return profiles;
}

}  // namespace reshare
