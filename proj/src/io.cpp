#include "reshare/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>

#include "json.hpp"
#include "reshare/error.hpp"

namespace reshare {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string json_quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string tree_record_json(const TreeRecord& record) {
  const bool pdi = record.setting.method == Method::Pdi;
  std::string out;
  out.reserve(96 + 4 * record.tree.parents.size());
  out += "{\"cascade_id\":";
  out += json_quote(record.tree.cascade_id);
  out += ",\"method\":\"";
  out += to_string(record.setting.method);
  out += "\",\"gamma\":";
  out += pdi ? format_real(record.setting.params.gamma) : "null";
  out += ",\"alpha\":";
  out += pdi ? format_real(record.setting.params.alpha) : "null";
  out += ",\"realization\":";
  out += std::to_string(record.tree.realization);
  out += ",\"parents\":[";
  for (std::size_t k = 0; k < record.tree.parents.size(); ++k) {
    if (k > 0) out += ',';
    out += std::to_string(record.tree.parents[k]);
  }
  out += "]}";
  return out;
}

TreeRecord parse_tree_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::Parse, "tree record is not JSON");
  try {
    TreeRecord r;
    r.tree.cascade_id = j.at("cascade_id").get<std::string>();
    const auto method = parse_method(j.at("method").get<std::string>());
    if (!method) throw Error(ErrorCode::Parse, "unknown method in tree record");
    r.setting.method = *method;
    if (r.setting.method == Method::Pdi) {
      r.setting.params.gamma = j.at("gamma").get<double>();
      r.setting.params.alpha = j.at("alpha").get<double>();
    }
    r.tree.realization = j.at("realization").get<std::uint32_t>();
    r.tree.parents = j.at("parents").get<std::vector<std::uint32_t>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad tree record: ") + e.what());
  }
}

void read_tree_records(std::istream& in, const std::function<void(TreeRecord&&)>& fn) {
  if (!in) throw Error(ErrorCode::Io, "tree stream is not readable");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      fn(parse_tree_record(line));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Parse) throw;
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure on tree stream");
}

void read_tree_records_file(const std::string& path,
                            const std::function<void(TreeRecord&&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  read_tree_records(in, fn);
}

}  // namespace reshare
