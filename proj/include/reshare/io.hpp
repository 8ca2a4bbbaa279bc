#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "reshare/reconstruct.hpp"

namespace reshare {

/// 12 significant digits, shortest form (printf %.12g).
std::string format_real(double x);

/// Quotes and escapes a string as a JSON string literal.
std::string json_quote(std::string_view s);

/// One trees.jsonl line, without the trailing newline.
std::string tree_record_json(const TreeRecord& record);

/// Parses one trees.jsonl line. Throws Error(Parse).
TreeRecord parse_tree_record(std::string_view line);

/// Calls `fn` for every record in a trees.jsonl stream.
void read_tree_records(std::istream& in, const std::function<void(TreeRecord&&)>& fn);
void read_tree_records_file(const std::string& path, const std::function<void(TreeRecord&&)>& fn);

}  // namespace reshare
