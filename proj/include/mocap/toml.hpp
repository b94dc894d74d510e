#pragma once

#include "mocap/common.hpp"

#include <json.hpp>

#include <cctype>
#include <istream>
#include <string>

namespace mocap {

// Minimal TOML subset sufficient for run configs: comments, [table],
// [[array-of-table]], and single-line key = value with strings, booleans,
// numbers and flat arrays. Parsed into a JSON document.
namespace toml {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline nlohmann::json parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ParseError("line " + std::to_string(line_no) + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ParseError("line " + std::to_string(line_no) + ": unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::size_t start = 0;
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i == body.size() || (body[i] == ',' && depth == 0 && !in_str)) {
        std::string item = trim(body.substr(start, i - start));
        if (!item.empty()) arr.push_back(parse_value(item, line_no));
        start = i + 1;
      } else if (body[i] == '"') {
        in_str = !in_str;
      } else if (!in_str && body[i] == '[') {
        ++depth;
      } else if (!in_str && body[i] == ']') {
        --depth;
      }
    }
    return arr;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  try {
    std::size_t used = 0;
    if (v.find_first_of(".eE") == std::string::npos) {
      long long i = std::stoll(v, &used);
      if (used == v.size()) return i;
    } else {
      double d = std::stod(v, &used);
      if (used == v.size()) return d;
    }
  } catch (const std::exception&) {
  }
  throw ParseError("line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

}  // namespace detail

inline nlohmann::json parse(std::istream& in) {
  using detail::trim;
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* target = &root;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) {
      // keep '#' inside quoted strings
      bool in_str = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) { line.erase(i); break; }
      }
    }
    const std::string t = trim(line);
    if (t.empty()) continue;

    if (t.size() > 4 && t.substr(0, 2) == "[[" && t.substr(t.size() - 2) == "]]") {
      const std::string name = trim(t.substr(2, t.size() - 4));
      if (!root.contains(name)) root[name] = nlohmann::json::array();
      root[name].push_back(nlohmann::json::object());
      target = &root[name].back();
      continue;
    }
    if (t.front() == '[' && t.back() == ']') {
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (!root.contains(name)) root[name] = nlohmann::json::object();
      target = &root[name];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
    (*target)[key] = detail::parse_value(t.substr(eq + 1), line_no);
  }
  return root;
}

}  // namespace toml
}  // namespace mocap
