#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "flagtune/core.hpp"

namespace flagtune {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline bool has_space(std::string_view s) {
  return s.find_first_of(" \t") != std::string_view::npos;
}

}  // namespace detail

// Tokens for a bare flag name under the given family.
//   gcc-like:  "-f<name>" / "-fno-<name>"   (a leading "-f" on the name is accepted)
//   llvm-like: the pass name / omitted
//   synthetic: the name / omitted
inline FlagDef make_flag(std::string name, CompilerFamily family) {
  switch (family) {
    case CompilerFamily::gcc_like: {
      if (name.rfind("-fno-", 0) == 0) throw ConfigError("write '" + name + "' without the no- prefix");
      if (name.rfind("-f", 0) == 0) name.erase(0, 2);
      return {name, "-f" + name, "-fno-" + name};
    }
    case CompilerFamily::llvm_like:
    case CompilerFamily::synthetic:
      return {name, name, ""};
  }
  return {};
}

// One flag per line. '#' starts a comment. A line is either a bare name or an
// explicit "name|on_token|off_token" triple (off_token may be empty).
inline FlagCatalog parse_catalog(std::istream& in, CompilerFamily family) {
  std::vector<FlagDef> flags;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view view(raw);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const std::string line = detail::trim(view);
    if (line.empty()) continue;

    FlagDef def;
    if (line.find('|') != std::string::npos) {
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, '|')) fields.push_back(detail::trim(field));
      if (line.back() == '|') fields.emplace_back();
      if (fields.size() != 3) throw ParseError(line_no, "expected name|on_token|off_token");
      if (fields[0].empty()) throw ParseError(line_no, "empty flag name");
      if (fields[1].empty()) throw ParseError(line_no, "empty on_token");
      if (fields[1] == fields[2]) throw ParseError(line_no, "on_token equals off_token");
      def = {fields[0], fields[1], fields[2]};
    } else {
      if (detail::has_space(line)) throw ParseError(line_no, "flag name contains whitespace: '" + line + "'");
      try {
        def = make_flag(line, family);
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
    }
    if (detail::has_space(def.name)) throw ParseError(line_no, "flag name contains whitespace");
    if (auto [it, fresh] = first_seen.try_emplace(def.name, line_no); !fresh)
      throw ParseError(line_no, "duplicate flag '" + def.name + "' (first on line " +
                                    std::to_string(it->second) + ")");
    flags.push_back(std::move(def));
  }
  if (flags.empty()) throw ConfigError("empty catalog");
  return FlagCatalog(std::move(flags), family);
}

inline FlagCatalog catalog_from_file(const std::filesystem::path& path,
                                     CompilerFamily family = CompilerFamily::gcc_like) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog " + path.string());
  try {
    return parse_catalog(in, family);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail() + " in " + path.string());
  }
}

// Command-line tokens for `seq`, skipping empty tokens.
inline std::vector<std::string> flag_tokens(const FlagCatalog& catalog, const Sequence& seq) {
  if (seq.size() != catalog.size()) throw Error("sequence width does not match catalog");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& tok = seq[i] ? catalog[i].on_token : catalog[i].off_token;
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace flagtune
