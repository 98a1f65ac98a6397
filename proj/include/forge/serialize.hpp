#pragma once

// Canonical JSON form of a NetworkSpec.
//
//   {"version": 1, "name": ..., "input": {"h", "w", "c"}, "classes", "m", "f",
//    "reuse_shortcuts", "stages": [{"blocks", "channels",
//    "relu_layout": [{"site", "active", "reuse_n"}, ...]}, ...]}
//
// serialize() always emits fields in this order with one ReLU site per line,
// so serialize(deserialize(t)) == t for any document serialize() produced.

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include "forge/error.hpp"
#include "forge/network_ir.hpp"
#include "json.hpp"

namespace forge {

inline constexpr int kSpecVersion = 1;

inline std::string serialize(const NetworkSpec& spec) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"version\": " << kSpecVersion << ",\n";
  os << "  \"name\": " << nlohmann::json(spec.name).dump() << ",\n";
  os << "  \"input\": {\"h\": " << spec.input.height << ", \"w\": " << spec.input.width
     << ", \"c\": " << spec.input.channels << "},\n";
  os << "  \"classes\": " << spec.num_classes << ",\n";
  os << "  \"m\": " << spec.base_channels << ",\n";
  os << "  \"f\": " << spec.kernel_size << ",\n";
  os << "  \"reuse_shortcuts\": " << (spec.reuse_shortcuts ? "true" : "false") << ",\n";
  os << "  \"stages\": [\n";
  for (std::size_t k = 0; k < spec.stages.size(); ++k) {
    const auto& st = spec.stages[k];
    os << "    {\n";
    os << "      \"blocks\": " << st.blocks << ",\n";
    os << "      \"channels\": " << st.channels << ",\n";
    os << "      \"relu_layout\": [\n";
    for (std::size_t i = 0; i < st.relu_layout.size(); ++i) {
      const auto& s = st.relu_layout[i];
      os << "        {\"site\": " << s.site << ", \"active\": " << (s.active ? "true" : "false")
         << ", \"reuse_n\": " << s.reuse_n << "}" << (i + 1 < st.relu_layout.size() ? "," : "") << "\n";
    }
    os << "      ]\n";
    os << "    }" << (k + 1 < spec.stages.size() ? "," : "") << "\n";
  }
  os << "  ]\n";
  os << "}\n";
  return os.str();
}

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

inline std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

class SpecReader {
 public:
  explicit SpecReader(const std::string& text) : text_(text) {}

  void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ParseError("expected an object", 0, where);
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
      if (!ok.count(key)) throw ParseError("unknown field in " + where, line_of_key(text_, key), key);
    for (const auto& key : ok)
      if (!obj.contains(key) && key != "reuse_shortcuts")
        throw ParseError("missing field in " + where, 0, key);
  }

  int integer(const nlohmann::json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ParseError("expected an integer", line_of_key(text_, key), key);
    return v.get<int>();
  }

  bool boolean(const nlohmann::json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ParseError("expected true or false", line_of_key(text_, key), key);
    return v.get<bool>();
  }

 private:
  const std::string& text_;
};

}  // namespace detail

inline NetworkSpec deserialize(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), detail::line_of_offset(text, e.byte));
  }
  detail::SpecReader r(text);
  r.check_keys(doc, {"version", "name", "input", "classes", "m", "f", "reuse_shortcuts", "stages"}, "network");
  const int version = r.integer(doc, "version");
  if (version != kSpecVersion)
    throw ParseError("unsupported spec version " + std::to_string(version), detail::line_of_key(text, "version"),
                     "version");
  NetworkSpec spec;
  if (!doc.at("name").is_string()) throw ParseError("expected a string", detail::line_of_key(text, "name"), "name");
  spec.name = doc.at("name").get<std::string>();
  const auto& in = doc.at("input");
  r.check_keys(in, {"h", "w", "c"}, "input");
  spec.input = {r.integer(in, "h"), r.integer(in, "w"), r.integer(in, "c")};
  spec.num_classes = r.integer(doc, "classes");
  spec.base_channels = r.integer(doc, "m");
  spec.kernel_size = r.integer(doc, "f");
  if (doc.contains("reuse_shortcuts")) spec.reuse_shortcuts = r.boolean(doc, "reuse_shortcuts");
  const auto& stages = doc.at("stages");
  if (!stages.is_array()) throw ParseError("expected an array", detail::line_of_key(text, "stages"), "stages");
  for (const auto& st : stages) {
    r.check_keys(st, {"blocks", "channels", "relu_layout"}, "stage");
    StageSpec stage;
    stage.blocks = r.integer(st, "blocks");
    stage.channels = r.integer(st, "channels");
    const auto& layout = st.at("relu_layout");
    if (!layout.is_array())
      throw ParseError("expected an array", detail::line_of_key(text, "relu_layout"), "relu_layout");
    for (const auto& s : layout) {
      r.check_keys(s, {"site", "active", "reuse_n"}, "relu site");
      stage.relu_layout.push_back({r.integer(s, "site"), r.boolean(s, "active"), r.integer(s, "reuse_n")});
    }
    spec.stages.push_back(std::move(stage));
  }
  validate(spec);
  return spec;
}

inline NetworkSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_spec(const NetworkSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write spec file '" + path + "'");
  out << serialize(spec);
}

}  // namespace forge
