#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spb/bounds.hpp"
#include "spb/io/config.hpp"

namespace spb {

// Text that round-trips the double; "inf"/"nan" otherwise.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Temp file + rename, so no reader sees a partial report.
inline void write_text_atomic(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp + " for writing");
    os << text;
    if (!os) throw Error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json_atomic(const std::filesystem::path &path, const json &j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw CorruptInput("missing " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception &e) {
    throw CorruptInput(path.string() + ": " + e.what());
  }
}

class CsvWriter {
public:
  explicit CsvWriter(const std::string &header) { os_ << header << '\n'; }

  template <typename... Ts> void row(const Ts &...cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(const std::string &s) { return s; }
  static std::string cell(const char *s) { return s; }
  template <typename I, typename = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I i) { return std::to_string(i); }

  std::ostringstream os_;
};

inline json verdict_json(const Verdict &v) {
  return {{"name", v.name},
          {"status", to_string(v.status)},
          {"margin", detail::finite_or_string(v.margin)},
          {"slack", detail::finite_or_string(v.slack)},
          {"note", v.note}};
}

inline std::string indexed_name(const char *stem, std::size_t i, const char *ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu%s", stem, i, ext);
  return buf;
}

} // namespace spb
