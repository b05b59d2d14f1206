#include "aligncheck/textgrid.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include "aligncheck/errors.hpp"
#include "aligncheck/util.hpp"

namespace aligncheck {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';  // Praat escapes quotes by doubling
  }
  out += '"';
  return out;
}

std::string num(double v) { return util::format_double_shortest(v); }

// Fills holes between intervals (and at the edges) with empty text so the
// tier tiles [xmin, xmax], which is what Praat expects.
std::vector<TextGridInterval> tile(double xmin, double xmax,
                                   const std::vector<TextGridInterval>& in) {
  std::vector<TextGridInterval> out;
  double cursor = xmin;
  for (TextGridInterval iv : in) {
    if (iv.xmin > cursor) out.push_back({cursor, iv.xmin, ""});
    iv.xmin = std::max(iv.xmin, cursor);  // clamp 1 ms jitter overlaps
    if (iv.xmax <= iv.xmin) continue;
    out.push_back(iv);
    cursor = iv.xmax;
  }
  if (cursor < xmax) out.push_back({cursor, xmax, ""});
  if (out.empty()) out.push_back({xmin, xmax, ""});
  return out;
}

struct LineReader {
  std::vector<std::string> lines;
  std::size_t pos = 0;

  explicit LineReader(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }

  bool done() const { return pos >= lines.size(); }

  // Next "key = value" line whose key matches; skips blank lines.
  std::string expect(const std::string& key) {
    while (pos < lines.size()) {
      const std::string& raw = lines[pos];
      std::size_t b = raw.find_first_not_of(" \t");
      if (b == std::string::npos) {
        ++pos;
        continue;
      }
      ++pos;
      const std::string line = raw.substr(b);
      if (line.rfind(key, 0) == 0) {
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) return "";
        std::size_t v = line.find_first_not_of(" \t", eq + 1);
        return v == std::string::npos ? "" : line.substr(v);
      }
      throw ParseError("TextGrid: expected '" + key + "', got '" + line + "'",
                       pos);
    }
    throw ParseError("TextGrid: unexpected end of file, expected '" + key + "'",
                     pos);
  }

  // Structural lines like `item []:` or `intervals [3]:`.
  void expect_header(const std::string& prefix) {
    while (pos < lines.size()) {
      const std::string& raw = lines[pos];
      std::size_t b = raw.find_first_not_of(" \t");
      if (b == std::string::npos) {
        ++pos;
        continue;
      }
      ++pos;
      if (raw.compare(b, prefix.size(), prefix) == 0) return;
      throw ParseError("TextGrid: expected '" + prefix + "', got '" +
                           raw.substr(b) + "'",
                       pos);
    }
    throw ParseError("TextGrid: unexpected end of file, expected '" + prefix +
                         "'",
                     pos);
  }
};

double parse_num(const std::string& v, std::size_t line) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str()) throw ParseError("TextGrid: bad number '" + v + "'", line);
  return d;
}

std::string unquote(const std::string& v, std::size_t line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
    throw ParseError("TextGrid: bad string '" + v + "'", line);
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '"' && i + 2 < v.size() && v[i + 1] == '"') {
      out += '"';
      ++i;
    } else {
      out += v[i];
    }
  }
  return out;
}

}  // namespace

std::string write_textgrid(const TextGridDoc& doc) {
  std::ostringstream out;
  out << "File type = \"ooTextFile\"\n";
  out << "Object class = \"TextGrid\"\n";
  out << "\n";
  out << "xmin = " << num(doc.xmin) << "\n";
  out << "xmax = " << num(doc.xmax) << "\n";
  out << "tiers? <exists>\n";
  out << "size = " << doc.tiers.size() << "\n";
  out << "item []:\n";
  for (std::size_t t = 0; t < doc.tiers.size(); ++t) {
    const auto& tier = doc.tiers[t];
    out << "    item [" << (t + 1) << "]:\n";
    out << "        class = \"IntervalTier\"\n";
    out << "        name = " << quote(tier.name) << "\n";
    out << "        xmin = " << num(tier.xmin) << "\n";
    out << "        xmax = " << num(tier.xmax) << "\n";
    out << "        intervals: size = " << tier.intervals.size() << "\n";
    for (std::size_t i = 0; i < tier.intervals.size(); ++i) {
      const auto& iv = tier.intervals[i];
      out << "        intervals [" << (i + 1) << "]:\n";
      out << "            xmin = " << num(iv.xmin) << "\n";
      out << "            xmax = " << num(iv.xmax) << "\n";
      out << "            text = " << quote(iv.text) << "\n";
    }
  }
  return out.str();
}

TextGridDoc parse_textgrid(const std::string& text) {
  LineReader r(text);
  TextGridDoc doc;
  if (unquote(r.expect("File type"), r.pos) != "ooTextFile") {
    throw ParseError("TextGrid: not an ooTextFile", r.pos);
  }
  if (unquote(r.expect("Object class"), r.pos) != "TextGrid") {
    throw ParseError("TextGrid: not a TextGrid object", r.pos);
  }
  doc.xmin = parse_num(r.expect("xmin"), r.pos);
  doc.xmax = parse_num(r.expect("xmax"), r.pos);
  r.expect_header("tiers?");
  const auto n_tiers =
      static_cast<std::size_t>(parse_num(r.expect("size"), r.pos));
  r.expect_header("item []:");
  for (std::size_t t = 0; t < n_tiers; ++t) {
    r.expect_header("item [");
    TextGridTier tier;
    const std::string cls = unquote(r.expect("class"), r.pos);
    if (cls != "IntervalTier") {
      throw ParseError("TextGrid: unsupported tier class '" + cls + "'", r.pos);
    }
    tier.name = unquote(r.expect("name"), r.pos);
    tier.xmin = parse_num(r.expect("xmin"), r.pos);
    tier.xmax = parse_num(r.expect("xmax"), r.pos);
    const auto n_iv =
        static_cast<std::size_t>(parse_num(r.expect("intervals: size"), r.pos));
    for (std::size_t i = 0; i < n_iv; ++i) {
      r.expect_header("intervals [");
      TextGridInterval iv;
      iv.xmin = parse_num(r.expect("xmin"), r.pos);
      iv.xmax = parse_num(r.expect("xmax"), r.pos);
      iv.text = unquote(r.expect("text"), r.pos);
      tier.intervals.push_back(std::move(iv));
    }
    doc.tiers.push_back(std::move(tier));
  }
  return doc;
}

TextGridDoc textgrid_from_regions(const RecordingAlignment& alignment,
                                  const std::vector<SuspicionRegion>& regions) {
  const double xmax = alignment.total_duration_s;
  for (const auto& r : regions) {
    if (r.start_s < 0.0 || r.end_s > xmax + 1e-9) {
      throw RegionOutOfBoundsError(
          "region [" + std::to_string(r.start_s) + ", " +
          std::to_string(r.end_s) + ") outside recording of " +
          std::to_string(xmax) + " s");
    }
  }

  TextGridDoc doc;
  doc.xmin = 0.0;
  doc.xmax = xmax;

  TextGridTier phone_tier{"phone", 0.0, xmax, {}};
  for (const auto& p : alignment.phones) {
    if (p.end_s > p.start_s) {
      phone_tier.intervals.push_back({p.start_s, p.end_s, p.phone_label});
    }
  }
  phone_tier.intervals = tile(0.0, xmax, phone_tier.intervals);
  doc.tiers.push_back(std::move(phone_tier));

  TextGridTier word_tier{"word", 0.0, xmax, {}};
  for (const auto& w : alignment.words) {
    if (w.end_s > w.start_s) {
      word_tier.intervals.push_back({w.start_s, w.end_s, w.word_label});
    }
  }
  word_tier.intervals = tile(0.0, xmax, word_tier.intervals);
  doc.tiers.push_back(std::move(word_tier));

  std::map<std::string, std::vector<TextGridInterval>> by_feature;
  for (const auto& r : regions) {
    by_feature[std::string(feature_name(r.feature))].push_back(
        {r.start_s, r.end_s, std::string(feature_name(r.feature))});
  }
  for (auto& [name, ivs] : by_feature) {  // std::map iterates alphabetically
    std::sort(ivs.begin(), ivs.end(),
              [](const auto& a, const auto& b) { return a.xmin < b.xmin; });
    TextGridTier tier{name, 0.0, xmax, tile(0.0, xmax, ivs)};
    doc.tiers.push_back(std::move(tier));
  }
  return doc;
}

std::string write_textgrid_regions(const RecordingAlignment& alignment,
                                   const std::vector<SuspicionRegion>& regions) {
  return write_textgrid(textgrid_from_regions(alignment, regions));
}

}  // namespace aligncheck
