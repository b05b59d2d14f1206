#include "aligncheck/ingest.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aligncheck/errors.hpp"
#include "aligncheck/util.hpp"

namespace aligncheck {

namespace {

using nlohmann::json;

double require_number(const json& j, const char* field, std::size_t line) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw ParseError(std::string("missing or non-numeric field '") + field + "'",
                     line);
  }
  return j[field].get<double>();
}

std::string require_string(const json& j, const char* field, std::size_t line) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw ParseError(std::string("missing or non-string field '") + field + "'",
                     line);
  }
  return j[field].get<std::string>();
}

struct PendingRecording {
  std::vector<PhoneInstance> phones;
  std::optional<double> total_override;
  std::optional<std::size_t> word_count_override;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

}  // namespace

std::map<std::string, RecordingAlignment> parse_alignment_records(std::istream& in) {
  std::map<std::string, PendingRecording> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", line_no);
    const std::string rec_id = require_string(j, "rec_id", line_no);
    auto& rec = pending[rec_id];

    if (j.contains("total_duration_s")) {
      if (j.contains("phone")) {
        throw ParseError("line has both 'phone' and 'total_duration_s'", line_no);
      }
      rec.total_override = require_number(j, "total_duration_s", line_no);
      if (j.contains("word_count") && !j["word_count"].is_null()) {
        if (!j["word_count"].is_number_unsigned() &&
            !j["word_count"].is_number_integer()) {
          throw ParseError("non-integer 'word_count'", line_no);
        }
        const auto wc = j["word_count"].get<long long>();
        if (wc < 0) throw ParseError("negative 'word_count'", line_no);
        rec.word_count_override = static_cast<std::size_t>(wc);
      }
      continue;
    }

    PhoneInstance p;
    p.phone_label = require_string(j, "phone", line_no);
    p.start_s = require_number(j, "start_s", line_no);
    p.end_s = require_number(j, "end_s", line_no);
    p.log_prob = require_number(j, "log_prob", line_no);
    if (j.contains("word_index") && !j["word_index"].is_null()) {
      if (!j["word_index"].is_number_integer() &&
          !j["word_index"].is_number_unsigned()) {
        throw ParseError("non-integer 'word_index'", line_no);
      }
      p.word_index = j["word_index"].get<int>();
    }
    if (j.contains("word") && !j["word"].is_null()) {
      if (!j["word"].is_string()) throw ParseError("non-string 'word'", line_no);
      p.word_label = j["word"].get<std::string>();
    }
    rec.phones.push_back(std::move(p));
  }

  std::map<std::string, RecordingAlignment> out;
  for (auto& [rec_id, rec] : pending) {
    const double last_end =
        rec.phones.empty()
            ? 0.0
            : std::max_element(rec.phones.begin(), rec.phones.end(),
                               [](const auto& a, const auto& b) {
                                 return a.end_s < b.end_s;
                               })
                  ->end_s;
    const double total = rec.total_override.value_or(last_end);
    RecordingAlignment a = validate_alignment(rec_id, std::move(rec.phones), total);
    if (rec.word_count_override) a.word_count = *rec.word_count_override;
    out.emplace(rec_id, std::move(a));
  }
  return out;
}

std::map<std::string, RecordingAlignment> parse_alignment_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open alignment file: " + path);
  return parse_alignment_records(in);
}

std::vector<RatingRecord> parse_ratings_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty ratings file", 1);
  ++line_no;
  {
    auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "rec_id" || header[1] != "rating") {
      throw ParseError("expected header 'rec_id,rating'", line_no);
    }
  }
  std::vector<RatingRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
    const double rating = parse_double_field(fields[1], line_no);
    if (rating < 0.0 || rating > 10.0) {
      throw RangeError("line " + std::to_string(line_no) + ": rating " +
                       fields[1] + " outside [0,10]");
    }
    out.push_back({fields[0], rating});
  }
  return out;
}

std::string write_alignment_jsonl(const RecordingAlignment& alignment) {
  using nlohmann::ordered_json;
  std::ostringstream out;
  ordered_json header;
  header["rec_id"] = alignment.rec_id;
  header["total_duration_s"] = alignment.total_duration_s;
  header["word_count"] = alignment.word_count;
  out << header.dump() << '\n';
  for (const auto& p : alignment.phones) {
    ordered_json j;
    j["rec_id"] = alignment.rec_id;
    j["phone"] = p.phone_label;
    j["start_s"] = p.start_s;
    j["end_s"] = p.end_s;
    j["log_prob"] = p.log_prob;
    j["word_index"] =
        p.word_index ? ordered_json(*p.word_index) : ordered_json(nullptr);
    j["word"] = p.word_label ? ordered_json(*p.word_label) : ordered_json(nullptr);
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string write_ratings_csv(const std::vector<RatingRecord>& ratings) {
  std::ostringstream out;
  out << "rec_id,rating\n";
  for (const auto& r : ratings) {
    out << r.rec_id << ',' << util::format_sig9(r.rating) << '\n';
  }
  return out.str();
}

std::string write_regions_csv(const std::vector<SuspicionRegion>& regions) {
  std::ostringstream out;
  out << "rec_id,feature,start_s,end_s,peak_score\n";
  for (const auto& r : regions) {
    out << r.rec_id << ',' << feature_name(r.feature) << ','
        << util::format_sig9(r.start_s) << ',' << util::format_sig9(r.end_s)
        << ',' << util::format_sig9(r.peak_score) << '\n';
  }
  return out.str();
}

std::vector<SuspicionRegion> parse_regions_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty regions file", 1);
  ++line_no;
  {
    auto header = split_csv_line(line);
    if (header.size() != 5 || header[0] != "rec_id" || header[1] != "feature") {
      throw ParseError("expected header 'rec_id,feature,start_s,end_s,peak_score'",
                       line_no);
    }
  }
  std::vector<SuspicionRegion> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5) throw ParseError("expected 5 fields", line_no);
    SuspicionRegion r;
    r.rec_id = fields[0];
    const auto f = feature_from_name(fields[1]);
    if (!f) throw ParseError("unknown feature '" + fields[1] + "'", line_no);
    r.feature = *f;
    r.start_s = parse_double_field(fields[2], line_no);
    r.end_s = parse_double_field(fields[3], line_no);
    r.peak_score = parse_double_field(fields[4], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace aligncheck
