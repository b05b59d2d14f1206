#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"
#include "aligncheck/regions.hpp"

namespace aligncheck {

struct RatingRecord {
  std::string rec_id;
  double rating = 0.0;  // 0 (very poor) .. 10 (very good)
};

// JSON-Lines alignment records, one phone per line:
//   {"rec_id":"a","phone":"AA1","start_s":0.5,"end_s":0.6,
//    "log_prob":-7.1,"word_index":0,"word":"cat"}
// word_index null (or omitted) marks silence. Optional per-recording header
// lines override the derived totals:
//   {"rec_id":"a","total_duration_s":62.0,"word_count":180}
// Returns validated recordings keyed by rec_id. Throws ParseError with the
// line number; validation errors carry the rec_id.
std::map<std::string, RecordingAlignment> parse_alignment_records(std::istream& in);
std::map<std::string, RecordingAlignment> parse_alignment_file(const std::string& path);

// CSV with header "rec_id,rating". Ratings must lie in [0, 10].
std::vector<RatingRecord> parse_ratings_csv(std::istream& in);

// The inverse of parse_alignment_records for one recording: a header line
// followed by one line per phone. Reload reproduces the recording exactly.
std::string write_alignment_jsonl(const RecordingAlignment& alignment);

std::string write_ratings_csv(const std::vector<RatingRecord>& ratings);

// CSV with header "rec_id,feature,start_s,end_s,peak_score".
std::string write_regions_csv(const std::vector<SuspicionRegion>& regions);
std::vector<SuspicionRegion> parse_regions_csv(std::istream& in);

}  // namespace aligncheck
