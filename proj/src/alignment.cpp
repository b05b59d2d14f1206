#include "aligncheck/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aligncheck/errors.hpp"

namespace aligncheck {

std::vector<WordInstance> derive_words(const std::vector<PhoneInstance>& phones) {
  std::vector<WordInstance> words;
  std::size_t i = 0;
  while (i < phones.size()) {
    if (phones[i].is_silence()) {
      ++i;
      continue;
    }
    const int idx = *phones[i].word_index;
    std::size_t j = i;
    while (j < phones.size() && phones[j].word_index &&
           *phones[j].word_index == idx) {
      ++j;
    }
    WordInstance w;
    w.first_phone = i;
    w.phone_count = j - i;
    w.start_s = phones[i].start_s;
    w.end_s = phones[j - 1].end_s;
    for (std::size_t k = i; k < j; ++k) {
      if (phones[k].word_label) {
        w.word_label = *phones[k].word_label;
        break;
      }
    }
    words.push_back(std::move(w));
    i = j;
  }
  return words;
}

RecordingAlignment validate_alignment(std::string rec_id,
                                      std::vector<PhoneInstance> phones,
                                      double total_duration_s) {
  const std::string ctx = "rec '" + rec_id + "': ";

  std::stable_sort(phones.begin(), phones.end(),
                   [](const PhoneInstance& a, const PhoneInstance& b) {
                     return a.start_s < b.start_s;
                   });

  for (const auto& p : phones) {
    if (!(p.start_s >= 0.0)) {
      throw ValidationError(ctx + "phone '" + p.phone_label +
                            "' starts before 0");
    }
    if (p.end_s < p.start_s) {
      throw NegativeDurationError(ctx + "phone '" + p.phone_label +
                                  "' ends before it starts");
    }
  }
  for (std::size_t i = 0; i + 1 < phones.size(); ++i) {
    if (phones[i].end_s > phones[i + 1].start_s + kOverlapToleranceS) {
      throw OverlapError(ctx + "phones '" + phones[i].phone_label + "' and '" +
                         phones[i + 1].phone_label + "' overlap by more than " +
                         std::to_string(kOverlapToleranceS) + " s at " +
                         std::to_string(phones[i + 1].start_s) + " s");
    }
  }

  // Each word index must occupy exactly one contiguous run, in increasing
  // order. A word split by a silence phone is a data error, not something
  // to repair silently.
  std::set<int> seen;
  int last_run_index = 0;
  bool any_run = false;
  std::size_t i = 0;
  while (i < phones.size()) {
    if (phones[i].is_silence()) {
      ++i;
      continue;
    }
    const int idx = *phones[i].word_index;
    if (seen.count(idx)) {
      throw DanglingWordIndexError(ctx + "word index " + std::to_string(idx) +
                                   " appears in more than one run");
    }
    if (any_run && idx < last_run_index) {
      throw DanglingWordIndexError(ctx + "word index " + std::to_string(idx) +
                                   " out of order");
    }
    seen.insert(idx);
    last_run_index = idx;
    any_run = true;
    while (i < phones.size() && phones[i].word_index &&
           *phones[i].word_index == idx) {
      ++i;
    }
  }

  const double last_end = phones.empty() ? 0.0 : phones.back().end_s;
  if (total_duration_s < last_end) {
    throw ValidationError(ctx + "total_duration_s " +
                          std::to_string(total_duration_s) +
                          " is less than the last phone end " +
                          std::to_string(last_end));
  }

  RecordingAlignment out;
  out.rec_id = std::move(rec_id);
  out.phones = std::move(phones);
  out.words = derive_words(out.phones);
  out.total_duration_s = total_duration_s;
  out.word_count = out.words.size();
  return out;
}

}  // namespace aligncheck
