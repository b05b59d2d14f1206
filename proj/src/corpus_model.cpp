#include "aligncheck/corpus_model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "aligncheck/errors.hpp"
#include "aligncheck/stats.hpp"

namespace aligncheck {

namespace {

using nlohmann::ordered_json;

double q_or_zero(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.0;
  return stats::q_sigmoid(a, b);
}

template <typename Fn>
void for_each_phone(std::span<const RecordingAlignment> corpus,
                    const TrainingOptions& opt, Fn&& fn) {
  for (const auto& rec : corpus) {
    if (opt.exclude_rec && rec.rec_id == *opt.exclude_rec) continue;
    for (std::size_t i = 0; i < rec.phones.size(); ++i) fn(rec, i);
  }
}

double lookup(const std::optional<double>& v, double fallback) {
  return v ? *v : fallback;
}

}  // namespace

bool phone_scorable(const PhoneInstance& p) {
  const double d = p.duration_s();
  return d > 0.0 && d < kScorableMaxS;
}

bool phone_in_band(const PhoneInstance& p, const TrainingOptions& opt) {
  const double d = p.duration_s();
  return d >= opt.band_lo_s && d <= opt.band_hi_s;
}

double PhoneClassStats::logp_rate(const std::string& label) const {
  auto it = classes.find(label);
  return lookup(it != classes.end() ? it->second.logp_rate : std::nullopt,
                *global.logp_rate);
}

double PhoneClassStats::duration_median(const std::string& label) const {
  auto it = classes.find(label);
  return lookup(it != classes.end() ? it->second.duration_median : std::nullopt,
                *global.duration_median);
}

double PhoneClassStats::log_duration_median(const std::string& label) const {
  auto it = classes.find(label);
  return lookup(
      it != classes.end() ? it->second.log_duration_median : std::nullopt,
      *global.log_duration_median);
}

double PhoneClassStats::log_duration_mad(const std::string& label) const {
  auto it = classes.find(label);
  return lookup(it != classes.end() ? it->second.log_duration_mad : std::nullopt,
                *global.log_duration_mad);
}

PhoneClassStats train_phone_stats(std::span<const RecordingAlignment> corpus,
                                  const TrainingOptions& opt) {
  // Gather per-class samples; map keeps class order deterministic.
  std::map<std::string, std::vector<double>> band_rates, band_durs, log_durs;
  std::vector<double> all_band_rates, all_band_durs, all_log_durs;

  for_each_phone(corpus, opt, [&](const RecordingAlignment& rec, std::size_t i) {
    const auto& p = rec.phones[i];
    const double d = p.duration_s();
    if (phone_in_band(p, opt)) {
      const double rate = p.log_prob / d;
      band_rates[p.phone_label].push_back(rate);
      band_durs[p.phone_label].push_back(d);
      all_band_rates.push_back(rate);
      all_band_durs.push_back(d);
    }
    if (phone_scorable(p)) {
      const double ld = std::log(d);
      log_durs[p.phone_label].push_back(ld);
      all_log_durs.push_back(ld);
    }
  });

  if (all_log_durs.empty()) {
    throw EmptyCorpusError(
        "no scorable phones in corpus" +
        std::string(opt.exclude_rec ? " after excluding '" + *opt.exclude_rec + "'"
                                    : ""));
  }

  PhoneClassStats out;
  // Global fallbacks: pooled medians. When the training band is empty
  // corpus-wide, fall back to the scorable pool so lookups stay defined.
  if (!all_band_rates.empty()) {
    out.global.logp_rate = stats::median(all_band_rates);
    out.global.duration_median = stats::median(all_band_durs);
  } else {
    std::vector<double> rates, durs;
    for_each_phone(corpus, opt, [&](const RecordingAlignment& rec, std::size_t i) {
      const auto& p = rec.phones[i];
      if (phone_scorable(p)) {
        rates.push_back(p.log_prob / p.duration_s());
        durs.push_back(p.duration_s());
      }
    });
    out.global.logp_rate = stats::median(rates);
    out.global.duration_median = stats::median(durs);
  }
  const double global_delta = stats::median(all_log_durs);
  out.global.log_duration_median = global_delta;
  {
    std::vector<double> dev;
    dev.reserve(all_log_durs.size());
    for (double v : all_log_durs) dev.push_back(std::abs(v - global_delta));
    out.global.log_duration_mad = stats::median(dev);
  }

  for (const auto& [label, rates] : band_rates) {
    out.classes[label].logp_rate = stats::median(rates);
    out.classes[label].duration_median = stats::median(band_durs[label]);
  }
  for (const auto& [label, lds] : log_durs) {
    const double delta = stats::median(lds);
    std::vector<double> dev;
    dev.reserve(lds.size());
    for (double v : lds) dev.push_back(std::abs(v - delta));
    out.classes[label].log_duration_median = delta;
    out.classes[label].log_duration_mad = stats::median(dev);
  }
  return out;
}

std::array<double, kLogpFeatureCount> logp_features(
    const RecordingAlignment& alignment, std::size_t i,
    const PhoneClassStats& stats_) {
  const auto& phones = alignment.phones;
  const auto& p = phones[i];
  std::array<double, kLogpFeatureCount> f{};
  const double d_self = stats_.duration_median(p.phone_label);
  const double lam_self = stats_.logp_rate(p.phone_label);
  f[0] = std::log(p.duration_s() / d_self);
  if (i > 0) {
    const auto& prev = phones[i - 1];
    f[1] = std::log(d_self / stats_.duration_median(prev.phone_label));
    f[2] = lam_self - stats_.logp_rate(prev.phone_label);
  }
  if (i + 1 < phones.size()) {
    const auto& next = phones[i + 1];
    f[3] = std::log(d_self / stats_.duration_median(next.phone_label));
    f[4] = lam_self - stats_.logp_rate(next.phone_label);
  }
  return f;
}

std::array<double, kDurationFeatureCount> duration_features(
    const RecordingAlignment& alignment, std::size_t i,
    const PhoneClassStats& stats_) {
  const auto& phones = alignment.phones;
  const auto& p = phones[i];
  std::array<double, kDurationFeatureCount> f{};
  f[0] = 1.0;
  const double d_self = stats_.duration_median(p.phone_label);
  const double dur_self = p.duration_s();

  std::size_t idx = 1;
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = -kDurationNeighborReach; k <= kDurationNeighborReach; ++k) {
      if (k == 0) continue;
      const long long j = static_cast<long long>(i) + k;
      if (j < 0 || j >= static_cast<long long>(phones.size())) {
        f[idx++] = 0.0;
        continue;
      }
      const auto& nb = phones[static_cast<std::size_t>(j)];
      const double d_nb = stats_.duration_median(nb.phone_label);
      if (pass == 0) {
        // Neighbour duration relative to its median vs. ours to ours.
        f[idx++] = q_or_zero(d_self * nb.duration_s(), d_nb * dur_self);
      } else {
        f[idx++] = q_or_zero(d_self, d_nb);
      }
    }
  }
  return f;
}

namespace {

template <typename FeatureFn, typename ResponseFn>
std::vector<double> fit_predictor(std::span<const RecordingAlignment> corpus,
                                  const TrainingOptions& opt,
                                  std::size_t n_features, std::size_t min_obs,
                                  FeatureFn&& features, ResponseFn&& response,
                                  const char* what) {
  std::vector<std::array<double, kDurationFeatureCount>> rows;  // padded
  std::vector<double> y;
  for_each_phone(corpus, opt, [&](const RecordingAlignment& rec, std::size_t i) {
    if (!phone_in_band(rec.phones[i], opt)) return;
    std::array<double, kDurationFeatureCount> padded{};
    features(rec, i, padded);
    rows.push_back(padded);
    y.push_back(response(rec, i));
  });
  if (rows.size() < min_obs) {
    throw TooFewObservationsError(std::string(what) + ": " +
                                  std::to_string(rows.size()) +
                                  " qualifying phones, need " +
                                  std::to_string(min_obs));
  }
  stats::Matrix x(rows.size(), n_features);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < n_features; ++c) x.at(r, c) = rows[r][c];
  }
  std::vector<std::string> labels(n_features);
  for (std::size_t c = 0; c < n_features; ++c) {
    labels[c] = "f" + std::to_string(c);
  }
  return stats::ols_fit(x, y, std::move(labels), /*intercept=*/false)
      .coefficients;
}

}  // namespace

std::vector<double> train_logp_predictor(std::span<const RecordingAlignment> corpus,
                                         const PhoneClassStats& stats_,
                                         const TrainingOptions& opt) {
  return fit_predictor(
      corpus, opt, kLogpFeatureCount, opt.min_logp_obs,
      [&](const RecordingAlignment& rec, std::size_t i,
          std::array<double, kDurationFeatureCount>& padded) {
        const auto f = logp_features(rec, i, stats_);
        std::copy(f.begin(), f.end(), padded.begin());
      },
      [&](const RecordingAlignment& rec, std::size_t i) {
        const auto& p = rec.phones[i];
        return p.log_prob / p.duration_s() - stats_.logp_rate(p.phone_label);
      },
      "logp predictor");
}

std::vector<double> train_duration_predictor(
    std::span<const RecordingAlignment> corpus, const PhoneClassStats& stats_,
    const TrainingOptions& opt) {
  return fit_predictor(
      corpus, opt, kDurationFeatureCount, opt.min_duration_obs,
      [&](const RecordingAlignment& rec, std::size_t i,
          std::array<double, kDurationFeatureCount>& padded) {
        padded = duration_features(rec, i, stats_);
      },
      [&](const RecordingAlignment& rec, std::size_t i) {
        const auto& p = rec.phones[i];
        return std::log(p.duration_s()) -
               stats_.log_duration_median(p.phone_label);
      },
      "duration predictor");
}

namespace {

void check_scorable(const PhoneInstance& p) {
  if (!phone_scorable(p)) {
    throw PhoneExcludedError("phone '" + p.phone_label + "' at " +
                             std::to_string(p.start_s) +
                             " s has duration outside (0, 1) s");
  }
}

}  // namespace

double predict_logp_rate(const RecordingAlignment& alignment, std::size_t i,
                         const CorpusModel& model) {
  const auto& p = alignment.phones[i];
  check_scorable(p);
  const auto f = logp_features(alignment, i, model.stats);
  double pred = model.stats.logp_rate(p.phone_label);
  for (std::size_t k = 0; k < kLogpFeatureCount; ++k) {
    pred += model.logp_weights[k] * f[k];
  }
  return pred;
}

double predict_log_duration(const RecordingAlignment& alignment, std::size_t i,
                            const CorpusModel& model) {
  const auto& p = alignment.phones[i];
  check_scorable(p);
  const auto f = duration_features(alignment, i, model.stats);
  double pred = model.stats.log_duration_median(p.phone_label);
  for (std::size_t k = 0; k < kDurationFeatureCount; ++k) {
    pred += model.duration_weights[k] * f[k];
  }
  return pred;
}

CorpusModel train_corpus_model(std::span<const RecordingAlignment> corpus,
                               const TrainingOptions& opt) {
  CorpusModel model;
  model.stats = train_phone_stats(corpus, opt);
  model.logp_weights = train_logp_predictor(corpus, model.stats, opt);
  model.duration_weights = train_duration_predictor(corpus, model.stats, opt);
  model.band_lo_s = opt.band_lo_s;
  model.band_hi_s = opt.band_hi_s;
  model.excluded_rec = opt.exclude_rec;
  return model;
}

namespace {

ordered_json entry_to_json(const PhoneClassEntry& e) {
  ordered_json j;
  j["lambda"] = e.logp_rate ? ordered_json(*e.logp_rate) : ordered_json(nullptr);
  j["duration_median_s"] =
      e.duration_median ? ordered_json(*e.duration_median) : ordered_json(nullptr);
  j["log_duration_median"] = e.log_duration_median
                                 ? ordered_json(*e.log_duration_median)
                                 : ordered_json(nullptr);
  j["log_duration_mad"] = e.log_duration_mad ? ordered_json(*e.log_duration_mad)
                                             : ordered_json(nullptr);
  return j;
}

PhoneClassEntry entry_from_json(const ordered_json& j) {
  PhoneClassEntry e;
  if (!j.at("lambda").is_null()) e.logp_rate = j.at("lambda").get<double>();
  if (!j.at("duration_median_s").is_null()) {
    e.duration_median = j.at("duration_median_s").get<double>();
  }
  if (!j.at("log_duration_median").is_null()) {
    e.log_duration_median = j.at("log_duration_median").get<double>();
  }
  if (!j.at("log_duration_mad").is_null()) {
    e.log_duration_mad = j.at("log_duration_mad").get<double>();
  }
  return e;
}

}  // namespace

std::string serialize_model(const CorpusModel& model) {
  ordered_json j;
  j["format"] = "aligncheck-corpus-model";
  j["version"] = 1;
  j["training_band_s"] = {model.band_lo_s, model.band_hi_s};
  j["excluded_rec"] = model.excluded_rec ? ordered_json(*model.excluded_rec)
                                         : ordered_json(nullptr);
  j["global"] = entry_to_json(model.stats.global);
  ordered_json classes = ordered_json::object();
  for (const auto& [label, entry] : model.stats.classes) {
    classes[label] = entry_to_json(entry);
  }
  j["classes"] = std::move(classes);
  j["logp_weights"] = model.logp_weights;
  j["duration_weights"] = model.duration_weights;
  return j.dump(2) + "\n";
}

CorpusModel parse_model(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "aligncheck-corpus-model") {
      throw ParseError("model: unrecognized format field");
    }
    CorpusModel model;
    model.band_lo_s = j.at("training_band_s").at(0).get<double>();
    model.band_hi_s = j.at("training_band_s").at(1).get<double>();
    if (!j.at("excluded_rec").is_null()) {
      model.excluded_rec = j.at("excluded_rec").get<std::string>();
    }
    model.stats.global = entry_from_json(j.at("global"));
    for (const auto& [label, entry] : j.at("classes").items()) {
      model.stats.classes[label] = entry_from_json(entry);
    }
    model.logp_weights = j.at("logp_weights").get<std::vector<double>>();
    model.duration_weights = j.at("duration_weights").get<std::vector<double>>();
    if (model.logp_weights.size() != kLogpFeatureCount ||
        model.duration_weights.size() != kDurationFeatureCount) {
      throw ParseError("model: wrong weight vector length");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

}  // namespace aligncheck
