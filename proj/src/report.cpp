#include "aligncheck/report.hpp"

#include <json.hpp>

#include "aligncheck/util.hpp"

namespace aligncheck {

namespace {

using nlohmann::ordered_json;

ordered_json num(double v) { return util::round_sig9(v); }

ordered_json opt_num(const std::optional<double>& v) {
  return v ? num(*v) : ordered_json(nullptr);
}

std::string transform_name(XTransform t) {
  return t == XTransform::Power03 ? "pow0.3" : "raw";
}

std::string transform_name(YTransform t) {
  return t == YTransform::Squared ? "squared" : "raw";
}

}  // namespace

std::string write_report_json(const std::vector<FileScoreRow>& rows,
                              const std::vector<LabeledFit>& fits,
                              const CoincidenceTable& coincidences) {
  ordered_json doc;

  ordered_json jrows = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["rec_id"] = row.rec_id;
    r["rating"] = opt_num(row.rating);
    r["duration_s"] = num(row.duration_s);
    r["word_count"] = row.word_count;
    ordered_json scores;
    for (Feature f : kAllFeatures) {
      const auto it = row.scores.find(f);
      if (it == row.scores.end()) continue;
      ordered_json s;
      s["nd"] = num(it->second.nd);
      s["nw"] = opt_num(it->second.nw);
      s["dd"] = num(it->second.dd);
      scores[std::string(feature_name(f))] = std::move(s);
    }
    r["scores"] = std::move(scores);
    jrows.push_back(std::move(r));
  }
  doc["rows"] = std::move(jrows);

  ordered_json jfits = ordered_json::array();
  for (const auto& lf : fits) {
    ordered_json f;
    f["label"] = lf.label;
    f["family"] = score_family_name(lf.family);
    f["x_transform"] = transform_name(lf.x_transform);
    f["y_transform"] = transform_name(lf.y_transform);
    f["n_obs"] = lf.fit.n_obs;
    f["r_squared"] = num(lf.fit.r_squared);
    ordered_json terms = ordered_json::array();
    for (std::size_t i = 0; i < lf.fit.coefficients.size(); ++i) {
      ordered_json t;
      t["name"] = lf.fit.design_labels[i];
      t["coefficient"] = num(lf.fit.coefficients[i]);
      t["std_error"] = num(lf.fit.std_errors[i]);
      t["p_value"] = num(lf.fit.p_values[i]);
      terms.push_back(std::move(t));
    }
    f["terms"] = std::move(terms);
    f["dropped"] = lf.dropped_features;
    jfits.push_back(std::move(f));
  }
  doc["fits"] = std::move(jfits);

  ordered_json jco = ordered_json::array();
  for (const auto& cell : coincidences.cells) {
    ordered_json c;
    c["feature_a"] = std::string(feature_name(cell.a));
    c["feature_b"] = std::string(feature_name(cell.b));
    c["observed"] = cell.observed;
    c["expected"] = num(cell.expected);
    c["ratio"] = opt_num(cell.ratio);
    c["p_value"] = opt_num(cell.p_value);
    jco.push_back(std::move(c));
  }
  doc["coincidences"] = std::move(jco);

  return doc.dump(2) + "\n";
}

}  // namespace aligncheck
