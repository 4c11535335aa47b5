#include "rmstpo/sensitivity.hpp"

#include <map>

#include "rmstpo/errors.hpp"

namespace rmstpo {

StudyData build_tentative_dataset(const StudyData& data) {
  StudyData tentative;
  tentative.schema = data.schema;
  for (const SurvivalRecord& rec : data.records) {
    if (rec.arm == 1 && rec.event == 0) tentative.records.push_back(rec);
  }
  for (const SurvivalRecord& rec : data.records) {
    if (rec.arm == 0) tentative.records.push_back(rec);
  }
  return tentative;
}

PseudoDataset cr_pseudo(const StudyData& data, double tau) {
  PseudoDataset po = rmst_pseudo_per_arm(data, tau);

  const StudyData tentative = build_tentative_dataset(data);
  std::vector<double> times(tentative.records.size());
  std::vector<int> events(tentative.records.size());
  std::vector<std::string> ids(tentative.records.size());
  for (std::size_t i = 0; i < tentative.records.size(); ++i) {
    times[i] = tentative.records[i].time;
    events[i] = tentative.records[i].event;
    ids[i] = tentative.records[i].id;
  }

  // Pseudo-observations over the tentative dataset treated as one cohort:
  // a single pooled KM curve, jackknifed over all |tentative| subjects.
  check_loo_tau_support(times, events, tau, "tentative dataset", ids);
  const std::vector<double> pooled = rmst_pseudo_fast(times, events, tau);

  std::map<std::string, double> pooled_by_id;
  for (std::size_t i = 0; i < tentative.records.size(); ++i) {
    pooled_by_id[ids[i]] = pooled[i];
  }
  for (PseudoRow& row : po.rows) {
    if (row.arm == 1 && row.event == 0) {
      row.pseudo_value = pooled_by_id.at(row.id);
    }
  }
  po.provenance = Provenance::copy_reference;
  return po;
}

CRResult run_cr_analysis(const StudyData& data, double tau, Method method,
                         const NuisanceConfig& config) {
  const PseudoDataset main_po = rmst_pseudo_per_arm(data, tau);
  const PseudoDataset cr_po = cr_pseudo(data, tau);

  CRResult result;
  result.main_report = estimate(main_po, method, config);
  result.cr_report = estimate(cr_po, method, config);
  for (const SurvivalRecord& rec : data.records) {
    if (rec.arm == 1 && rec.event == 0) ++result.replaced_count;
  }
  result.tentative_dataset_size = result.replaced_count + data.arm_count(0);
  return result;
}

nlohmann::ordered_json CRResult::to_json() const {
  nlohmann::ordered_json j;
  j["main"] = main_report.to_json();
  j["cr"] = cr_report.to_json();
  j["replaced_count"] = replaced_count;
  j["delta"] = cr_report.estimate - main_report.estimate;
  return j;
}

}  // namespace rmstpo
