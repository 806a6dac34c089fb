#pragma once

// JSON ("report-v1") and CSV export for evaluation reports. CSV columns
// follow the canonical order Accuracy, F1, AUROC, HumanRec, MachineRec,
// AvgRec.

#include <ostream>
#include <string>

#include <json.hpp>

#include "textprint/eval.hpp"

namespace textprint {

inline constexpr const char* kReportSchemaVersion = "report-v1";

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
  nlohmann::json j = {{"accuracy", r.accuracy},     {"f1", r.f1},
                      {"auroc", r.auroc},           {"human_rec", r.human_rec},
                      {"machine_rec", r.machine_rec}, {"avg_rec", r.avg_rec},
                      {"positive_label", r.positive_label}};
  j["confusion"] = r.confusion;
  if (!r.ci.empty()) {
    nlohmann::json ci = nlohmann::json::object();
    for (const auto& [metric, interval] : r.ci) {
      ci[metric] = {{"lo", interval.lo},
                    {"hi", interval.hi},
                    {"level", interval.level},
                    {"discarded", interval.discarded}};
    }
    j["ci"] = ci;
  }
  return j;
}

inline nlohmann::json transfer_to_json(const TransferReport& r) {
  return nlohmann::json{{"condition_name", r.condition_name},
                        {"baseline", metrics_to_json(r.baseline)},
                        {"condition", metrics_to_json(r.condition)},
                        {"deltas", r.deltas}};
}

inline nlohmann::json family_to_json(const FamilyTransferReport& r) {
  return nlohmann::json{{"trials", r.trials},
                        {"same_family_diff_domain", transfer_to_json(r.same_family_diff_domain)},
                        {"diff_family_same_domain", transfer_to_json(r.diff_family_same_domain)}};
}

inline nlohmann::json multiclass_to_json(const MulticlassReport& r) {
  return nlohmann::json{{"labels", r.labels},
                        {"per_class_f1", r.per_class_f1},
                        {"macro_f1", r.macro_f1},
                        {"confusion", r.confusion}};
}

inline nlohmann::json report_envelope(const std::string& protocol, nlohmann::json body) {
  return nlohmann::json{{"version", kReportSchemaVersion}, {"protocol", protocol},
                        {"report", std::move(body)}};
}

inline void metrics_csv_header(std::ostream& out, const std::string& first_column = "name") {
  out << first_column << ",accuracy,f1,auroc,human_rec,machine_rec,avg_rec\n";
}

inline void metrics_csv_row(std::ostream& out, const std::string& name, const MetricsReport& r) {
  out.precision(17);
  out << name << ',' << r.accuracy << ',' << r.f1 << ',' << r.auroc << ',' << r.human_rec << ','
      << r.machine_rec << ',' << r.avg_rec << '\n';
}

inline void transfer_csv(std::ostream& out, const TransferReport& r) {
  metrics_csv_header(out);
  metrics_csv_row(out, "baseline", r.baseline);
  metrics_csv_row(out, r.condition_name, r.condition);
  out.precision(17);
  out << "delta," << r.deltas.at("accuracy") << ',' << r.deltas.at("f1") << ','
      << r.deltas.at("auroc") << ',' << r.deltas.at("human_rec") << ','
      << r.deltas.at("machine_rec") << ',' << r.deltas.at("avg_rec") << '\n';
}

}  // namespace textprint
