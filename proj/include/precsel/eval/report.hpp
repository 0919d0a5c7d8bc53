#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "precsel/eval/experiment.hpp"

namespace precsel {

/// `classifier,repetition,matrix_id,accuracy,slowdown,pred_set`; reals in
/// round-trip precision, +inf as "inf", pred_set as ';'-joined label names.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports,
                       const std::vector<std::string>& label_names);
/// Reports in file order of first appearance, aggregates recomputed. Label
/// names not already in `label_names` are appended as they appear.
std::vector<EvalReport> read_metrics_csv(const std::filesystem::path& path, std::vector<std::string>& label_names,
                                         double slow_threshold = 1.5);

/// `classifier,p_acc1,p_slow15,mean_pred_size`.
void write_summary_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports);
/// `classifier,repetition,p_acc1,p_slow15,mean_pred_size`.
void write_repetition_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports,
                          double slow_threshold = 1.5);
/// Scatter of P(accuracy=1) (x) against P(slowdown<1.5) (y), one labeled
/// marker per classifier.
void write_scatter_svg(const std::filesystem::path& path, const std::vector<EvalReport>& reports);

/// Writes metrics.csv, summary.csv, repetitions.csv and scatter.svg into `dir`.
void emit_report(const std::filesystem::path& dir, const std::vector<EvalReport>& reports,
                 const std::vector<std::string>& label_names, double slow_threshold = 1.5, bool svg = true);

}  // namespace precsel
