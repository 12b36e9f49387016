#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "songsmith/eval/metrics.hpp"
#include "songsmith/eval/sweep.hpp"

namespace songsmith {

struct EvalReport {
  std::string corpus_id;
  std::string checkpoint_hash;  // empty for external corpora
  std::size_t sequences = 0;
  MelodyMetrics metrics;
  std::optional<std::array<double, 9>> style_mse;  // when a paired reference exists
  /// Self-BLEU per order 1..4, keyed by token stream ("triplet", "pitch", ...).
  std::map<std::string, std::vector<double>> self_bleu;
};

enum class ReportFormat {
  kRecords,   // line-delimited JSON records
  kPlotData,  // one JSON document with axes and series
};

ReportFormat parse_report_format(std::string_view name);

/// Serialized bytes (deterministic) for each format.
std::string render_report(const EvalReport& report, ReportFormat format);
std::string render_report(const SweepResult& sweep, ReportFormat format);

void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& out);
void emit_report(const SweepResult& sweep, ReportFormat format, const std::filesystem::path& out);

nlohmann::json summary_to_json(const DistributionSummary& s);

}  // namespace songsmith
