#include "songsmith/eval/report.hpp"

#include <fstream>

namespace songsmith {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "records" || name == "jsonl") return ReportFormat::kRecords;
  if (name == "plot" || name == "plot-data") return ReportFormat::kPlotData;
  throw ValidationError("format", "unknown report format '" + std::string(name) + "'");
}

json summary_to_json(const DistributionSummary& s) {
  return {{"count", s.count}, {"mean", s.mean},     {"min", s.min},
          {"q1", s.q1},       {"median", s.median}, {"q3", s.q3},
          {"max", s.max},     {"lower_whisker", s.lower_whisker}, {"upper_whisker", s.upper_whisker}};
}

namespace {

std::string lines(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report " + path.string());
  out << text;
  if (!out) throw Error("cannot write report " + path.string());
}

}  // namespace

std::string render_report(const EvalReport& r, ReportFormat format) {
  const auto values = r.metrics.values();
  const auto axes = style_axis_labels();
  if (format == ReportFormat::kRecords) {
    std::vector<json> rec;
    rec.push_back({{"record", "meta"},
                   {"corpus", r.corpus_id},
                   {"checkpoint", r.checkpoint_hash},
                   {"sequences", r.sequences}});
    for (std::size_t i = 0; i < values.size(); ++i) {
      rec.push_back({{"record", "metric"}, {"column", MelodyMetrics::kColumns[i]}, {"value", values[i]}});
    }
    if (r.style_mse) {
      for (std::size_t i = 0; i < 9; ++i) {
        rec.push_back({{"record", "style_mse"}, {"feature", axes[i]}, {"value", (*r.style_mse)[i]}});
      }
    }
    for (const auto& [stream, scores] : r.self_bleu) {
      for (std::size_t n = 0; n < scores.size(); ++n) {
        rec.push_back({{"record", "self_bleu"}, {"tokens", stream}, {"n", n + 1}, {"value", scores[n]}});
      }
    }
    return lines(rec);
  }
  json doc = {{"corpus", r.corpus_id}, {"checkpoint", r.checkpoint_hash}};
  json table = json::object();
  for (std::size_t i = 0; i < values.size(); ++i) table[MelodyMetrics::kColumns[i]] = values[i];
  doc["table"] = {{"columns", MelodyMetrics::kColumns}, {"values", table}};
  if (r.style_mse) {
    doc["radar"] = {{"axes", axes}, {"values", *r.style_mse}, {"label", r.corpus_id}};
  }
  json bleu = json::object();
  for (const auto& [stream, scores] : r.self_bleu) bleu[stream] = scores;
  doc["self_bleu"] = {{"x_label", "n-gram order"}, {"y_label", "Self-BLEU"}, {"series", bleu}};
  return doc.dump(2) + "\n";
}

std::string render_report(const SweepResult& s, ReportFormat format) {
  const json corr = s.spearman ? json(*s.spearman) : json(nullptr);
  if (format == ReportFormat::kRecords) {
    std::vector<json> rec;
    rec.push_back({{"record", "sweep"}, {"feature", s.feature}, {"candidates", s.candidates}, {"spearman", corr}});
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
      json q = summary_to_json(s.summaries[i]);
      q["record"] = "candidate";
      q["feature"] = s.feature;
      q["candidate"] = s.candidates[i];
      rec.push_back(q);
    }
    return lines(rec);
  }
  json boxes = json::array();
  for (std::size_t i = 0; i < s.candidates.size(); ++i) {
    json b = summary_to_json(s.summaries[i]);
    b["candidate"] = s.candidates[i];
    boxes.push_back(b);
  }
  json doc = {{"feature", s.feature},
              {"x_label", s.feature + " control"},
              {"y_label", "generated value"},
              {"boxes", boxes},
              {"spearman", corr}};
  return doc.dump(2) + "\n";
}

void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& out) {
  write_text(out, render_report(report, format));
}

void emit_report(const SweepResult& sweep, ReportFormat format, const std::filesystem::path& out) {
  write_text(out, render_report(sweep, format));
}

}  // namespace songsmith
