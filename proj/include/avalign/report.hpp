#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "avalign/aggregation.hpp"
#include "avalign/metrics.hpp"

namespace avalign {

// Which of the four metrics a run reports. Unselected metrics appear as
// empty CSV cells and are omitted from JSON summaries.
struct MetricSelection {
  bool as_object = true;
  bool as_word = true;
  bool gs_object = true;
  bool gs_word = true;

  bool has(Metric m) const;
  bool all() const { return as_object && as_word && gs_object && gs_word; }
  static MetricSelection only(Metric m);
};

// Locale-independent number formatting: '.' decimal separator, 9 significant
// digits, shortest general form. All report files go through this.
std::string format_number(double v);

// Minimal RFC-4180-style CSV: fields containing comma, quote or newline are
// quoted; quotes are doubled.
std::string csv_escape(const std::string& field);
std::vector<std::string> split_csv_line(const std::string& line);

// records.csv: one row per scored (sample, concept) pair.
// Header: sample_id,class,word,as_object,as_word,gs_object,gs_word,
//         object_pixels,word_frames,image_pixels,utterance_frames,frame_ms
void write_records_csv(const std::filesystem::path& path, std::span<const ScoreRecord> records,
                       const MetricSelection& selection = {});
// Unselected metric cells read back as NaN.
std::vector<ScoreRecord> read_records_csv(const std::filesystem::path& path);

// class_scores.csv: class,count,as_object,as_word,gs_object,gs_word
void write_class_csv(const std::filesystem::path& path, const AggregateResult& agg,
                     const MetricSelection& selection = {});

// confusion.csv: sample_id,object_class,word_class,metric,score
struct SampleConfusion {
  std::string sample_id;
  std::vector<ConfusionCell> cells;
};
void write_confusion_csv(const std::filesystem::path& path,
                         std::span<const SampleConfusion> confusions);

// scatter.csv: class,x,y,count (binned rows carry an empty class field)
void write_scatter_csv(const std::filesystem::path& path, const ScatterResult& scatter);

nlohmann::json fit_to_json(const std::optional<LinearFit>& fit);

}  // namespace avalign
