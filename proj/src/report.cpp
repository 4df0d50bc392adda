#include "avalign/report.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <system_error>

#include "avalign/errors.hpp"

namespace avalign {

bool MetricSelection::has(Metric m) const {
  switch (m) {
    case Metric::AsObject: return as_object;
    case Metric::AsWord: return as_word;
    case Metric::GsObject: return gs_object;
    case Metric::GsWord: return gs_word;
  }
  return false;
}

MetricSelection MetricSelection::only(Metric m) {
  MetricSelection s{false, false, false, false};
  switch (m) {
    case Metric::AsObject: s.as_object = true; break;
    case Metric::AsWord: s.as_word = true; break;
    case Metric::GsObject: s.gs_object = true; break;
    case Metric::GsWord: s.gs_word = true; break;
  }
  return s;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  if (res.ec != std::errc{}) throw DataError("number formatting failed");
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, int lineno) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  return v;
}

std::string metric_cell(double value, bool selected) {
  return selected ? format_number(value) : std::string();
}

constexpr const char* kRecordsHeader =
    "sample_id,class,word,as_object,as_word,gs_object,gs_word,object_pixels,word_frames,"
    "image_pixels,utterance_frames,frame_ms";

}  // namespace

void write_records_csv(const std::filesystem::path& path, std::span<const ScoreRecord> records,
                       const MetricSelection& selection) {
  auto out = open_out(path);
  out << kRecordsHeader << "\n";
  for (const ScoreRecord& r : records) {
    out << csv_escape(r.sample_id) << ',' << csv_escape(r.class_id) << ',' << csv_escape(r.word)
        << ',' << metric_cell(r.scores.as_object, selection.as_object) << ','
        << metric_cell(r.scores.as_word, selection.as_word) << ','
        << metric_cell(r.scores.gs_object, selection.gs_object) << ','
        << metric_cell(r.scores.gs_word, selection.gs_word) << ',' << r.object_pixels << ','
        << r.word_frames << ',' << r.image_pixels << ',' << r.utterance_frames << ','
        << format_number(r.frame_ms) << "\n";
  }
}

std::vector<ScoreRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (line != kRecordsHeader) throw DataError(path.string() + ": unexpected records header");
  std::vector<ScoreRecord> records;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 12 fields");
    }
    ScoreRecord r;
    r.sample_id = f[0];
    r.class_id = f[1];
    r.word = f[2];
    r.scores.as_object = parse_double(f[3], path, lineno);
    r.scores.as_word = parse_double(f[4], path, lineno);
    r.scores.gs_object = parse_double(f[5], path, lineno);
    r.scores.gs_word = parse_double(f[6], path, lineno);
    r.object_pixels = static_cast<std::int64_t>(parse_double(f[7], path, lineno));
    r.word_frames = static_cast<int>(parse_double(f[8], path, lineno));
    r.image_pixels = static_cast<std::int64_t>(parse_double(f[9], path, lineno));
    r.utterance_frames = static_cast<int>(parse_double(f[10], path, lineno));
    r.frame_ms = parse_double(f[11], path, lineno);
    records.push_back(std::move(r));
  }
  return records;
}

void write_class_csv(const std::filesystem::path& path, const AggregateResult& agg,
                     const MetricSelection& selection) {
  auto out = open_out(path);
  out << "class,count,as_object,as_word,gs_object,gs_word\n";
  for (const ClassScore& c : agg.classes) {
    out << csv_escape(c.class_id) << ',' << c.count << ','
        << metric_cell(c.means.as_object, selection.as_object) << ','
        << metric_cell(c.means.as_word, selection.as_word) << ','
        << metric_cell(c.means.gs_object, selection.gs_object) << ','
        << metric_cell(c.means.gs_word, selection.gs_word) << "\n";
  }
}

void write_confusion_csv(const std::filesystem::path& path,
                         std::span<const SampleConfusion> confusions) {
  auto out = open_out(path);
  out << "sample_id,object_class,word_class,metric,score\n";
  for (const SampleConfusion& sc : confusions) {
    for (const ConfusionCell& cell : sc.cells) {
      out << csv_escape(sc.sample_id) << ',' << csv_escape(cell.object_class) << ','
          << csv_escape(cell.word_class) << ',' << metric_name(cell.metric) << ','
          << format_number(cell.score) << "\n";
    }
  }
}

void write_scatter_csv(const std::filesystem::path& path, const ScatterResult& scatter) {
  auto out = open_out(path);
  out << "class,x,y,count\n";
  for (const ScatterPoint& p : scatter.points) {
    out << csv_escape(p.class_id) << ',' << format_number(p.x) << ',' << format_number(p.y) << ','
        << p.count << "\n";
  }
  for (const ScatterPoint& p : scatter.binned) {
    out << ',' << format_number(p.x) << ',' << format_number(p.y) << ',' << p.count << "\n";
  }
}

nlohmann::json fit_to_json(const std::optional<LinearFit>& fit) {
  if (!fit) return nullptr;
  return nlohmann::json{{"slope", fit->slope}, {"intercept", fit->intercept}};
}

}  // namespace avalign
