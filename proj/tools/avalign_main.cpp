#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avalign/aggregation.hpp"
#include "avalign/errors.hpp"
#include "avalign/fixtures.hpp"
#include "avalign/ground_truth.hpp"
#include "avalign/log.hpp"
#include "avalign/pipeline.hpp"
#include "avalign/report.hpp"

namespace {

using avalign::DataError;
using avalign::UsageError;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

avalign::MetricSelection parse_metric(const std::string& name) {
  using avalign::Metric;
  using avalign::MetricSelection;
  if (name == "all") return MetricSelection{};
  if (name == "as-object") return MetricSelection::only(Metric::AsObject);
  if (name == "as-word") return MetricSelection::only(Metric::AsWord);
  if (name == "gs-object") return MetricSelection::only(Metric::GsObject);
  if (name == "gs-word") return MetricSelection::only(Metric::GsWord);
  throw UsageError("unknown metric '" + name + "'");
}

avalign::Metric parse_single_metric(const std::string& name) {
  using avalign::Metric;
  if (name == "as-object") return Metric::AsObject;
  if (name == "as-word") return Metric::AsWord;
  if (name == "gs-object") return Metric::GsObject;
  if (name == "gs-word") return Metric::GsWord;
  throw UsageError("unknown metric '" + name + "' (expected as-object|as-word|gs-object|gs-word)");
}

std::vector<std::string> read_token_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return tokens;
}

avalign::SimilarityMatrix read_similarity_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) tab = line.size();
      try {
        row.push_back(std::stod(line.substr(pos, tab - pos)));
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad number");
      }
      pos = tab + 1;
      if (tab == line.size()) break;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": empty similarity matrix");
  avalign::SimilarityMatrix m;
  m.n = static_cast<int>(rows.size());
  m.values.reserve(static_cast<std::size_t>(m.n) * m.n);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m.n) {
      throw DataError(path + ": matrix is not square (" + std::to_string(rows.size()) + " rows, row with " +
                      std::to_string(row.size()) + " columns)");
    }
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  return m;
}

void print_run_result(const avalign::RunConfig& config, const avalign::RunResult& result) {
  std::printf("scored %d/%d samples (%d pairs, %d classes) in %.2fs -> %s\n",
              result.samples_scored, result.samples_total, result.pairs_scored,
              static_cast<int>(result.aggregate.classes.size()), result.wall_seconds,
              config.out_dir.string().c_str());
  for (avalign::Metric m : {avalign::Metric::AsObject, avalign::Metric::AsWord,
                            avalign::Metric::GsObject, avalign::Metric::GsWord}) {
    if (!config.metrics.has(m)) continue;
    std::printf("  %-9s total = %s\n", avalign::metric_name(m),
                avalign::format_number(result.aggregate.totals.get(m)).c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"avalign: audiovisual alignment tensor scoring and evaluation"};
  app.require_subcommand(1);

  // --- eval / baseline (shared options) ---
  avalign::RunConfig run_config;
  std::string upsample_opt = "nearest";
  std::string softmax_opt = "none";
  std::string metric_opt = "all";
  std::vector<int> baseline_dims;

  auto add_run_options = [&](CLI::App* cmd, bool baseline) {
    cmd->add_option("--gt", run_config.gt_path, "ground-truth JSON-lines file")->required();
    if (baseline) {
      cmd->add_option("--tensors", run_config.tensor_dir,
                      "tensor directory (dims source; optional with --dims)");
      cmd->add_option("--dims", baseline_dims,
                      "baseline tensor dims W H F when no tensor files exist")
          ->expected(3);
    } else {
      cmd->add_option("--tensors", run_config.tensor_dir, "directory of <sample_id>.avt files")
          ->required();
    }
    cmd->add_option("--out", run_config.out_dir, "output directory for reports")->required();
    cmd->add_option("--upsample", upsample_opt, "nearest|linear|coarse (default nearest)")
        ->check(CLI::IsMember({"nearest", "linear", "coarse"}));
    cmd->add_option("--softmax", softmax_opt, "space|time|none (default none)")
        ->check(CLI::IsMember({"space", "time", "none"}));
    cmd->add_option("--threshold", run_config.threshold, "pairing threshold echoed in summary");
    cmd->add_option("--seed", run_config.seed, "master seed for baseline tensors");
    cmd->add_option("--workers", run_config.workers, "parallel workers (default 1)");
    cmd->add_flag("--strict", run_config.strict, "abort on any bad record or missing tensor");
    cmd->add_option("--metric", metric_opt, "as-object|as-word|gs-object|gs-word|all");
    cmd->add_flag("--confusion", run_config.confusion, "emit cross-class confusion scores");
  };

  CLI::App* eval_cmd = app.add_subcommand("eval", "score tensors against ground truth");
  add_run_options(eval_cmd, false);
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "score seeded uniform-noise tensors against ground truth");
  add_run_options(baseline_cmd, true);

  // --- pairs ---
  std::string nouns_path, labels_path, sims_path, pairs_out;
  double pair_threshold = 0.5;
  CLI::App* pairs_cmd = app.add_subcommand("pairs", "derive word-object concept pairs");
  pairs_cmd->add_option("--nouns", nouns_path, "file with one noun per line")->required();
  pairs_cmd->add_option("--labels", labels_path, "file with one object label per line")->required();
  pairs_cmd->add_option("--sims", sims_path, "TSV: word<TAB>label<TAB>similarity")->required();
  pairs_cmd->add_option("--threshold", pair_threshold, "similarity threshold (default 0.5)");
  pairs_cmd->add_option("--out", pairs_out, "output JSON path (default stdout)");

  // --- recall ---
  std::string recall_sims_path;
  int recall_k = 10;
  CLI::App* recall_cmd = app.add_subcommand("recall", "cross-modal retrieval recall@k");
  recall_cmd->add_option("--sims", recall_sims_path, "TSV similarity matrix, row per speech item")
      ->required();
  recall_cmd->add_option("--k", recall_k, "retrieval depth (default 10)");

  // --- scatter ---
  std::string records_path, scatter_covariate = "object_size", scatter_metric = "as-object";
  std::string scatter_out;
  int scatter_bins = 0;
  CLI::App* scatter_cmd =
      app.add_subcommand("scatter", "per-class covariate/score points with a linear fit");
  scatter_cmd->add_option("--records", records_path, "records.csv from an eval run")->required();
  scatter_cmd->add_option("--covariate", scatter_covariate, "object_size|word_duration")
      ->check(CLI::IsMember({"object_size", "word_duration"}));
  scatter_cmd->add_option("--metric", scatter_metric, "as-object|as-word|gs-object|gs-word");
  scatter_cmd->add_option("--out", scatter_out, "output directory")->required();
  scatter_cmd->add_option("--bins", scatter_bins, "equal-width bins for plotting (0 = none)");

  // --- synth ---
  avalign::fixtures::SynthConfig synth;
  std::string synth_out;
  bool synth_planted = false;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic tensor + ground-truth dataset");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--n", synth.n_samples, "number of samples (default 10)");
  synth_cmd->add_option("--tensor-w", synth.tensor_w, "tensor width (default 8)");
  synth_cmd->add_option("--tensor-h", synth.tensor_h, "tensor height (default 8)");
  synth_cmd->add_option("--tensor-frames", synth.tensor_frames, "tensor frames (default 16)");
  synth_cmd->add_option("--image-w", synth.image_w, "evaluation image width");
  synth_cmd->add_option("--image-h", synth.image_h, "evaluation image height");
  synth_cmd->add_option("--frames", synth.frames, "evaluation frame count");
  synth_cmd->add_option("--frame-ms", synth.frame_ms, "evaluation frame duration (default 10)");
  synth_cmd->add_option("--pairs-per-sample", synth.pairs_per_sample, "pairs per sample");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_flag("--planted", synth_planted,
                      "plant known score fractions (requires tensor dims == eval dims)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eval_cmd || *baseline_cmd) {
      run_config.baseline = *baseline_cmd;
      if (!baseline_dims.empty()) {
        run_config.baseline_dims =
            avalign::EvalResolution{baseline_dims[0], baseline_dims[1], baseline_dims[2]};
      }
      if (run_config.baseline && run_config.tensor_dir.empty() && !run_config.baseline_dims) {
        throw UsageError("baseline needs --tensors or --dims");
      }
      run_config.upsample = upsample_opt == "coarse"   ? avalign::UpsamplePath::Coarse
                            : upsample_opt == "linear" ? avalign::UpsamplePath::Linear
                                                       : avalign::UpsamplePath::Nearest;
      run_config.softmax = softmax_opt == "space"  ? avalign::SoftmaxAxis::Space
                           : softmax_opt == "time" ? avalign::SoftmaxAxis::Time
                                                   : avalign::SoftmaxAxis::None;
      run_config.metrics = parse_metric(metric_opt);
      const avalign::RunResult result = avalign::run_eval(run_config);
      print_run_result(run_config, result);
      return kExitOk;
    }

    if (*pairs_cmd) {
      const auto nouns = read_token_lines(nouns_path);
      const auto labels = read_token_lines(labels_path);
      const auto sims = avalign::load_similarity_tsv(sims_path);
      const auto pairs = avalign::pair_concepts(nouns, labels, sims, pair_threshold);
      json out = json::array();
      for (const avalign::ConceptPair& p : pairs) {
        out.push_back(json{{"class", p.class_id},
                           {"word", p.word},
                           {"label", p.object_label},
                           {"similarity", p.similarity}});
      }
      if (pairs_out.empty()) {
        std::cout << out.dump(2) << "\n";
      } else {
        std::ofstream f(pairs_out, std::ios::trunc);
        if (!f) throw DataError("cannot write " + pairs_out);
        f << out.dump(2) << "\n";
      }
      return kExitOk;
    }

    if (*recall_cmd) {
      const avalign::SimilarityMatrix sims = read_similarity_matrix(recall_sims_path);
      const double s2i =
          avalign::recall_at_k(sims, recall_k, avalign::RetrievalDirection::SpeechToImage);
      const double i2s =
          avalign::recall_at_k(sims, recall_k, avalign::RetrievalDirection::ImageToSpeech);
      const json out{{"k", recall_k},
                     {"n", sims.n},
                     {"speech_to_image", s2i},
                     {"image_to_speech", i2s}};
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }

    if (*scatter_cmd) {
      const auto records = avalign::read_records_csv(records_path);
      const auto covariate = scatter_covariate == "object_size"
                                 ? avalign::Covariate::ObjectSize
                                 : avalign::Covariate::WordDuration;
      const auto metric = parse_single_metric(scatter_metric);
      const avalign::ScatterResult sc =
          avalign::scatter_data(records, covariate, metric, scatter_bins);
      std::filesystem::create_directories(scatter_out);
      const auto csv_path = std::filesystem::path(scatter_out) / "scatter.csv";
      avalign::write_scatter_csv(csv_path, sc);
      const json fit{{"covariate", scatter_covariate},
                     {"metric", avalign::metric_name(metric)},
                     {"points", sc.points.size()},
                     {"fit", avalign::fit_to_json(sc.fit)}};
      std::ofstream f(std::filesystem::path(scatter_out) / "fit.json", std::ios::trunc);
      if (!f) throw DataError("cannot write fit.json");
      f << fit.dump(2) << "\n";
      std::printf("wrote %s\n", csv_path.string().c_str());
      return kExitOk;
    }

    if (*synth_cmd) {
      synth.planted = synth_planted;
      avalign::fixtures::write_synthetic_dataset(synth, synth_out);
      std::printf("wrote %d samples to %s\n", synth.n_samples, synth_out.c_str());
      return kExitOk;
    }

    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::fprintf(stderr, "avalign: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "avalign: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "avalign: internal error: %s\n", e.what());
    return kExitInternal;
  }
}
