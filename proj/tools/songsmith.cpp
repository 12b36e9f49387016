// songsmith command-line front end. Every subcommand is a thin adapter over
// the library; progress goes to stderr as JSON lines, results to stdout.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "songsmith/core/corpus.hpp"
#include "songsmith/core/midi.hpp"
#include "songsmith/eval/bleu.hpp"
#include "songsmith/eval/report.hpp"
#include "songsmith/service/http.hpp"
#include "songsmith/train/pipeline.hpp"

using namespace songsmith;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void status(const json& j) { std::cerr << j.dump() << std::endl; }

std::vector<PairedSample> read_corpus(const fs::path& path, const std::string& format) {
  if (!fs::exists(path)) throw Error("corpus not found: " + path.string());
  auto r = ingest_corpus(path, parse_corpus_format(format));
  for (const auto& s : r.skipped) {
    status({{"event", "skipped"}, {"record", s.record}, {"line", s.line}, {"reason", s.reason}});
  }
  return std::move(r.samples);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

StyleControls parse_controls(const std::vector<std::string>& assignments) {
  StyleControls c;
  for (const auto& a : assignments) c.assign(a);
  c.validate();
  return c;
}

/// Lyrics from a text file: one lyric line per non-empty line.
std::vector<LyricsSequence> lyric_lines(const fs::path& path, const TokenizerOptions& tok) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read lyrics " + path.string());
  std::vector<LyricsSequence> out;
  std::string line;
  while (std::getline(in, line)) {
    auto l = tokenize_lyrics(line, tok);
    if (l.size() > 0) out.push_back(std::move(l));
  }
  if (out.empty()) throw ValidationError("lyrics", "no lyrics in " + path.string());
  return out;
}

std::vector<LyricsSequence> lyrics_from(const fs::path& path, const std::string& format, const TokenizerOptions& tok) {
  if (path.extension() == ".txt") return lyric_lines(path, tok);
  std::vector<LyricsSequence> out;
  for (const auto& s : read_corpus(path, format)) out.push_back(s.lyrics);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"songsmith: controllable lyrics-to-melody generation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read a corpus and rewrite it as songsmith records");
  std::string in_path, in_format = "records", out_path, vocab_path;
  bool strict = false;
  ingest->add_option("--input", in_path, "Corpus file")->required();
  ingest->add_option("--format", in_format, "records | paired");
  ingest->add_option("--out", out_path, "Output records file")->required();
  ingest->add_option("--vocab", vocab_path, "Vocabulary manifest; unrepresentable records are skipped");
  ingest->add_flag("--strict", strict, "Fail on the first bad record");
  std::string vocab_out;
  ingest->add_option("--vocab-out", vocab_out, "Write the vocabulary built from the ingested corpus");

  // toy-corpus
  auto* toy = app.add_subcommand("toy-corpus", "Write the synthetic toy corpus");
  ToyCorpusConfig toy_cfg;
  std::string toy_out;
  toy->add_option("--count", toy_cfg.count);
  toy->add_option("--length", toy_cfg.length);
  toy->add_option("--seed", toy_cfg.seed);
  toy->add_option("--out", toy_out)->required();

  // filter
  auto* filter = app.add_subcommand("filter", "Apply the style-statistic filter");
  filter->add_option("--input", in_path)->required();
  filter->add_option("--format", in_format);
  filter->add_option("--out", out_path)->required();

  // split
  auto* split = app.add_subcommand("split", "Shuffle and split 8:1:1");
  std::uint64_t seed = 1;
  std::string out_dir;
  split->add_option("--input", in_path)->required();
  split->add_option("--format", in_format);
  split->add_option("--seed", seed);
  split->add_option("--out-dir", out_dir)->required();

  // train-embeddings
  auto* emb = app.add_subcommand("train-embeddings", "Skip-gram word and syllable tables");
  SkipGramConfig sg;
  emb->add_option("--input", in_path)->required();
  emb->add_option("--format", in_format);
  emb->add_option("--dim", sg.dim);
  emb->add_option("--window", sg.window);
  emb->add_option("--negatives", sg.negatives);
  emb->add_option("--epochs", sg.epochs);
  emb->add_option("--lr", sg.learning_rate);
  emb->add_option("--seed", sg.seed);
  emb->add_option("--out-dir", out_dir)->required();

  // train
  auto* train = app.add_subcommand("train", "CE pretraining then adversarial training");
  std::string config_path;
  std::vector<std::string> overrides;
  train->add_option("--config", config_path, "Run config JSON")->required();
  train->add_option("--set", overrides, "Override, e.g. train.batch_size=16");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Metrics, style MSE and Self-BLEU");
  std::string checkpoint, reference, report_format = "records", corpus_id;
  std::string rep_strategy = "earlier";
  eval->add_option("--corpus", in_path, "Melodies to score (records)");
  eval->add_option("--checkpoint", checkpoint, "Generate from this checkpoint for the reference lyrics");
  eval->add_option("--reference", reference, "Paired ground-truth corpus");
  eval->add_option("--format", in_format);
  eval->add_option("--seed", seed);
  eval->add_option("--report-format", report_format, "records | plot");
  eval->add_option("--repetition", rep_strategy, "earlier | distinct");
  eval->add_option("--id", corpus_id);
  eval->add_option("--out", out_path)->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Controllability sweep of one style control");
  std::string feature = "pitch.avg", lyrics_path;
  std::vector<double> candidates{0.2, 0.4, 0.6, 0.8};
  double fixed = 0.5;
  sweep->add_option("--checkpoint", checkpoint)->required();
  sweep->add_option("--lyrics", lyrics_path, "Corpus or .txt lyrics")->required();
  sweep->add_option("--format", in_format);
  sweep->add_option("--feature", feature);
  sweep->add_option("--candidates", candidates);
  sweep->add_option("--fixed", fixed);
  sweep->add_option("--seed", seed);
  sweep->add_option("--out-dir", out_dir)->required();

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a melody for lyrics");
  std::vector<std::string> controls;
  std::optional<std::uint64_t> gen_seed;
  double tempo = kDefaultTempoBpm;
  std::string pianoroll_path;
  gen->add_option("--checkpoint", checkpoint)->required();
  gen->add_option("--lyrics", lyrics_path, "Text file with hyphenated syllables")->required();
  gen->add_option("--control", controls, "e.g. pitch.avg=0.9");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--tempo", tempo);
  gen->add_option("--out", out_path, "MIDI output")->required();
  gen->add_option("--pianoroll", pianoroll_path, "Piano-roll JSON output");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP generation service");
  std::string host = "127.0.0.1", cache_dir, default_ckpt;
  int port = 8080;
  serve->add_option("--checkpoint-dir", out_dir)->required();
  serve->add_option("--default", default_ckpt);
  serve->add_option("--cache-dir", cache_dir);
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--tempo", tempo);

  // case-study
  auto* cs = app.add_subcommand("case-study", "Same lyrics under three style settings");
  cs->add_option("--checkpoint", checkpoint)->required();
  cs->add_option("--lyrics", lyrics_path)->required();
  cs->add_option("--seed", seed);
  cs->add_option("--out-dir", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      IngestOptions opt;
      opt.strict = strict;
      if (!vocab_path.empty()) opt.vocab = VocabSet::load(vocab_path);
      auto r = ingest_corpus(in_path, parse_corpus_format(in_format), opt);
      for (const auto& s : r.skipped) {
        status({{"event", "skipped"}, {"record", s.record}, {"line", s.line}, {"reason", s.reason}});
      }
      write_corpus(r.samples, out_path);
      if (!vocab_out.empty()) {
        std::vector<MelodySequence> m;
        for (const auto& s : r.samples) m.push_back(s.melody);
        build_vocab(m).save(vocab_out);
      }
      std::cout << json{{"records", r.records_seen}, {"samples", r.samples.size()}, {"skipped", r.skipped.size()}}.dump()
                << "\n";
    } else if (toy->parsed()) {
      const auto c = make_toy_corpus(toy_cfg);
      write_corpus(c, toy_out);
      std::cout << json{{"samples", c.size()}}.dump() << "\n";
    } else if (filter->parsed()) {
      const auto in = read_corpus(in_path, in_format);
      const auto kept = filter_dataset(in);
      write_corpus(kept, out_path);
      std::cout << json{{"input", in.size()}, {"kept", kept.size()}}.dump() << "\n";
    } else if (split->parsed()) {
      const auto s = split_dataset(read_corpus(in_path, in_format), seed);
      fs::create_directories(out_dir);
      write_corpus(s.train, fs::path(out_dir) / "train.jsonl");
      write_corpus(s.valid, fs::path(out_dir) / "valid.jsonl");
      write_corpus(s.test, fs::path(out_dir) / "test.jsonl");
      std::cout << json{{"train", s.train.size()}, {"valid", s.valid.size()}, {"test", s.test.size()}, {"seed", seed}}.dump()
                << "\n";
    } else if (emb->parsed()) {
      std::vector<LyricsSequence> lyrics;
      for (const auto& s : read_corpus(in_path, in_format)) lyrics.push_back(s.lyrics);
      fs::create_directories(out_dir);
      train_skipgram(word_streams(lyrics), sg).save(fs::path(out_dir) / "words.vec");
      train_skipgram(syllable_streams(lyrics), sg).save(fs::path(out_dir) / "syllables.vec");
      std::cout << json{{"words", (fs::path(out_dir) / "words.vec").string()},
                        {"syllables", (fs::path(out_dir) / "syllables.vec").string()}}.dump()
                << "\n";
    } else if (train->parsed()) {
      json doc = read_json(config_path);
      for (const auto& o : overrides) apply_override(doc, o);
      const RunConfig rc = RunConfig::from_json(doc, fs::path(config_path).parent_path());
      const RunResult r = run_training(rc, [](const EpochRecord& e) {
        json j = e.to_json();
        j["event"] = "epoch";
        status(j);
      });
      std::cout << json{{"checkpoint", r.final_checkpoint.string()}, {"epochs", r.history.size()},
                        {"train", r.train_size}, {"valid", r.valid_size}}.dump()
                << "\n";
    } else if (eval->parsed()) {
      const RepetitionStrategy strategy =
          rep_strategy == "distinct" ? RepetitionStrategy::kDistinctRepeated : RepetitionStrategy::kEarlierOccurrence;
      if (rep_strategy != "distinct" && rep_strategy != "earlier") throw ValidationError("repetition", "earlier | distinct");
      std::vector<MelodySequence> generated, ref;
      std::optional<VocabSet> vocab;
      EvalReport rep;
      std::vector<PairedSample> ref_samples;
      if (!reference.empty()) {
        ref_samples = read_corpus(reference, in_format);
        for (const auto& s : ref_samples) ref.push_back(s.melody);
      }
      if (!checkpoint.empty()) {
        if (ref_samples.empty()) throw ValidationError("reference", "--checkpoint needs --reference lyrics");
        const LoadedCheckpoint lc = load_checkpoint(checkpoint);
        std::vector<GenerationItem> items;
        for (std::size_t i = 0; i < ref_samples.size(); ++i) {
          items.push_back({ref_samples[i].lyrics, build_rse(ref_samples[i].style, lc.model.discretizers),
                           seed + 1000003ULL * i});
        }
        for (auto& o : generate(lc.model, items)) generated.push_back(std::move(o.melody));
        vocab = lc.model.vocab;
        rep.checkpoint_hash = lc.config_hash;
      } else if (!in_path.empty()) {
        for (const auto& s : read_corpus(in_path, in_format)) generated.push_back(s.melody);
      } else {
        generated = ref;  // score the reference itself
      }
      if (generated.empty()) throw ValidationError("corpus", "nothing to evaluate");
      rep.corpus_id = corpus_id.empty() ? (checkpoint.empty() ? fs::path(in_path.empty() ? reference : in_path).stem().string()
                                                               : fs::path(checkpoint).stem().string())
                                        : corpus_id;
      rep.sequences = generated.size();
      rep.metrics = compute_metrics(generated, strategy);
      if (!ref.empty() && ref.size() == generated.size() && !(checkpoint.empty() && in_path.empty())) {
        rep.style_mse = style_mse(generated, ref);
      }
      if (!vocab) {
        std::vector<MelodySequence> all = generated;
        vocab = build_vocab(all);
      }
      if (generated.size() >= 2) {
        rep.self_bleu["triplet"] = self_bleu_orders(triplet_tokens(generated, *vocab));
        for (Attribute a : kAllAttributes) {
          rep.self_bleu[std::string(attribute_name(a))] = self_bleu_orders(attribute_tokens(generated, *vocab, a));
        }
      }
      emit_report(rep, parse_report_format(report_format), out_path);
      std::cout << render_report(rep, ReportFormat::kRecords);
    } else if (sweep->parsed()) {
      const LoadedCheckpoint lc = load_checkpoint(checkpoint);
      const auto [attr, feat] = parse_control_name(feature);
      SweepConfig sc{attr, feat, candidates, fixed, seed};
      const auto res = controllability_sweep(lc.model, lyrics_from(lyrics_path, in_format, lc.model.tokenizer), sc);
      const fs::path dir(out_dir);
      emit_report(res, ReportFormat::kRecords, dir / ("sweep_" + feature + ".jsonl"));
      emit_report(res, ReportFormat::kPlotData, dir / ("sweep_" + feature + ".plot.json"));
      std::cout << render_report(res, ReportFormat::kRecords);
    } else if (gen->parsed()) {
      StudioService svc({fs::path(checkpoint).parent_path(), fs::path(checkpoint).stem().string(), {}, tempo});
      GenerateRequest req;
      req.lyrics = read_text(lyrics_path);
      req.controls = parse_controls(controls);
      req.seed = gen_seed;
      const auto r = svc.generate(req);
      const auto bytes = svc.midi(r);
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw Error("cannot write " + out_path);
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!pianoroll_path.empty()) std::ofstream(pianoroll_path) << svc.pianoroll(r).dump(2) << "\n";
      std::cout << json{{"id", r.id},
                        {"seed", *r.request.seed},
                        {"notes", r.melody.size()},
                        {"realized", r.to_json()["realized"]},
                        {"midi", out_path}}.dump()
                << "\n";
    } else if (serve->parsed()) {
      StudioService svc({out_dir, default_ckpt, cache_dir, tempo});
      httplib::Server server;
      register_routes(server, svc);
      status({{"event", "listening"}, {"host", host}, {"port", port}});
      if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
    } else if (cs->parsed()) {
      StudioService svc({fs::path(checkpoint).parent_path(), fs::path(checkpoint).stem().string(), {}, kDefaultTempoBpm});
      const std::string text = read_text(lyrics_path);
      // Reference setting, higher pitch, then a busier rhythm with few rests.
      const std::vector<std::pair<std::string, std::vector<std::string>>> variants = {
          {"reference", {}},
          {"high_pitch", {"pitch.avg=0.9", "pitch.range=0.5"}},
          {"dense_rhythm", {"duration.avg=0.1", "rest.avg=0.0", "rest.range=0.0"}}};
      fs::create_directories(out_dir);
      json summary = json::array();
      for (const auto& [name, assigns] : variants) {
        GenerateRequest req{text, parse_controls(assigns), seed, {}};
        const auto r = svc.generate(req);
        const fs::path midi = fs::path(out_dir) / (name + ".mid");
        export_midi(r.melody, kDefaultTempoBpm, midi, r.lyrics.syllables);
        std::ofstream(fs::path(out_dir) / (name + ".pianoroll.json")) << svc.pianoroll(r).dump(2) << "\n";
        summary.push_back({{"variant", name}, {"controls", r.request.to_json()["controls"]},
                           {"realized", r.to_json()["realized"]}, {"midi", midi.string()}});
      }
      std::ofstream(fs::path(out_dir) / "case_study.json") << summary.dump(2) << "\n";
      std::cout << summary.dump() << "\n";
    }
  } catch (const ValidationError& e) {
    status({{"event", "error"}, {"field", e.field()}, {"error", e.what()}});
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    status({{"event", "error"}, {"error", e.what()}});
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
