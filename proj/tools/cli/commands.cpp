#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "CLI11.hpp"
#include "newscap/alignment.hpp"
#include "newscap/context.hpp"
#include "newscap/corpus.hpp"
#include "newscap/error.hpp"
#include "newscap/evaluation.hpp"
#include "newscap/gateway.hpp"
#include "newscap/loss.hpp"
#include "newscap/ner.hpp"
#include "newscap/pipeline.hpp"

namespace newscap::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 13;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
};

struct TaggerOptions {
  std::string mode = "builtin";
  std::string gazetteer;
  std::string annotations;
  bool no_patterns = false;
};

struct ContextOptions {
  std::size_t origin_budget = kDefaultOriginBudget;
  std::size_t sentence_cap = kDefaultSentenceCap;
  std::string entity_prompt{kDefaultEntityPrompt};
};

struct Options {
  CommonOptions common;
  TaggerOptions tagger;
  ContextOptions context;
  // ingest
  std::string input;
  std::string style = "generic";
  std::string abbreviations;
  // shared corpus selection
  std::string corpus;
  std::string split = "all";
  // build-alignment
  std::string negatives = "balanced";
  std::string visual_policy;
  std::string cap_context = "origin";
  // build-context
  std::string regime = "origin";
  std::string supplemented;
  // generate
  std::string endpoint = "mock";
  std::size_t timeout_ms = static_cast<std::size_t>(kDefaultRequestTimeout.count());
  std::string entity_scope = "origin";
  // evaluate
  std::string predictions;
  std::string contexts;
  std::string train_index;
  std::optional<double> meteor;
  // loss-audit
  std::string logprobs;
  std::string weights = "goodnews";
};

// Writes artifact files, failing with IoError.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  }

  fs::path path(std::string_view name) const { return dir_ / name; }

  std::ofstream open(std::string_view name) const {
    std::ofstream f(path(name), std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path(name).string());
    return f;
  }

  void write_lines(std::string_view name, const std::vector<std::string>& lines) const {
    auto f = open(name);
    for (const auto& l : lines) f << l << '\n';
  }

 private:
  fs::path dir_;
};

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) throw InvalidArgument(std::string(what) + " path is required");
  if (!fs::exists(path)) throw IoError(std::string(what) + " not found: " + path);
}

std::shared_ptr<const Tagger> make_tagger(const TaggerOptions& o) {
  if (o.mode == "annotations") {
    require_file(o.annotations, "annotation file");
    return std::make_shared<AnnotationTagger>(AnnotationTagger::load(o.annotations));
  }
  Gazetteer gaz;
  if (!o.gazetteer.empty()) {
    require_file(o.gazetteer, "gazetteer");
    gaz = Gazetteer::load(o.gazetteer);
  }
  return std::make_shared<GazetteerTagger>(std::move(gaz), !o.no_patterns);
}

Corpus load_corpus(const std::string& dir) {
  require_file(dir, "corpus directory");
  return read_corpus_dir(dir);
}

std::vector<const Document*> select_docs(const Corpus& corpus, const std::string& split) {
  if (split == "all") return corpus.select(std::nullopt);
  return corpus.select(parse_split(split));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be
// written to per-index slots so output order never depends on scheduling.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct TaggedDoc {
  std::vector<Entity> caption;
  std::vector<Entity> article;
};

TaggedDoc tag_document(const Document& doc, const Tagger& tagger) {
  return {tagger.tag(doc.caption, {doc.doc_id, TextField::kCaption}),
          tagger.tag(doc.article_text, {doc.doc_id, TextField::kArticle})};
}

SupplementedContext regime_context(const Document& doc, CorpusStyle style,
                                   ContextRegime regime, const ContextOptions& o,
                                   const TaggedDoc& tagged,
                                   std::size_t supplemented_words) {
  const auto origin = [&] { return origin_context(doc, style, o.origin_budget); };
  switch (regime) {
    case ContextRegime::kOrigin: return origin();
    case ContextRegime::kFull: return full_context(doc);
    case ContextRegime::kOriginLonger:
      return origin_longer_context(doc, style, o.origin_budget, supplemented_words);
    case ContextRegime::kOracleSent:
      return oracle_sentence_context(doc, tagged.caption, o.sentence_cap);
    case ContextRegime::kOracleEnt:
      return oracle_entity_context(doc, origin(), tagged.caption, tagged.article,
                                   o.entity_prompt);
    case ContextRegime::kOracleSentEnt:
      return oracle_sentence_entity_context(doc, origin(), tagged.caption,
                                            tagged.article, o.sentence_cap,
                                            o.entity_prompt);
    case ContextRegime::kSupplemented:
      break;
  }
  throw InvalidArgument("the supplemented context needs a model; use generate");
}

bool regime_needs_entities(ContextRegime r) {
  return r == ContextRegime::kOracleSent || r == ContextRegime::kOracleEnt ||
         r == ContextRegime::kOracleSentEnt;
}

void validate_context_options(const ContextOptions& o) {
  if (o.origin_budget < 1 || o.sentence_cap < 1) {
    throw InvalidArgument("word budgets must be at least 1");
  }
}

// Resolved option values of a subcommand, defaults included.
ojson resolved_config(const CLI::App& sub) {
  ojson j = ojson::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->get_expected_min() == 0) {
      j[name] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      j[name] = opt->as<std::string>();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

void write_summary(const OutputDir& out, const CLI::App& sub, ojson outputs, ojson stats) {
  ojson s;
  s["command"] = sub.get_name();
  s["config"] = resolved_config(sub);
  s["outputs"] = std::move(outputs);
  s["stats"] = std::move(stats);
  out.open("summary.json") << s.dump(2) << '\n';
}

// ---- subcommands -------------------------------------------------------

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return kExitInvalidArgument;
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kSchema: return kExitSchema;
    case ErrorKind::kProtocol: return kExitProtocol;
    case ErrorKind::kTimeout: return kExitTimeout;
  }
  return kExitInternal;
}

int cmd_ingest(const Options& o, const CLI::App& sub, std::ostream& out) {
  require_file(o.input, "input file");
  const CorpusStyle style = parse_corpus_style(o.style);
  SentenceSegmenter segmenter;
  if (!o.abbreviations.empty()) {
    require_file(o.abbreviations, "abbreviation list");
    segmenter = SentenceSegmenter::from_file(o.abbreviations);
  }
  const Corpus corpus = ingest_jsonl(fs::path(o.input), style, segmenter);
  OutputDir dir(o.common.out);
  write_corpus_dir(corpus, o.common.out);
  const auto counts = corpus.split_counts();
  std::size_t sentences = 0, words = 0;
  for (const auto& d : corpus.documents()) {
    sentences += d.sentences.size();
    words += d.total_words();
  }
  write_summary(dir, sub, {{"documents", "documents.jsonl"}, {"manifest", "manifest.json"}},
                {{"documents", corpus.size()},
                 {"train", counts.train},
                 {"validation", counts.validation},
                 {"test", counts.test},
                 {"sentences", sentences},
                 {"article_words", words}});
  out << "ingested " << corpus.size() << " documents into " << o.common.out << '\n';
  return kExitOk;
}

int cmd_build_alignment(const Options& o, const CLI::App& sub, std::ostream& out) {
  validate_context_options(o.context);
  const Corpus corpus = load_corpus(o.corpus);
  const auto tagger = make_tagger(o.tagger);
  VisualEntityPolicy policy = VisualEntityPolicy::default_policy();
  if (!o.visual_policy.empty()) {
    require_file(o.visual_policy, "visual policy");
    policy = VisualEntityPolicy::load(o.visual_policy);
  }
  std::optional<int> negatives;
  if (o.negatives != "balanced") {
    try {
      std::size_t used = 0;
      negatives = std::stoi(o.negatives, &used);
      if (used != o.negatives.size()) throw std::invalid_argument(o.negatives);
    } catch (const std::logic_error&) {
      throw InvalidArgument("--negatives takes an integer or 'balanced'");
    }
  }
  const ContextRegime cap_regime = parse_context_regime(o.cap_context);
  if (cap_regime == ContextRegime::kSupplemented ||
      cap_regime == ContextRegime::kOriginLonger) {
    throw InvalidArgument("--cap-context must be origin, full or an oracle regime");
  }

  const auto docs = select_docs(corpus, o.split);
  struct DocSamples {
    std::vector<AlignmentSample> sent;
    AlignmentSample ent;
    AlignmentSample cap;
  };
  std::vector<DocSamples> built(docs.size());
  parallel_for(docs.size(), o.common.jobs, [&](std::size_t i) {
    const Document& doc = *docs[i];
    const TaggedDoc tagged = tag_document(doc, *tagger);
    built[i].sent = build_sentence_selection(doc, tagged.caption, policy, negatives,
                                             o.common.seed);
    built[i].ent = build_entity_selection(doc, tagged.caption, tagged.article,
                                          o.context.entity_prompt);
    built[i].cap = build_caption_sample(
        doc, regime_context(doc, corpus.style(), cap_regime, o.context, tagged, 0));
  });

  SampleStreams streams;
  std::vector<std::string> sent_lines, ent_lines, cap_lines;
  for (auto& b : built) {
    for (const auto& s : b.sent) sent_lines.push_back(serialize_sample(s));
    ent_lines.push_back(serialize_sample(b.ent));
    cap_lines.push_back(serialize_sample(b.cap));
    if (!b.sent.empty()) streams.sent_sets.push_back(std::move(b.sent));
    streams.ent.push_back(std::move(b.ent));
    streams.cap.push_back(std::move(b.cap));
  }
  OutputDir dir(o.common.out);
  dir.write_lines("sent.jsonl", sent_lines);
  dir.write_lines("ent.jsonl", ent_lines);
  dir.write_lines("cap.jsonl", cap_lines);

  const MiniGroupAssembly groups = assemble_minigroups(streams, o.common.seed);
  std::vector<std::string> group_lines;
  for (std::size_t g = 0; g < groups.groups.size(); ++g) {
    group_lines.push_back(serialize_minigroup(g, groups.groups[g]));
  }
  dir.write_lines("minigroups.jsonl", group_lines);
  write_summary(dir, sub,
                {{"sent", "sent.jsonl"},
                 {"ent", "ent.jsonl"},
                 {"cap", "cap.jsonl"},
                 {"minigroups", "minigroups.jsonl"}},
                {{"documents", docs.size()},
                 {"sent_samples", sent_lines.size()},
                 {"sent_sets", streams.sent_sets.size()},
                 {"ent_samples", ent_lines.size()},
                 {"cap_samples", cap_lines.size()},
                 {"minigroups", groups.groups.size()},
                 {"leftover_cap", groups.leftover_cap},
                 {"leftover_sent_sets", groups.leftover_sent_sets},
                 {"leftover_ent", groups.leftover_ent}});
  out << "built " << sent_lines.size() << " SENT, " << ent_lines.size() << " ENT, "
      << cap_lines.size() << " CAP samples in " << groups.groups.size()
      << " mini-groups\n";
  return kExitOk;
}

std::unordered_map<std::string, SupplementedContext> read_context_dump(
    const std::string& path) {
  require_file(path, "context dump");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::unordered_map<std::string, SupplementedContext> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = parse_context_record(line);
    out[rec.doc_id] = std::move(rec.context);
  }
  return out;
}

int cmd_build_context(const Options& o, const CLI::App& sub, std::ostream& out) {
  validate_context_options(o.context);
  const Corpus corpus = load_corpus(o.corpus);
  const ContextRegime regime = parse_context_regime(o.regime);
  if (regime == ContextRegime::kSupplemented) {
    throw InvalidArgument("the supplemented context needs a model; use generate");
  }
  std::shared_ptr<const Tagger> tagger;
  if (regime_needs_entities(regime)) tagger = make_tagger(o.tagger);
  std::unordered_map<std::string, SupplementedContext> supplemented;
  if (regime == ContextRegime::kOriginLonger && !o.supplemented.empty()) {
    supplemented = read_context_dump(o.supplemented);
  }

  const auto docs = select_docs(corpus, o.split);
  std::vector<std::string> lines(docs.size());
  std::vector<std::size_t> words(docs.size());
  parallel_for(docs.size(), o.common.jobs, [&](std::size_t i) {
    const Document& doc = *docs[i];
    const TaggedDoc tagged = tagger ? tag_document(doc, *tagger) : TaggedDoc{};
    std::size_t realized = 0;
    if (auto it = supplemented.find(doc.doc_id); it != supplemented.end()) {
      realized = it->second.total_word_count;
    }
    const auto ctx = regime_context(doc, corpus.style(), regime, o.context, tagged, realized);
    words[i] = ctx.sentence_word_count;
    lines[i] = serialize_context(doc.doc_id, ctx);
  });

  OutputDir dir(o.common.out);
  dir.write_lines("contexts.jsonl", lines);
  std::size_t context_words = 0, article_words = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    context_words += words[i];
    article_words += docs[i]->total_words();
  }
  const double n = docs.empty() ? 1.0 : static_cast<double>(docs.size());
  write_summary(dir, sub, {{"contexts", "contexts.jsonl"}},
                {{"documents", docs.size()},
                 {"mean_sentence_words", static_cast<double>(context_words) / n},
                 {"fraction_of_article_words",
                  article_words == 0 ? 0.0
                                     : static_cast<double>(context_words) /
                                           static_cast<double>(article_words)}});
  out << "built " << lines.size() << " " << to_string(regime) << " contexts\n";
  return kExitOk;
}

EndpointFactory make_endpoint_factory(const Options& o, const Corpus& corpus) {
  const std::chrono::milliseconds timeout(o.timeout_ms);
  const std::string& spec = o.endpoint;
  if (spec == "mock") {
    // The mock answers from gazetteer entities only.
    Gazetteer gaz;
    if (!o.tagger.gazetteer.empty()) {
      require_file(o.tagger.gazetteer, "gazetteer");
      gaz = Gazetteer::load(o.tagger.gazetteer);
    }
    auto mock = std::make_shared<MockModel>(MockModel::from_corpus(
        std::make_shared<GazetteerTagger>(std::move(gaz), false), corpus));
    return [mock]() -> std::unique_ptr<ModelEndpoint> {
      return std::make_unique<LoopbackEndpoint>(
          [mock](std::string_view line) { return mock->handle_line(line); });
    };
  }
  if (spec.starts_with("exec:")) {
    const std::string command = spec.substr(5);
    return [command, timeout]() -> std::unique_ptr<ModelEndpoint> {
      return std::make_unique<SubprocessEndpoint>(command, timeout);
    };
  }
  if (spec.starts_with("unix:")) {
    const std::string path = spec.substr(5);
    return [path, timeout]() -> std::unique_ptr<ModelEndpoint> {
      return std::make_unique<UnixSocketEndpoint>(path, timeout);
    };
  }
  if (spec.starts_with("replay:")) {
    const std::string path = spec.substr(7);
    require_file(path, "trace");
    auto replay = std::make_shared<ReplayEndpoint>(ReplayEndpoint::load(path));
    return [replay]() -> std::unique_ptr<ModelEndpoint> {
      return std::make_unique<ReplayEndpoint>(*replay);
    };
  }
  throw InvalidArgument("unknown endpoint '" + spec +
                        "' (expected mock, exec:CMD, unix:PATH or replay:TRACE)");
}

int cmd_generate(const Options& o, const CLI::App& sub, std::ostream& out) {
  validate_context_options(o.context);
  const Corpus corpus = load_corpus(o.corpus);
  PipelineConfig config;
  config.style = corpus.style();
  config.origin_budget = o.context.origin_budget;
  config.sentence_cap = o.context.sentence_cap;
  config.entity_prompt = o.context.entity_prompt;
  config.entity_scope = parse_entity_scope(o.entity_scope);
  if (o.timeout_ms == 0) throw InvalidArgument("--timeout-ms must be positive");

  const auto factory = make_endpoint_factory(o, corpus);
  const auto docs = select_docs(corpus, o.split);
  const auto outcomes = run_batch(docs, factory, config, o.common.jobs);

  std::vector<std::string> predictions, contexts, trace, failures;
  for (const auto& oc : outcomes) {
    for (const auto& ev : oc.trace) trace.push_back(serialize_trace_event(ev));
    if (oc.ok()) {
      predictions.push_back(serialize_prediction({oc.doc_id, oc.result->caption}));
      contexts.push_back(serialize_context(oc.doc_id, oc.result->context));
    } else {
      ojson f;
      f["doc_id"] = oc.doc_id;
      f["kind"] = to_string(*oc.error_kind);
      f["message"] = oc.error;
      failures.push_back(f.dump());
    }
  }
  OutputDir dir(o.common.out);
  dir.write_lines("predictions.jsonl", predictions);
  dir.write_lines("contexts.jsonl", contexts);
  dir.write_lines("trace.jsonl", trace);
  dir.write_lines("failures.jsonl", failures);
  write_summary(dir, sub,
                {{"predictions", "predictions.jsonl"},
                 {"contexts", "contexts.jsonl"},
                 {"trace", "trace.jsonl"},
                 {"failures", "failures.jsonl"}},
                {{"documents", docs.size()},
                 {"succeeded", predictions.size()},
                 {"failed", failures.size()},
                 {"trace_events", trace.size()}});
  out << "generated " << predictions.size() << " captions, " << failures.size()
      << " failures\n";
  if (failures.empty()) return kExitOk;
  // A uniformly failing run points at the endpoint, not at the documents.
  if (predictions.empty()) {
    const auto kind = *outcomes.front().error_kind;
    const bool uniform = std::all_of(outcomes.begin(), outcomes.end(),
                                     [&](const auto& oc) { return oc.error_kind == kind; });
    if (uniform) return exit_code_for(kind);
  }
  return kExitDocumentFailures;
}

int cmd_evaluate(const Options& o, const CLI::App& sub, std::ostream& out) {
  validate_context_options(o.context);
  const Corpus corpus = load_corpus(o.corpus);
  require_file(o.predictions, "predictions file");
  const auto preds = read_predictions(o.predictions);
  if (preds.empty()) throw InvalidArgument("predictions file is empty");
  const auto tagger = make_tagger(o.tagger);

  std::unordered_map<std::string, SupplementedContext> dumped;
  if (!o.contexts.empty()) dumped = read_context_dump(o.contexts);

  std::vector<std::string> generated, references, contexts, ids;
  for (const auto& p : preds) {
    const Document* doc = corpus.find(p.doc_id);
    if (doc == nullptr) throw SchemaError("prediction for unknown doc_id " + p.doc_id);
    generated.push_back(p.caption);
    references.push_back(doc->caption);
    ids.push_back(p.doc_id);
    if (o.contexts.empty()) {
      contexts.push_back(origin_context(*doc, corpus.style(), o.context.origin_budget).final_text);
    } else {
      auto it = dumped.find(p.doc_id);
      if (it == dumped.end()) throw SchemaError("no context recorded for doc_id " + p.doc_id);
      contexts.push_back(it->second.final_text);
    }
  }
  std::optional<TrainIndex> train;
  if (!o.train_index.empty()) {
    require_file(o.train_index, "train index");
    train = load_train_index(o.train_index);
  }
  EvalReport report = evaluate(generated, references, contexts, *tagger,
                               train ? &*train : nullptr, ids);
  if (o.meteor) report = merge_external_meteor(std::move(report), *o.meteor);

  OutputDir dir(o.common.out);
  const std::string table = render_table(report);
  dir.open("report.json") << report_json(report) << '\n';
  dir.open("report.txt") << table;
  write_summary(dir, sub, {{"report", "report.json"}, {"table", "report.txt"}},
                ojson::parse(report_json(report)));
  out << table;
  return kExitOk;
}

int cmd_loss_audit(const Options& o, const CLI::App& sub, std::ostream& out) {
  require_file(o.logprobs, "log-prob file");
  const auto weights = loss::TaskWeights::parse(o.weights);
  const auto records = loss::read_logprob_file(o.logprobs);
  const auto a = loss::audit(records, weights);
  ojson j;
  for (auto t : {AlignmentTask::kSent, AlignmentTask::kEnt, AlignmentTask::kCap}) {
    j["tasks"][std::string(to_string(t))] = {{"samples", a.samples.at(t)},
                                             {"loss", a.task_loss.at(t)}};
  }
  j["weights"] = {{"sent", weights.sent}, {"ent", weights.ent}, {"cap", weights.cap}};
  j["total"] = a.total;
  OutputDir dir(o.common.out);
  dir.open("loss.json") << j.dump(2) << '\n';
  write_summary(dir, sub, {{"loss", "loss.json"}}, j);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", a.total);
  out << "weighted total loss " << buf << '\n';
  return kExitOk;
}

// ---- argument handling -------------------------------------------------

void add_common(CLI::App& sub, CommonOptions& c) {
  sub.add_option("--config", c.config, "Flat key=value file; flags override it");
  sub.add_option("--seed", c.seed, "Seed for every stochastic step");
  sub.add_option("--jobs", c.jobs, "Document-level parallelism")
      ->check(CLI::PositiveNumber);
  sub.add_option("--out", c.out, "Output directory")->required();
}

void add_tagger(CLI::App& sub, TaggerOptions& t) {
  sub.add_option("--tagger", t.mode, "Entity tagger")
      ->check(CLI::IsMember({"builtin", "annotations"}));
  sub.add_option("--gazetteer", t.gazetteer, "Gazetteer TSV (surface<TAB>label)");
  sub.add_option("--annotations", t.annotations, "External entity annotations JSONL");
  sub.add_flag("--no-patterns", t.no_patterns, "Disable the pattern recognizers");
}

void add_context(CLI::App& sub, ContextOptions& c) {
  sub.add_option("--origin-budget", c.origin_budget, "Origin context word budget");
  sub.add_option("--sentence-cap", c.sentence_cap, "Supplemented sentence word cap");
  sub.add_option("--entity-prompt", c.entity_prompt, "Entity hint line prefix");
}

// Values from --config are placed before the command-line arguments, so an
// explicit flag (taken last) overrides the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  std::size_t sub_pos = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (sub_pos == 0 && !args[i].starts_with("-")) sub_pos = i;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty() || sub_pos == 0) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    std::string key;
    for (const auto& p : item.parents) key += p + ".";
    key += item.name;
    if (key == "config") continue;
    if (item.inputs.empty()) {
      injected.push_back("--" + key);
    }
    for (const auto& v : item.inputs) injected.push_back("--" + key + "=" + v);
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"newscap: entity-aware news image captioning data and evaluation toolkit",
               "newscap"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->always_capture_default();

  auto* ingest = app.add_subcommand("ingest", "Validate raw JSONL records into a corpus directory");
  add_common(*ingest, o.common);
  ingest->add_option("--input", o.input, "Raw records, one JSON object per line")->required();
  ingest->add_option("--style", o.style, "Corpus style")
      ->check(CLI::IsMember({"goodnews", "nytimes", "generic"}));
  ingest->add_option("--abbreviations", o.abbreviations, "Abbreviation list override");

  auto* align = app.add_subcommand("build-alignment", "Build SENT/ENT/CAP samples and mini-groups");
  add_common(*align, o.common);
  add_tagger(*align, o.tagger);
  add_context(*align, o.context);
  align->add_option("--corpus", o.corpus, "Corpus directory")->required();
  align->add_option("--split", o.split, "train, validation, test or all");
  align->add_option("--negatives", o.negatives, "Negatives per SENT group or 'balanced'");
  align->add_option("--visual-policy", o.visual_policy, "Non-visual label list");
  align->add_option("--cap-context", o.cap_context, "Context regime of CAP samples");

  auto* context = app.add_subcommand("build-context", "Build textual input contexts");
  add_common(*context, o.common);
  add_tagger(*context, o.tagger);
  add_context(*context, o.context);
  context->add_option("--corpus", o.corpus, "Corpus directory")->required();
  context->add_option("--split", o.split, "train, validation, test or all");
  context->add_option("--regime", o.regime, "Context regime");
  context->add_option("--supplemented", o.supplemented,
                      "Supplemented context dump sizing origin_longer");

  auto* generate = app.add_subcommand("generate", "Run self-supplemented generation");
  add_common(*generate, o.common);
  add_tagger(*generate, o.tagger);
  add_context(*generate, o.context);
  generate->add_option("--corpus", o.corpus, "Corpus directory")->required();
  generate->add_option("--split", o.split, "train, validation, test or all");
  generate->add_option("--endpoint", o.endpoint, "mock, exec:CMD, unix:PATH or replay:TRACE");
  generate->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout");
  generate->add_option("--entity-scope", o.entity_scope, "origin or origin_plus_selected");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against references");
  add_common(*evaluate_cmd, o.common);
  add_tagger(*evaluate_cmd, o.tagger);
  add_context(*evaluate_cmd, o.context);
  evaluate_cmd->add_option("--corpus", o.corpus, "Corpus directory")->required();
  evaluate_cmd->add_option("--predictions", o.predictions, "Predictions JSONL")->required();
  evaluate_cmd->add_option("--contexts", o.contexts, "Context dump used at generation");
  evaluate_cmd->add_option("--train-index", o.train_index, "Training entity surfaces");
  evaluate_cmd->add_option("--meteor", o.meteor, "Externally computed METEOR in [0, 1]");

  auto* loss_cmd = app.add_subcommand("loss-audit", "Recompute task losses from log-probs");
  add_common(*loss_cmd, o.common);
  loss_cmd->add_option("--logprobs", o.logprobs, "Token log-prob JSONL")->required();
  loss_cmd->add_option("--weights", o.weights, "goodnews, nytimes or w_sent,w_ent,w_cap");

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "usage error: " << e.what() << '\n';
      return kExitUsage;
    }

    if (ingest->parsed()) return cmd_ingest(o, *ingest, out);
    if (align->parsed()) return cmd_build_alignment(o, *align, out);
    if (context->parsed()) return cmd_build_context(o, *context, out);
    if (generate->parsed()) return cmd_generate(o, *generate, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, *evaluate_cmd, out);
    if (loss_cmd->parsed()) return cmd_loss_audit(o, *loss_cmd, out);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const CLI::ParseError& e) {
    err << "usage error: bad config file: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace newscap::cli
