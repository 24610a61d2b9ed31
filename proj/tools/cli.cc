#include "cli.h"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "corefdec/corefud.h"
#include "corefdec/decoder.h"
#include "corefdec/distribution.h"
#include "corefdec/errors.h"
#include "corefdec/harness.h"
#include "corefdec/linker.h"
#include "corefdec/metrics.h"
#include "corefdec/pipeline.h"
#include "corefdec/sampling.h"
#include "corefdec/tags.h"
#include "json.hpp"

#ifndef COREFDEC_VERSION
#define COREFDEC_VERSION "0.0.0"
#endif

namespace corefdec {
namespace {

using json = nlohmann::json;

// Usage problems detected after parsing (e.g. conflicting flags).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string in, out, corpus, gold, pred, scores, vocab, vocab_out;
  std::string tags_out, transitions, json_out, sizes, grid, counts;
  std::string manifest = "-";
  std::vector<std::string> inputs;
  std::string mode = "constrained";
  std::string match = "all";
  std::string strategy = "all";
  bool depth_dependent = false;
  bool enforce = false;
  bool allow_open_final = false;
  bool singletons = false;
  bool global_epochs = false;
  int max_depth = 10;
  int jobs = 1;
  int documents = 20;
  int sentences = 6;
  int keep = 5;
  int count = 100;
  int target = 0;
  int64_t context = 512;
  int64_t right = -1;
  double crossing = 0.0;
  double flip = 0.0;
  double temperature = 0.25;
  uint64_t seed = 1;
};

std::shared_ptr<spdlog::logger> Log() {
  static auto logger = [] {
    auto l = spdlog::stderr_color_st("corefdec");
    l->set_pattern("corefdec: %l: %v");
    l->set_level(spdlog::level::warn);
    if (const char *level = std::getenv("COREFDEC_LOG")) {
      l->set_level(spdlog::level::from_str(level));
    }
    return l;
  }();
  return logger;
}

// An output destination; "-" is the caller's output stream.
class Output {
 public:
  Output(const std::string &path, std::ostream &fallback) {
    if (path == "-" || path.empty()) {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DataError("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream &operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream *stream_ = nullptr;
};

std::ifstream OpenInput(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

bool EndsWith(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string Percent(double value, int decimals) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, 100.0 * value);
  return buffer;
}

TagVocabulary LoadVocabulary(const std::string &path) {
  auto in = OpenInput(path);
  try {
    return ReadVocabulary(in);
  } catch (const DataError &e) {
    throw DataError(path + ": " + e.what());
  }
}

template <typename T, typename Reader>
T ReadWithPath(const std::string &path, Reader reader) {
  auto in = OpenInput(path);
  try {
    return reader(in);
  } catch (const DataError &e) {
    throw DataError(path + ":" + e.what());
  }
}

// Subcommands.

void CmdValidate(const Options &o, std::ostream &out) {
  auto docs = ReadCorefudFile(o.in);
  size_t sentences = 0, entities = 0, mentions = 0;
  for (const Document &doc : docs) {
    ValidateDocument(doc);
    sentences += doc.sentences.size();
    entities += doc.entities.size();
    for (const Entity &e : doc.entities) mentions += e.mentions.size();
  }
  out << "documents\t" << docs.size() << "\nsentences\t" << sentences
      << "\nentities\t" << entities << "\nmentions\t" << mentions << '\n';
}

void CmdGenCorpus(const Options &o, std::ostream &out) {
  CorpusSpec spec;
  spec.seed = o.seed;
  spec.documents = o.documents;
  spec.max_depth = o.max_depth;
  spec.crossing_probability = o.crossing;
  spec.sentences_per_document = o.sentences;
  Output output(o.out, out);
  WriteCorefud(GenerateCorpus(spec), *output);
}

void CmdEncode(const Options &o, std::ostream &out) {
  auto docs = ReadCorefudFile(o.in);
  auto sequences = EncodeDocuments(docs, o.depth_dependent, o.max_depth);
  Output output(o.out, out);
  WriteTagFile(sequences, *output);
  if (!o.vocab_out.empty()) {
    std::vector<std::vector<Tag>> tags;
    for (const auto &seq : sequences) tags.push_back(seq.tags);
    Output vocab(o.vocab_out, out);
    WriteVocabulary(BuildVocabulary(tags, o.depth_dependent), *vocab);
  }
}

void CmdVocab(const Options &o, std::ostream &out) {
  auto docs = ReadCorefudFile(o.in);
  std::vector<std::vector<Tag>> tags;
  for (auto &seq : EncodeDocuments(docs, o.depth_dependent, o.max_depth)) {
    tags.push_back(std::move(seq.tags));
  }
  Output output(o.out, out);
  WriteVocabulary(BuildVocabulary(tags, o.depth_dependent), *output);
}

void CmdSynth(const Options &o, std::ostream &out) {
  auto docs = ReadCorefudFile(o.corpus);
  auto sequences = EncodeDocuments(docs, o.depth_dependent, o.max_depth);
  TagVocabulary vocab(o.depth_dependent);
  if (!o.vocab.empty()) {
    vocab = LoadVocabulary(o.vocab);
    if (vocab.depth_dependent() != o.depth_dependent) {
      throw DataError("vocabulary kind does not match --depth-dependent");
    }
  } else {
    std::vector<std::vector<Tag>> tags;
    for (const auto &seq : sequences) tags.push_back(seq.tags);
    vocab = BuildVocabulary(tags, o.depth_dependent);
  }
  NoiseSpec noise{o.seed, o.flip, o.temperature};
  Output output(o.out, out);
  WriteDistributionFile(SynthesizeLogits(sequences, vocab, noise), *output);
}

DecodeMode ParseMode(const std::string &mode) {
  if (mode == "constrained") return DecodeMode::kConstrained;
  if (mode == "greedy") return DecodeMode::kGreedy;
  return DecodeMode::kCrf;
}

void CmdDecode(const Options &o, std::ostream &out) {
  DistributionTensor tensor = ReadDistributionFile(o.in);
  DecoderConfig config;
  config.mode = ParseMode(o.mode);
  config.max_depth = o.max_depth;
  config.enforce_constraints = o.enforce;
  config.allow_open_final = o.allow_open_final;
  std::optional<TransitionMatrix> transitions;
  if (config.mode == DecodeMode::kCrf) {
    if (o.transitions.empty()) throw UsageError("--mode crf needs --transitions");
    transitions = ReadWithPath<TransitionMatrix>(
        o.transitions,
        [&](std::istream &in) { return ReadTransitionFile(in, tensor.vocabulary); });
  }
  auto decoded = DecodeTensor(tensor, config,
                              transitions ? &*transitions : nullptr, o.jobs);
  std::vector<TagSequence> sequences;
  for (size_t s = 0; s < decoded.size(); ++s) {
    TagSequence seq{tensor.sentences[s].doc_id,
                    tensor.sentences[s].sentence_index, {}};
    for (int k : decoded[s]) seq.tags.push_back(tensor.vocabulary.tag(k));
    sequences.push_back(std::move(seq));
  }
  Log()->info("decoded {} sentences", sequences.size());
  if (!o.tags_out.empty()) {
    Output tags(o.tags_out, out);
    WriteTagFile(sequences, *tags);
  }
  if (EndsWith(o.out, ".conllu")) {
    std::vector<Document> base = o.corpus.empty()
                                     ? PlaceholderDocuments(sequences)
                                     : ReadCorefudFile(o.corpus);
    std::vector<Document> docs = DocumentsFromTags(base, sequences);
    Output output(o.out, out);
    WriteCorefud(docs, *output);
  } else {
    Output output(o.out, out);
    WriteTagFile(sequences, *output);
  }
}

void CmdEnsemble(const Options &o, std::ostream &out) {
  std::vector<DistributionTensor> members;
  for (const std::string &path : o.inputs) {
    members.push_back(ReadDistributionFile(path));
  }
  Output output(o.out, out);
  WriteDistributionFile(Ensemble(members), *output);
}

void CmdTransitions(const Options &o, std::ostream &out) {
  TagVocabulary vocab = LoadVocabulary(o.vocab);
  Output output(o.out, out);
  WriteTransitionFile(vocab, ConstraintTransitions(vocab, o.max_depth), *output);
}

void CmdGoldScores(const Options &o, std::ostream &out) {
  auto gold = ReadCorefudFile(o.gold);
  auto pred = ReadCorefudFile(o.pred);
  Output output(o.out, out);
  WriteScoresFile(GoldAntecedentScores(pred, gold), *output);
}

void CmdLink(const Options &o, std::ostream &out) {
  auto docs = ReadCorefudFile(o.corpus);
  auto scores = ReadWithPath<std::vector<AntecedentScores>>(
      o.scores, [](std::istream &in) { return ReadScoresFile(in); });
  std::map<std::string, const AntecedentScores *> by_id;
  for (const auto &s : scores) by_id[s.doc_id] = &s;
  for (Document &doc : docs) {
    auto it = by_id.find(doc.doc_id);
    doc.entities.clear();
    if (it != by_id.end()) doc.entities = Link(*it->second);
    Canonicalize(doc);
    ValidateDocument(doc);
  }
  if (by_id.size() > docs.size()) {
    throw DataError("score file names documents missing from the corpus");
  }
  Output output(o.out, out);
  WriteCorefud(docs, *output);
}

json PrfJson(const Prf &p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

void CmdScore(const Options &o, std::ostream &out) {
  auto gold = ReadCorefudFile(o.gold);
  auto pred = ReadCorefudFile(o.pred);
  std::vector<MatchMode> modes;
  if (o.match == "all") {
    modes = StandardModes();
  } else {
    MatchKind kind = o.match == "head"      ? MatchKind::kHead
                     : o.match == "partial" ? MatchKind::kPartial
                                            : MatchKind::kExact;
    modes.push_back({kind, o.singletons});
  }
  std::vector<ScoreReport> reports;
  for (const MatchMode &mode : modes) reports.push_back(Score(gold, pred, mode));
  for (const std::string &w : reports.front().warnings) Log()->warn("{}", w);

  const std::vector<std::pair<std::string, std::function<double(const ScoreReport &)>>>
      rows = {
          {"MUC R", [](auto &r) { return r.muc.recall; }},
          {"MUC P", [](auto &r) { return r.muc.precision; }},
          {"MUC F1", [](auto &r) { return r.muc.f1; }},
          {"B3 R", [](auto &r) { return r.b3.recall; }},
          {"B3 P", [](auto &r) { return r.b3.precision; }},
          {"B3 F1", [](auto &r) { return r.b3.f1; }},
          {"CEAFe R", [](auto &r) { return r.ceafe.recall; }},
          {"CEAFe P", [](auto &r) { return r.ceafe.precision; }},
          {"CEAFe F1", [](auto &r) { return r.ceafe.f1; }},
          {"CoNLL", [](auto &r) { return r.conll; }},
      };
  out << std::left << std::setw(10) << "Metric";
  for (const auto &r : reports) out << std::right << std::setw(20) << ModeLabel(r.mode);
  out << '\n';
  for (const auto &[name, value] : rows) {
    out << std::left << std::setw(10) << name;
    for (const auto &r : reports) {
      out << std::right << std::setw(20) << Percent(value(r), 2);
    }
    out << '\n';
  }

  if (!o.json_out.empty()) {
    json report = json::array();
    for (const auto &r : reports) {
      report.push_back({{"mode", ModeLabel(r.mode)},
                        {"muc", PrfJson(r.muc)},
                        {"b3", PrfJson(r.b3)},
                        {"ceafe", PrfJson(r.ceafe)},
                        {"conll", r.conll}});
    }
    Output output(o.json_out, out);
    *output << report.dump(2) << '\n';
  }
}

std::vector<CorpusSize> LoadSizes(const std::string &path) {
  return ReadWithPath<std::vector<CorpusSize>>(
      path, [](std::istream &in) { return ReadCorpusSizes(in); });
}

MixStrategy StrategyOrThrow(const std::string &name) {
  auto strategy = ParseStrategy(name);
  if (!strategy) throw UsageError("unknown strategy '" + name + "'");
  return *strategy;
}

void CmdMixRatio(const Options &o, std::ostream &out) {
  auto sizes = LoadSizes(o.sizes);
  std::vector<MixStrategy> strategies;
  if (o.strategy == "all") {
    strategies = {MixStrategy::kLogarithmic, MixStrategy::kUniform,
                  MixStrategy::kSqrt, MixStrategy::kLinear};
  } else {
    strategies = {StrategyOrThrow(o.strategy)};
  }
  std::vector<MixRatio> ratios;
  for (MixStrategy s : strategies) ratios.push_back(ComputeMixRatio(sizes, s));
  out << "corpus";
  for (const auto &r : ratios) out << '\t' << StrategyName(r.strategy);
  out << '\n';
  for (size_t c = 0; c < sizes.size(); ++c) {
    out << sizes[c].id;
    for (const auto &r : ratios) out << '\t' << Percent(r.weights[c], 1);
    out << '\n';
  }
}

void CmdSample(const Options &o, std::ostream &out) {
  if (o.strategy == "all") throw UsageError("sample needs a single --strategy");
  auto ratio = ComputeMixRatio(LoadSizes(o.sizes), StrategyOrThrow(o.strategy));
  Output output(o.out, out);
  for (const std::string &id : SampleBatches(ratio, o.seed, o.count)) {
    *output << id << '\n';
  }
}

void CmdPack(const Options &o, std::ostream &out) {
  std::vector<int> counts;
  std::stringstream in(o.counts);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      counts.push_back(std::stoi(field));
    } catch (const std::exception &) {
      throw UsageError("--counts must be comma-separated integers");
    }
  }
  std::optional<int64_t> right;
  if (o.right >= 0) right = o.right;
  ContextWindow w = PackContext(counts, o.target, o.context, right);
  out << "left_start=" << w.left_start << " right_end=" << w.right_end
      << " left_context=" << w.left_context
      << " right_context=" << w.right_context << " total=" << w.size() << '\n';
}

void CmdSelect(const Options &o, std::ostream &out) {
  GridFile grid = ReadWithPath<GridFile>(
      o.grid, [](std::istream &in) { return ReadScoreGrid(in); });
  auto selection = SelectCheckpoints(grid.scores, o.keep, !o.global_epochs);
  out << "corpus\trun\tepoch\n";
  for (size_t c = 0; c < grid.corpora.size(); ++c) {
    for (const Checkpoint &cp : selection.per_corpus[c]) {
      out << grid.corpora[c] << '\t' << grid.runs[cp.run] << '\t'
          << grid.epochs[cp.epoch] << '\n';
    }
  }
}

// Manifest helpers.

const std::vector<std::string> kInputOptions = {
    "--in", "--corpus", "--gold", "--pred", "--scores", "--vocab",
    "--transitions", "--sizes", "--grid"};
const std::vector<std::string> kOutputOptions = {"--out", "--tags-out",
                                                 "--vocab-out", "--json"};

json DescribeRun(const CLI::App &sub) {
  json config = json::object();
  json inputs = json::array(), outputs = json::array();
  for (const CLI::Option *opt : sub.get_options()) {
    if (opt == sub.get_help_ptr() || opt->get_name().empty()) continue;
    std::string key = opt->get_single_name();
    json value;
    if (opt->get_type_size() == 0) {
      value = opt->count() > 0;
    } else if (opt->count() > 0) {
      auto results = opt->results();
      value = opt->get_expected_max() > 1 ? json(results) : json(results.back());
    } else {
      value = opt->get_default_str();
    }
    config[key] = value;
    auto matches = [&](const std::vector<std::string> &list) {
      return std::find(list.begin(), list.end(), "--" + key) != list.end();
    };
    if (opt->count() == 0) continue;
    for (const std::string &path : opt->results()) {
      if (matches(kInputOptions)) inputs.push_back(path);
      if (matches(kOutputOptions)) outputs.push_back(path);
    }
  }
  return {{"subcommand", sub.get_name()},
          {"inputs", inputs},
          {"outputs", outputs},
          {"config", config}};
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  const auto started = std::chrono::steady_clock::now();
  Options o;
  CLI::App app{"Stack-instruction mention decoding and coreference tooling",
               "corefdec"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", COREFDEC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--manifest", o.manifest,
                 "Where to write the JSON run manifest ('-' for stderr)");

  auto *validate = app.add_subcommand("validate", "Parse and validate a CorefUD file");
  validate->add_option("--in", o.in, "CorefUD file")->required();

  auto *gen = app.add_subcommand("gen-corpus", "Generate a random CorefUD corpus");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--docs", o.documents, "Number of documents")->check(CLI::NonNegativeNumber);
  gen->add_option("--sentences", o.sentences, "Sentences per document")->check(CLI::PositiveNumber);
  gen->add_option("--max-depth", o.max_depth, "Maximum mention nesting")->check(CLI::PositiveNumber);
  gen->add_option("--crossing", o.crossing, "Probability of keeping a crossing mention")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", o.out, "Output CorefUD file")->required();

  auto *encode = app.add_subcommand("encode", "Encode mentions as instruction tags");
  encode->add_option("--in", o.in, "CorefUD file")->required();
  encode->add_option("--out", o.out, "Output tag file")->required();
  encode->add_option("--vocab-out", o.vocab_out, "Also write the tag vocabulary");
  encode->add_flag("--depth-dependent", o.depth_dependent, "Annotate tags with stack depth");
  encode->add_option("--max-depth", o.max_depth, "Maximum stack depth")->check(CLI::PositiveNumber);

  auto *vocab = app.add_subcommand("vocab", "Build the tag vocabulary of a corpus");
  vocab->add_option("--in", o.in, "CorefUD file")->required();
  vocab->add_option("--out", o.out, "Output vocabulary file")->required();
  vocab->add_flag("--depth-dependent", o.depth_dependent, "Annotate tags with stack depth");
  vocab->add_option("--max-depth", o.max_depth, "Maximum stack depth")->check(CLI::PositiveNumber);

  auto *synth = app.add_subcommand("synth-logits", "Synthesize noisy tag distributions");
  synth->add_option("--corpus", o.corpus, "Gold CorefUD file")->required();
  synth->add_option("--out", o.out, "Output distribution file")->required();
  synth->add_option("--vocab", o.vocab, "Tag vocabulary (default: built from the corpus)");
  synth->add_flag("--depth-dependent", o.depth_dependent, "Use depth-dependent tags");
  synth->add_option("--max-depth", o.max_depth, "Maximum stack depth")->check(CLI::PositiveNumber);
  synth->add_option("--flip", o.flip, "Probability of moving a token's argmax")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--temperature", o.temperature, "Softmax temperature")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", o.seed, "Random seed");

  auto *decode = app.add_subcommand("decode", "Decode tag distributions");
  decode->add_option("--in", o.in, "Distribution file")->required();
  decode->add_option("--out", o.out, "Output: CorefUD when ending in .conllu, else tag file")
      ->required();
  decode->add_option("--mode", o.mode, "Decoding algorithm")
      ->check(CLI::IsMember({"constrained", "greedy", "crf"}));
  decode->add_option("--max-depth", o.max_depth, "Maximum stack depth")->check(CLI::PositiveNumber);
  decode->add_option("--transitions", o.transitions, "Transition matrix file (crf mode)");
  decode->add_flag("--constrain", o.enforce, "crf mode: forbid invalid transitions");
  decode->add_flag("--allow-open-final", o.allow_open_final,
                   "Accept sequences ending with open mentions");
  decode->add_option("--corpus", o.corpus, "CorefUD text for the .conllu output");
  decode->add_option("--tags-out", o.tags_out, "Also write the decoded tag file");
  decode->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto *ensemble = app.add_subcommand("ensemble", "Average tag distributions");
  ensemble->add_option("--in", o.inputs, "Distribution files")->required();
  ensemble->add_option("--out", o.out, "Output distribution file")->required();

  auto *transitions = app.add_subcommand(
      "transitions", "Write the constraint transition matrix of a depth-dependent vocabulary");
  transitions->add_option("--vocab", o.vocab, "Vocabulary file")->required();
  transitions->add_option("--max-depth", o.max_depth, "Maximum stack depth")->check(CLI::PositiveNumber);
  transitions->add_option("--out", o.out, "Output transition file")->required();

  auto *gold_scores = app.add_subcommand(
      "gold-scores", "Antecedent scores reproducing the gold clustering");
  gold_scores->add_option("--gold", o.gold, "Gold CorefUD file")->required();
  gold_scores->add_option("--pred", o.pred, "CorefUD file with predicted mentions")->required();
  gold_scores->add_option("--out", o.out, "Output score file")->required();

  auto *link = app.add_subcommand("link", "Cluster mentions by antecedent scores");
  link->add_option("--corpus", o.corpus, "CorefUD text")->required();
  link->add_option("--scores", o.scores, "Antecedent score file")->required();
  link->add_option("--out", o.out, "Output CorefUD file")->required();

  auto *score = app.add_subcommand("score", "Evaluate predicted coreference");
  score->add_option("--gold", o.gold, "Gold CorefUD file")->required();
  score->add_option("--pred", o.pred, "Predicted CorefUD file")->required();
  score->add_option("--mode", o.match, "Mention matching")
      ->check(CLI::IsMember({"head", "partial", "exact", "all"}));
  score->add_flag("--singletons", o.singletons, "Keep singleton entities");
  score->add_option("--json", o.json_out, "Also write the report as JSON");

  auto *mix = app.add_subcommand("mixratio", "Corpus mix ratios in percent");
  mix->add_option("--sizes", o.sizes, "corpus<TAB>size file")->required();
  mix->add_option("--strategy", o.strategy, "uniform, linear, sqrt, log or all");

  auto *sample = app.add_subcommand("sample", "Sample batch-example corpus ids");
  sample->add_option("--sizes", o.sizes, "corpus<TAB>size file")->required();
  sample->add_option("--strategy", o.strategy, "uniform, linear, sqrt or log")->required();
  sample->add_option("--count", o.count, "Number of draws")->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", o.seed, "Random seed");
  sample->add_option("--out", o.out, "Output file");

  auto *pack = app.add_subcommand("pack", "Context window around a sentence");
  pack->add_option("--counts", o.counts, "Comma-separated subword counts")->required();
  pack->add_option("--target", o.target, "Target sentence index")->required();
  pack->add_option("--context", o.context, "Context budget in subwords");
  pack->add_option("--right", o.right, "Right context limit (-1: unlimited)");

  auto *select = app.add_subcommand("select-checkpoints", "Pick runs and epochs");
  select->add_option("--grid", o.grid, "run<TAB>epoch<TAB>corpus<TAB>score file")->required();
  select->add_option("--keep", o.keep, "Runs to keep")->check(CLI::PositiveNumber);
  select->add_flag("--global", o.global_epochs,
                   "Per run, the epoch best across all corpora");

  const std::vector<std::pair<CLI::App *, void (*)(const Options &, std::ostream &)>>
      commands = {{validate, CmdValidate},   {gen, CmdGenCorpus},
                  {encode, CmdEncode},       {vocab, CmdVocab},
                  {synth, CmdSynth},         {decode, CmdDecode},
                  {ensemble, CmdEnsemble},   {transitions, CmdTransitions},
                  {gold_scores, CmdGoldScores}, {link, CmdLink},
                  {score, CmdScore},         {mix, CmdMixRatio},
                  {sample, CmdSample},       {pack, CmdPack},
                  {select, CmdSelect}};

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  int status = kExitOk;
  const CLI::App *ran = nullptr;
  try {
    for (const auto &[sub, run] : commands) {
      if (sub->parsed()) {
        ran = sub;
        run(o, out);
      }
    }
  } catch (const UsageError &e) {
    err << "corefdec: " << e.what() << '\n' << app.help();
    status = kExitUsage;
  } catch (const DataError &e) {
    err << "corefdec: error: " << e.what() << '\n';
    status = kExitData;
  } catch (const std::exception &e) {
    err << "corefdec: internal error: " << e.what() << '\n';
    status = kExitInternal;
  }

  if (ran != nullptr) {
    json manifest = DescribeRun(*ran);
    manifest["tool"] = "corefdec";
    manifest["version"] = COREFDEC_VERSION;
    manifest["config"]["manifest"] = o.manifest;
    manifest["exit_status"] = status;
    manifest["duration_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  started)
            .count();
    if (o.manifest == "-") {
      err << manifest.dump() << '\n';
    } else {
      std::ofstream file(o.manifest);
      file << manifest.dump(2) << '\n';
      if (!file) {
        err << "corefdec: cannot write manifest '" << o.manifest << "'\n";
        if (status == kExitOk) status = kExitData;
      }
    }
  }
  return status;
}

}  // namespace corefdec
