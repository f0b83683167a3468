// feast: command-line front end for the FoodEx2 coding pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "feast/feast.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace feast;

namespace {

struct Globals {
  std::string config;
  std::string catalog;
  std::string out;
  std::optional<std::uint64_t> seed;
};

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
      }
      file_.open(path, std::ios::binary);
      if (!file_) fail(ErrorCode::Io, "cannot write " + path);
    }
  }
  std::ostream& operator*() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

PipelineConfig load_settings(const Globals& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  // Model paths in a config file are relative to that file.
  if (!g.config.empty()) {
    const auto base = fs::path(g.config).parent_path();
    for (auto* p : {&cfg.linear_model, &cfg.mlp_model, &cfg.embedder_model, &cfg.index_cache_dir}) {
      if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).string();
    }
  }
  validate(cfg);
  return cfg;
}

Taxonomy require_catalog(const Globals& g) {
  if (g.catalog.empty()) fail(ErrorCode::InvalidArgument, "--catalog is required");
  return load_catalog(g.catalog);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A CSV with an ENFOODNAME column, or plain text with one query per line.
std::vector<std::string> read_queries(const std::string& path) {
  const auto content = read_file(path);
  const auto rows = csv::parse(content);
  if (!rows.empty()) {
    const auto& header = rows.front();
    const auto it = std::find(header.begin(), header.end(), "ENFOODNAME");
    if (it != header.end()) {
      const auto col = static_cast<std::size_t>(it - header.begin());
      std::vector<std::string> out;
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (col < rows[r].size()) out.push_back(rows[r][col]);
      }
      return out;
    }
  }
  std::vector<std::string> out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> gather_queries(const std::vector<std::string>& queries,
                                        const std::string& input) {
  auto out = queries;
  if (!input.empty()) {
    const auto more = read_queries(input);
    out.insert(out.end(), more.begin(), more.end());
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "give --query or --input");
  return out;
}

json ranked_json(const RankedCandidates& rc) {
  json items = json::array();
  for (const auto& it : rc.items) items.push_back({{"code", it.code.str()}, {"score", it.score}});
  return items;
}

// Owns whichever backends the config selects; built on demand.
class Backends {
 public:
  Backends(const Taxonomy& tx, PipelineConfig cfg) : tx_(tx), cfg_(std::move(cfg)) {}

  const PipelineConfig& config() const { return cfg_; }

  const EmbeddingProvider& provider() {
    if (!provider_) {
      if (cfg_.embedder == "deterministic") {
        provider_ = std::make_unique<DeterministicTestProvider>();
      } else if (cfg_.embedder == "toy") {
        if (cfg_.embedder_model.empty()) fail(ErrorCode::InvalidArgument, "embedder_model not set");
        std::ifstream in(cfg_.embedder_model);
        if (!in) fail(ErrorCode::Io, "cannot open " + cfg_.embedder_model);
        provider_ = std::make_unique<ToyEmbedder>(ToyEmbedder::load(in));
      } else if (cfg_.embedder == "remote") {
        provider_ = std::make_unique<remote::RemoteEmbeddingProvider>(remote::Endpoint{cfg_.embed_url});
      } else {
        fail(ErrorCode::InvalidArgument, "unknown embedder '" + cfg_.embedder + "'");
      }
    }
    return *provider_;
  }

  const PairScorer& scorer() {
    if (!scorer_) {
      if (cfg_.scorer == "lexical") {
        scorer_ = std::make_unique<LexicalScorer>();
      } else if (cfg_.scorer == "remote") {
        scorer_ = std::make_unique<remote::RemotePairScorer>(remote::Endpoint{cfg_.score_url});
      } else {
        fail(ErrorCode::InvalidArgument, "unknown scorer '" + cfg_.scorer + "'");
      }
    }
    return *scorer_;
  }

  IndexStore& indexes() {
    if (!indexes_) indexes_ = std::make_unique<IndexStore>(tx_, provider(), cfg_.index_cache_dir);
    return *indexes_;
  }

  PipelineDeps deps() {
    PipelineDeps d;
    d.taxonomy = &tx_;
    d.provider = &provider();
    d.indexes = &indexes();
    if (cfg_.selection_backend == SelectionBackend::RetrieveRerank) d.scorer = &scorer();
    if (cfg_.selection_backend == SelectionBackend::Llm ||
        cfg_.category_backend == CategoryBackend::Llm) {
      d.generator = &generator();
    }
    switch (cfg_.category_backend) {
      case CategoryBackend::ThresholdRemote:
        if (!categories_) {
          categories_ = std::make_unique<remote::RemoteCategoryScorer>(
              remote::Endpoint{cfg_.categories_url});
        }
        d.category_scorer = categories_.get();
        break;
      case CategoryBackend::Linear:
        if (!linear_) {
          if (cfg_.linear_model.empty()) fail(ErrorCode::InvalidArgument, "linear_model not set");
          std::ifstream in(cfg_.linear_model);
          if (!in) fail(ErrorCode::Io, "cannot open " + cfg_.linear_model);
          linear_ = std::make_unique<LinearMultiLabel>(LinearMultiLabel::load(in));
        }
        d.linear = linear_.get();
        break;
      case CategoryBackend::BiEncoder:
        if (!mlp_) {
          if (cfg_.mlp_model.empty()) {
            mlp_ = std::make_unique<Mlp>(Mlp::identity(tx_.category_registry().size()));
          } else {
            std::ifstream in(cfg_.mlp_model);
            if (!in) fail(ErrorCode::Io, "cannot open " + cfg_.mlp_model);
            mlp_ = std::make_unique<Mlp>(Mlp::load(in));
          }
        }
        d.mlp = mlp_.get();
        break;
      case CategoryBackend::Llm:
        break;
    }
    return d;
  }

 private:
  const TextGenerator& generator() {
    if (!generator_) {
      generator_ = std::make_unique<remote::RemoteGenerator>(remote::Endpoint{cfg_.generate_url});
    }
    return *generator_;
  }

  const Taxonomy& tx_;
  PipelineConfig cfg_;
  std::unique_ptr<EmbeddingProvider> provider_;
  std::unique_ptr<PairScorer> scorer_;
  std::unique_ptr<IndexStore> indexes_;
  std::unique_ptr<CategoryScorer> categories_;
  std::unique_ptr<LinearMultiLabel> linear_;
  std::unique_ptr<Mlp> mlp_;
  std::unique_ptr<TextGenerator> generator_;
};

json trace_json(const Prediction& p) {
  json descriptors = json::array();
  for (const auto& t : p.descriptors.traces) {
    descriptors.push_back({{"category", t.category.str()},
                           {"retrieved", ranked_json(t.retrieved)},
                           {"reranked", ranked_json(t.reranked)},
                           {"rejected", t.rejected}});
  }
  json categories = json::array();
  for (const auto& c : p.categories.categories) categories.push_back(c.str());
  json j{{"input", p.input},
         {"code", p.code},
         {"base",
          {{"retrieved", ranked_json(p.base.retrieved)},
           {"reranked", ranked_json(p.base.reranked)},
           {"fallback", p.base.fallback},
           {"rejected", p.base.rejected}}},
         {"categories", {{"selected", categories}, {"rejected", p.categories.rejected}}},
         {"descriptors", descriptors}};
  if (p.categories.scores) j["categories"]["logits"] = p.categories.scores->logits;
  return j;
}

// --- subcommands ------------------------------------------------------------------------

void cmd_ingest(const Globals& g) {
  const auto tx = require_catalog(g);
  json hierarchies = json::object();
  for (const auto& n : tx.nodes()) {
    hierarchies[n.hierarchy] = hierarchies.value(n.hierarchy, 0) + 1;
  }
  json categories = json::array();
  for (const auto& c : tx.category_registry()) {
    categories.push_back({{"id", c.id.str()}, {"name", c.name}, {"description", c.description}});
  }
  Output out(g.out);
  *out << json{{"nodes", tx.nodes().size()},
               {"hierarchies", hierarchies},
               {"categories", categories}}
              .dump(2)
       << '\n';
}

void cmd_preprocess(const Globals& g, const std::string& input, const std::string& audit_path) {
  const auto tx = require_catalog(g);
  const auto result = preprocess(read_dataset(input), tx);
  Output out(g.out);
  write_samples(result.samples, *out);
  const auto& a = result.audit;
  const json audit{{"input", a.input},           {"missing", a.missing},
                   {"anonymized", a.anonymized}, {"malformed_code", a.malformed_code},
                   {"unknown_code", a.unknown_code}, {"duplicates", a.duplicates},
                   {"output", a.output},         {"log", a.log}};
  if (audit_path.empty()) {
    json summary = audit;
    summary.erase("log");
    std::cerr << summary.dump() << '\n';
  } else {
    Output aout(audit_path);
    *aout << audit.dump(2) << '\n';
  }
}

void cmd_split(const Globals& g, const std::string& input, const std::string& mode,
               std::size_t test_size, std::size_t val_size) {
  if (g.out.empty()) fail(ErrorCode::InvalidArgument, "split needs --out <directory>");
  const auto cfg = load_settings(g);
  SplitSpec spec;
  spec.mode = mode == "oos" ? SplitMode::OutOfSample : SplitMode::Stratified;
  spec.seed = cfg.seed;
  spec.test_target_size = test_size;
  spec.val_target_size = val_size;
  const auto r = split(read_samples(input), spec);
  fs::create_directories(g.out);
  auto write = [&](const std::vector<Sample>& part, const char* name) {
    Output out((fs::path(g.out) / name).string());
    write_samples(part, *out);
  };
  write(r.train, "train.csv");
  write(r.test, "test.csv");
  if (spec.mode == SplitMode::Stratified) write(r.val, "val.csv");
  std::cerr << json{{"train", r.train.size()}, {"val", r.val.size()}, {"test", r.test.size()}}.dump()
            << '\n';
}

void cmd_mine(const Globals& g, const std::string& hierarchy, std::vector<std::string> codes,
              std::size_t n, const std::string& pairs_from) {
  const auto tx = require_catalog(g);
  const auto cfg = load_settings(g);
  const MiningConfig mcfg{n, cfg.seed, PoolPolicy::SameHierarchy};
  Output out(g.out);
  if (!pairs_from.empty()) {
    for (const auto& s : read_samples(pairs_from)) {
      write_pairs(mined_pairs(s.description, s.gold.base_term, kBaseHierarchy, tx, mcfg), *out);
    }
    return;
  }
  if (codes.empty()) {
    const auto& h = tx.hierarchy(hierarchy);
    for (std::size_t i : h.members) {
      if (i != h.root) codes.push_back(tx.node_at(i).code.str());
    }
  }
  for (const auto& c : codes) {
    write_negative_set(mine_hard_negatives(hierarchy, TermCode::parse(c), mcfg, tx), *out);
  }
}

void cmd_index(const Globals& g, std::vector<std::string> hierarchies) {
  if (g.out.empty()) fail(ErrorCode::InvalidArgument, "index needs --out <directory>");
  const auto tx = require_catalog(g);
  Backends b(tx, load_settings(g));
  if (hierarchies.empty()) {
    hierarchies.push_back(kBaseHierarchy);
    for (const auto& c : tx.category_registry()) hierarchies.push_back(c.id.str());
  }
  fs::create_directories(g.out);
  for (const auto& h : hierarchies) {
    const auto index = build_index(tx, h, b.provider());
    save_index(index, (fs::path(g.out) / (h + ".idx")).string());
    std::cerr << h << ": " << index.size() << " entries\n";
  }
}

const VectorIndex& pick_index(Backends& b, const std::string& hierarchy,
                              const std::string& index_file,
                              std::optional<VectorIndex>& loaded) {
  if (index_file.empty()) return b.indexes().get(hierarchy);
  loaded = load_index(index_file);
  return *loaded;
}

void cmd_retrieve(const Globals& g, const std::vector<std::string>& queries,
                  const std::string& hierarchy, std::size_t k, const std::string& index_file,
                  bool rerank, std::optional<double> tau) {
  const auto tx = require_catalog(g);
  Backends b(tx, load_settings(g));
  std::optional<VectorIndex> loaded;
  const auto& index = pick_index(b, hierarchy, index_file, loaded);
  const double threshold =
      tau.value_or(hierarchy == kBaseHierarchy ? b.config().tau_base : b.config().tau_descriptor);
  Output out(g.out);
  for (const auto& q : queries) {
    const auto retrieved = top_k(index, q, k, b.provider());
    json j{{"query", q}, {"hierarchy", index.tag()}, {"retrieved", ranked_json(retrieved)}};
    if (rerank) {
      j["reranked"] = ranked_json(rerank_and_filter(b.scorer(), q, retrieved, index, threshold));
    }
    *out << j.dump() << '\n';
  }
}

void cmd_classify_categories(const Globals& g, const std::vector<std::string>& queries,
                             const std::string& base_term) {
  const auto tx = require_catalog(g);
  Backends b(tx, load_settings(g));
  const auto deps = b.deps();
  Output out(g.out);
  for (const auto& q : queries) {
    const auto base =
        base_term.empty() ? run_task1(q, b.config(), deps).base_term : TermCode::parse(base_term);
    const auto r = run_task2(q, base, b.config(), deps);
    json cats = json::array();
    for (const auto& c : r.categories) cats.push_back(c.str());
    json j{{"query", q}, {"base_term", base.str()}, {"categories", cats}};
    if (r.scores) j["logits"] = r.scores->logits;
    *out << j.dump() << '\n';
  }
}

void cmd_code(const Globals& g, const std::vector<std::string>& queries, std::size_t jobs,
              const std::string& trace_path, const std::string& linear_model) {
  const auto tx = require_catalog(g);
  auto cfg = load_settings(g);
  if (!linear_model.empty()) cfg.linear_model = linear_model;
  Backends b(tx, cfg);
  const auto predictions = classify_batch(queries, b.config(), b.deps(), jobs);
  Output out(g.out);
  csv::write_row(*out, {"ENFOODNAME", "FACETS"});
  for (const auto& p : predictions) csv::write_row(*out, {p.input, p.code});
  if (!trace_path.empty()) {
    Output tout(trace_path);
    for (const auto& p : predictions) *tout << trace_json(p).dump() << '\n';
  }
}

void cmd_eval(const Globals& g, const std::string& pred_path, const std::string& gold_path,
              const std::string& format, const std::vector<std::size_t>& retrieval_ks) {
  const auto golds = read_samples(gold_path);
  Output out(g.out);
  if (!retrieval_ks.empty()) {
    const auto tx = require_catalog(g);
    Backends b(tx, load_settings(g));
    const auto& index = b.indexes().get(kBaseHierarchy);
    const std::size_t depth = *std::max_element(retrieval_ks.begin(), retrieval_ks.end());
    std::vector<RankingRun> runs;
    for (const auto& s : golds) {
      runs.push_back({top_k(index, s.description, depth, b.provider()),
                      {s.description, {s.gold.base_term}}});
    }
    const auto report = ranking_metrics(runs, retrieval_ks);
    if (format == "json") {
      write_report_records(report, *out, "retrieval");
    } else {
      write_report_table(report, *out, "base-term retrieval");
    }
    return;
  }
  if (pred_path.empty()) fail(ErrorCode::InvalidArgument, "eval needs --pred or --retrieval-k");
  const auto rows = csv::parse(read_file(pred_path));
  if (rows.empty()) fail(ErrorCode::Io, pred_path + " is empty");
  const auto& header = rows.front();
  auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::Io, pred_path + ": no " + name + " column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto code_col = column("FACETS");
  const auto text_col = column("ENFOODNAME");
  std::vector<FoodCode> preds;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t i = r - 1;
    if (i < golds.size() && text::collapse_whitespace(rows[r].at(text_col)) !=
                                text::collapse_whitespace(golds[i].description)) {
      fail(ErrorCode::InvalidArgument, "row " + std::to_string(r) +
                                           ": prediction and gold descriptions differ");
    }
    preds.push_back(parse_code(rows[r].at(code_col)));
  }
  std::vector<FoodCode> gold_codes;
  for (const auto& s : golds) gold_codes.push_back(s.gold);
  const auto e = evaluate_codes(preds, gold_codes);
  if (format == "json") {
    *out << json{{"metric", "exact_match"}, {"value", e.exact_match}}.dump() << '\n';
    *out << json{{"metric", "base_accuracy"}, {"value", e.base_accuracy}}.dump() << '\n';
    write_report_records(e.categories, *out, "categories");
    write_report_records(e.descriptors, *out, "descriptors");
  } else {
    char buf[96];
    std::snprintf(buf, sizeof buf, "instances      %zu\nexact match    %.4f\nbase accuracy  %.4f\n",
                  e.instances, e.exact_match, e.base_accuracy);
    *out << buf;
    write_report_table(e.categories, *out, "facet categories");
    write_report_table(e.descriptors, *out, "facet descriptors");
  }
}

void cmd_prompt(const Globals& g, const std::string& task, const std::string& context,
                const std::string& candidates, const std::string& food,
                const std::optional<std::string>& category) {
  PromptTask t;
  if (task == "base") {
    t = PromptTask::BaseTerm;
  } else if (task == "category") {
    t = PromptTask::FacetCategory;
  } else {
    t = PromptTask::FacetDescriptor;
  }
  std::vector<std::string> list;
  for (const auto& c : text::split(candidates, ',')) {
    const auto v = text::trim(c);
    if (!v.empty()) list.emplace_back(v);
  }
  const auto p = render_prompt(t, {context, list, food, category});
  Output out(g.out);
  *out << "system: " << p.system << "\nuser: " << p.user << '\n';
}

void cmd_train_classifier(const Globals& g, const std::string& train, std::size_t epochs,
                          double lr) {
  if (g.out.empty()) fail(ErrorCode::InvalidArgument, "train-classifier needs --out <model>");
  const auto tx = require_catalog(g);
  const auto cfg = load_settings(g);
  std::vector<FacetCategoryId> labels;
  for (const auto& c : tx.category_registry()) labels.push_back(c.id);
  std::vector<MultiLabelExample> data;
  for (const auto& s : read_samples(train)) {
    std::set<FacetCategoryId> cats;
    for (const auto& f : s.gold.facets) cats.insert(f.category);
    data.push_back({s.description, {cats.begin(), cats.end()}});
  }
  LinearTrainConfig tcfg;
  tcfg.epochs = epochs;
  tcfg.learning_rate = lr;
  tcfg.seed = cfg.seed;
  const auto r = train_linear_multilabel(data, labels, tcfg);
  Output out(g.out);
  r.model.save(*out);
  std::cerr << json{{"examples", data.size()},
                    {"initial_loss", r.epoch_losses.front()},
                    {"final_loss", r.epoch_losses.back()}}
                   .dump()
            << '\n';
}

void cmd_train_embedder(const Globals& g, const std::string& train, std::size_t steps,
                        std::size_t dimension, std::size_t batch, double scale,
                        std::size_t negatives) {
  if (g.out.empty()) fail(ErrorCode::InvalidArgument, "train-embedder needs --out <model>");
  const auto tx = require_catalog(g);
  const auto cfg = load_settings(g);
  const MiningConfig mcfg{negatives, cfg.seed, PoolPolicy::SameHierarchy};
  std::vector<MnrTriplet> triplets;
  for (const auto& s : read_samples(train)) {
    const auto gi = tx.index_of(kBaseHierarchy, s.gold.base_term);
    MnrTriplet t{s.description, node_context(tx, gi), {}};
    for (const auto& n : mine_hard_negatives_index(gi, mcfg, tx).negatives) {
      t.negatives.push_back(node_context(tx, tx.index_of(kBaseHierarchy, n.code)));
    }
    triplets.push_back(std::move(t));
  }
  // Every triplet in a batch must carry the same number of negatives.
  std::size_t fewest = negatives;
  for (const auto& t : triplets) fewest = std::min(fewest, t.negatives.size());
  for (auto& t : triplets) t.negatives.resize(fewest);
  ToyTrainConfig tcfg;
  tcfg.steps = steps;
  tcfg.dimension = dimension;
  tcfg.batch_size = batch;
  tcfg.seed = cfg.seed;
  tcfg.mnr.scale = scale;
  const auto r = train_toy_embedder(triplets, tcfg);
  Output out(g.out);
  r.embedder.save(*out);
  std::cerr << json{{"triplets", triplets.size()},
                    {"initial_loss", r.initial_loss},
                    {"final_loss", r.final_loss}}
                   .dump()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feast: map free-text food descriptions to FoodEx2 codes"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for splitting, mining and training");
  app.add_option("--catalog", g.catalog, "Catalog TSV")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output file or directory (default: stdout)");

  std::string input, audit, mode = "stratified", hierarchy = kBaseHierarchy, index_file;
  std::string pred, gold, format = "table", trace, base_term, linear_model;
  std::string task = "base", context, candidates, food;
  std::optional<std::string> category;
  std::vector<std::string> queries, codes, hierarchies;
  std::vector<std::size_t> retrieval_ks;
  std::size_t test_size = 0, val_size = 0, n = 10, k = 10, jobs = 1;
  std::size_t epochs = 200, steps = 500, dimension = 64, batch = 16;
  double lr = 2.0, scale = 1.0;
  std::optional<double> tau;

  auto* ingest = app.add_subcommand("ingest", "Load and check a catalog; print a summary");

  auto* pre = app.add_subcommand("preprocess", "Clean a raw dataset CSV against the catalog");
  pre->add_option("--input", input, "Raw CSV (FACETS, ENFOODNAME, BASETERM_NAME)")
      ->required()
      ->check(CLI::ExistingFile);
  pre->add_option("--audit", audit, "Write the full audit (JSON) here");

  auto* spl = app.add_subcommand("split", "Split cleaned samples into train/val/test");
  spl->add_option("--input", input, "Cleaned samples CSV")->required()->check(CLI::ExistingFile);
  spl->add_option("--mode", mode, "stratified | oos")
      ->check(CLI::IsMember({"stratified", "oos"}));
  spl->add_option("--test-size", test_size, "Target test size")->required();
  spl->add_option("--val-size", val_size, "Target validation size (stratified only)");

  auto* mine = app.add_subcommand("mine", "Mine taxonomy hard negatives");
  mine->add_option("--hierarchy", hierarchy, "Hierarchy to mine in");
  mine->add_option("--code", codes, "Target code (repeatable; default: every non-root node)");
  mine->add_option("-n,--negatives", n, "Negatives per target");
  mine->add_option("--pairs", input, "Export labeled reranker pairs for these samples")
      ->check(CLI::ExistingFile);

  auto* idx = app.add_subcommand("index", "Build and store vector indexes");
  idx->add_option("--hierarchy", hierarchies, "Hierarchy (repeatable; default: all)");

  auto* ret = app.add_subcommand("retrieve", "Top-k retrieval");
  auto* rr = app.add_subcommand("rerank", "Top-k retrieval followed by reranking");
  for (auto* sub : {ret, rr}) {
    sub->add_option("--query", queries, "Query text (repeatable)");
    sub->add_option("--input", input, "Queries file")->check(CLI::ExistingFile);
    sub->add_option("--hierarchy", hierarchy, "BASE or a facet category id");
    sub->add_option("-k", k, "Candidates to retrieve")->check(CLI::PositiveNumber);
    sub->add_option("--index", index_file, "Prebuilt index file")->check(CLI::ExistingFile);
  }
  rr->add_option("--tau", tau, "Rerank threshold (default from config)");

  auto* cc = app.add_subcommand("classify-categories", "Facet category classification");
  cc->add_option("--query", queries, "Query text (repeatable)");
  cc->add_option("--input", input, "Queries file")->check(CLI::ExistingFile);
  cc->add_option("--base-term", base_term, "Base term (default: predicted)");

  auto* code = app.add_subcommand("code", "Full pipeline: descriptions to FoodEx2 codes");
  code->add_option("--query", queries, "Query text (repeatable)");
  code->add_option("--input", input, "Queries file")->check(CLI::ExistingFile);
  code->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  code->add_option("--trace", trace, "Write per-query stage traces (JSONL) here");
  code->add_option("--linear-model", linear_model, "Override the config's linear_model");

  auto* ev = app.add_subcommand("eval", "Score predictions against gold samples");
  ev->add_option("--pred", pred, "Predictions CSV (ENFOODNAME, FACETS)")
      ->check(CLI::ExistingFile);
  ev->add_option("--gold", gold, "Gold samples CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}));
  ev->add_option("--retrieval-k", retrieval_ks, "Evaluate base-term retrieval at these K")
      ->delimiter(',');

  auto* pr = app.add_subcommand("prompt", "Render an instruction prompt");
  pr->add_option("--task", task, "base | category | descriptor")
      ->check(CLI::IsMember({"base", "category", "descriptor"}));
  pr->add_option("--context", context, "Candidate context");
  pr->add_option("--candidates", candidates, "Comma-separated candidate ids");
  pr->add_option("--food", food, "Food description");
  pr->add_option("--category", category, "Category name (descriptor task)");

  auto* tc = app.add_subcommand("train-classifier", "Train the linear category classifier");
  tc->add_option("--train", input, "Training samples CSV")->required()->check(CLI::ExistingFile);
  tc->add_option("--epochs", epochs, "Gradient steps");
  tc->add_option("--lr", lr, "Learning rate");

  auto* te = app.add_subcommand("train-embedder", "Train a toy embedder with MNR loss");
  te->add_option("--train", input, "Training samples CSV")->required()->check(CLI::ExistingFile);
  te->add_option("--steps", steps, "Optimizer steps");
  te->add_option("--dimension", dimension, "Embedding dimension");
  te->add_option("--batch", batch, "Batch size");
  te->add_option("--scale", scale, "Cosine scale");
  te->add_option("-n,--negatives", n, "Hard negatives per query");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) cmd_ingest(g);
    if (pre->parsed()) cmd_preprocess(g, input, audit);
    if (spl->parsed()) cmd_split(g, input, mode, test_size, val_size);
    if (mine->parsed()) cmd_mine(g, hierarchy, codes, n, input);
    if (idx->parsed()) cmd_index(g, hierarchies);
    if (ret->parsed()) {
      cmd_retrieve(g, gather_queries(queries, input), hierarchy, k, index_file, false, tau);
    }
    if (rr->parsed()) {
      cmd_retrieve(g, gather_queries(queries, input), hierarchy, k, index_file, true, tau);
    }
    if (cc->parsed()) cmd_classify_categories(g, gather_queries(queries, input), base_term);
    if (code->parsed()) {
      cmd_code(g, gather_queries(queries, input), jobs, trace, linear_model);
    }
    if (ev->parsed()) cmd_eval(g, pred, gold, format, retrieval_ks);
    if (pr->parsed()) cmd_prompt(g, task, context, candidates, food, category);
    if (tc->parsed()) cmd_train_classifier(g, input, epochs, lr);
    if (te->parsed()) cmd_train_embedder(g, input, steps, dimension, batch, scale, n);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
