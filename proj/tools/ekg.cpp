// ekg: curate the xAPI-Edu table, build the student graph, query it and mine
// creativity patterns. Exit codes: 0 success, 1 usage/config error, 2 data or
// parse error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ekg/edu/curation.hpp"
#include "ekg/edu/graph_builder.hpp"
#include "ekg/edu/rules.hpp"
#include "ekg/edu/taxonomy.hpp"
#include "ekg/error.hpp"
#include "ekg/rdf/turtle.hpp"
#include "ekg/sparql/eval.hpp"
#include "ekg/sparql/query.hpp"

namespace fs = std::filesystem;
using namespace ekg;

namespace {

#ifndef EKG_DATA_DIR
#define EKG_DATA_DIR "data"
#endif

struct Config {
  std::optional<fs::path> input;
  fs::path taxonomy = fs::path(EKG_DATA_DIR) / "taxonomy" / "creativity.taxonomy";
  fs::path rules = fs::path(EKG_DATA_DIR) / "rules" / "default.rules";
  fs::path schema = fs::path(EKG_DATA_DIR) / "schema" / "default.schema";
  fs::path out = "out";
  std::optional<std::string> ns;
  std::optional<std::pair<std::uint64_t, std::size_t>> synthetic;
  std::map<std::string, std::vector<std::string>> ordinals;
};

// Command-line values; empty means "not given".
struct Flags {
  std::string config, input, taxonomy, rules, schema, out, ns, synthetic;
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

std::pair<std::uint64_t, std::size_t> parse_synthetic(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) config_error("--synthetic expects <seed>,<n>, got '" + spec + "'");
  try {
    std::size_t used = 0;
    const std::string seed = spec.substr(0, comma), n = spec.substr(comma + 1);
    const auto s = std::stoull(seed, &used);
    if (used != seed.size()) throw std::invalid_argument(seed);
    const auto count = std::stoull(n, &used);
    if (used != n.size()) throw std::invalid_argument(n);
    return {s, static_cast<std::size_t>(count)};
  } catch (const std::logic_error&) {
    config_error("--synthetic expects <seed>,<n>, got '" + spec + "'");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Config resolve_config(const Flags& flags) {
  Config cfg;
  if (!flags.config.empty()) {
    const fs::path file = flags.config;
    if (!fs::exists(file)) config_error("config file " + file.string() + " does not exist");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(file));
    } catch (const nlohmann::json::exception& e) {
      config_error("config " + file.string() + ": " + e.what());
    }
    if (!j.is_object()) config_error("config " + file.string() + " must hold a JSON object");
    const fs::path base = file.parent_path();
    auto path = [&](const char* key) -> std::optional<fs::path> {
      if (!j.contains(key)) return std::nullopt;
      if (!j[key].is_string()) config_error(std::string("config key '") + key + "' must be a string");
      fs::path p = j[key].get<std::string>();
      return p.is_relative() ? base / p : p;
    };
    static const std::set<std::string> known = {"input", "taxonomy", "rules",    "schema",
                                                "out",   "namespace", "synthetic", "ordinals"};
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) config_error("unknown config key '" + key + "'");
    }
    if (auto p = path("input")) cfg.input = *p;
    if (auto p = path("taxonomy")) cfg.taxonomy = *p;
    if (auto p = path("rules")) cfg.rules = *p;
    if (auto p = path("schema")) cfg.schema = *p;
    if (auto p = path("out")) cfg.out = *p;
    if (j.contains("namespace")) cfg.ns = j["namespace"].get<std::string>();
    if (j.contains("synthetic")) cfg.synthetic = parse_synthetic(j["synthetic"].get<std::string>());
    if (j.contains("ordinals")) {
      try {
        cfg.ordinals = j["ordinals"].get<std::map<std::string, std::vector<std::string>>>();
      } catch (const nlohmann::json::exception&) {
        config_error("config key 'ordinals' must map scale names to arrays of values");
      }
    }
  }
  // Flags win over the file.
  if (!flags.input.empty()) cfg.input = flags.input;
  if (!flags.taxonomy.empty()) cfg.taxonomy = flags.taxonomy;
  if (!flags.rules.empty()) cfg.rules = flags.rules;
  if (!flags.schema.empty()) cfg.schema = flags.schema;
  if (!flags.out.empty()) cfg.out = flags.out;
  if (!flags.ns.empty()) cfg.ns = flags.ns;
  if (!flags.synthetic.empty()) cfg.synthetic = parse_synthetic(flags.synthetic);

  if (cfg.ns) {
    try {
      rdf::Term::iri(*cfg.ns);
    } catch (const Error&) {
      config_error("namespace '" + *cfg.ns + "' is not a valid IRI");
    }
  }
  return cfg;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) config_error(std::string(what) + " " + p.string() + " does not exist");
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
  std::cout << "wrote " << path.string() << '\n';
}

edu::MappingSchema load_mapping(const Config& cfg) {
  require_file(cfg.schema, "schema");
  edu::MappingSchema schema = edu::load_schema(cfg.schema);
  if (cfg.ns && *cfg.ns != schema.ns) {
    for (auto& rule : schema.rules) {
      if (rule.predicate.starts_with(schema.ns)) rule.predicate = *cfg.ns + rule.predicate.substr(schema.ns.size());
    }
    schema.ns = *cfg.ns;
  }
  return schema;
}

edu::RawTable load_raw(const Config& cfg) {
  if (cfg.synthetic) return edu::gen_synthetic(cfg.synthetic->first, cfg.synthetic->second);
  if (!cfg.input) config_error("no input: pass --input <csv> or --synthetic <seed>,<n>");
  require_file(*cfg.input, "input");
  return edu::load_csv(*cfg.input);
}

struct Curated {
  edu::RawTable raw;
  edu::CleanResult cleaned;
  std::vector<edu::CuratedRecord> records;
};

Curated curate(const Config& cfg) {
  Curated c;
  c.raw = load_raw(cfg);
  c.cleaned = edu::clean(c.raw);
  c.records = edu::select_features(c.cleaned.table);
  return c;
}

sparql::OrdinalTable ordinals_for(const Config& cfg, const std::string& ns) {
  auto table = sparql::OrdinalTable::defaults(ns);
  for (const auto& [scale, values] : cfg.ordinals) {
    std::vector<rdf::Term> terms;
    for (const auto& v : values) terms.push_back(rdf::Term::string(v));
    table.add_scale(scale, terms);
    terms.clear();
    for (const auto& v : values) terms.push_back(edu::category_iri(ns, v));
    table.add_scale(scale + "-iri", terms);
  }
  return table;
}

// --- commands ----------------------------------------------------------------

void cmd_ingest(const Config& cfg) {
  Curated c = curate(cfg);
  const auto& rep = c.cleaned.report;
  const auto& header = c.cleaned.table.header;
  const bool has_label = std::find(header.begin(), header.end(), edu::kLabelColumn) != header.end();
  std::size_t female = 0, male = 0;
  for (const auto& r : c.records) {
    female += r.gender == "F";
    male += r.gender == "M";
  }
  std::cout << rep.rows_in << " rows in\n"
            << rep.rows_kept << " rows kept, " << rep.rows_dropped << " dropped, " << rep.cells_corrected
            << " cells corrected, " << rep.columns_renamed << " columns renamed\n"
            << (header.size() - (has_label ? 1 : 0)) << " raw columns"
            << (has_label ? std::string(" plus the ") + edu::kLabelColumn + " label" : "") << '\n'
            << female << " female / " << male << " male\n";
  write_atomic(cfg.out / "curated.csv", edu::write_records_csv(c.records));
  write_atomic(cfg.out / "curation_report.json", edu::report_to_json(rep));
}

rdf::Graph build(const Config& cfg, const edu::MappingSchema& schema, std::vector<edu::CuratedRecord>* keep = nullptr) {
  Curated c = curate(cfg);
  rdf::Graph g = edu::build_graph(c.records, schema);
  if (keep) *keep = std::move(c.records);
  return g;
}

void cmd_build(const Config& cfg) {
  const auto schema = load_mapping(cfg);
  rdf::Graph g = build(cfg, schema);
  std::set<rdf::Term> subjects;
  for (const auto& t : g.triples()) subjects.insert(t.subject);
  std::cout << subjects.size() << " students, " << g.size() << " triples\n";
  write_atomic(cfg.out / "graph.ttl", rdf::serialize_turtle(g));
}

void cmd_query(const Config& cfg, const fs::path& query_file, const std::string& graph_file) {
  require_file(query_file, "query file");
  const sparql::Query q = sparql::parse_query(read_text(query_file));
  rdf::Graph g;
  std::string ns;
  if (!graph_file.empty()) {
    require_file(graph_file, "graph");
    g = rdf::parse_turtle(read_text(graph_file));
    ns = cfg.ns.value_or(g.prefixes().contains(rdf::kDefaultPrefix) ? g.prefixes().at(rdf::kDefaultPrefix)
                                                                    : rdf::kDefaultNamespace);
  } else {
    const auto schema = load_mapping(cfg);
    g = build(cfg, schema);
    ns = schema.ns;
  }
  const auto ordinals = ordinals_for(cfg, ns);
  const std::string stem = query_file.stem().string();
  auto prefixes = g.prefixes();
  for (const auto& [k, v] : q.prefixes) prefixes.emplace(k, v);

  if (std::holds_alternative<sparql::SelectForm>(q.form)) {
    const auto table = sparql::eval_select(g, q, ordinals);
    std::cout << sparql::format_table(table, prefixes);
    write_atomic(cfg.out / (stem + ".json"), sparql::to_json(table));
  } else if (std::holds_alternative<sparql::AskForm>(q.form)) {
    const bool answer = sparql::eval_ask(g, q, ordinals);
    std::cout << (answer ? "true" : "false") << '\n';
    write_atomic(cfg.out / (stem + ".json"), sparql::ask_to_json(answer));
  } else {
    const rdf::Graph constructed = sparql::eval_construct(g, q, ordinals);
    const std::string ttl = rdf::serialize_turtle(constructed);
    std::cout << ttl << constructed.size() << " triples\n";
    write_atomic(cfg.out / (stem + ".ttl"), ttl);
  }
}

void emit_report(const Config& cfg, const std::vector<edu::ReportRow>& rows) {
  std::cout << edu::format_report(rows);
  write_atomic(cfg.out / "report.txt", edu::format_report(rows));
  write_atomic(cfg.out / "report.json", edu::report_rows_to_json(rows));
}

void cmd_mine(const Config& cfg) {
  require_file(cfg.taxonomy, "taxonomy");
  require_file(cfg.rules, "rules");
  const auto taxonomy = edu::load_taxonomy_file(cfg.taxonomy);
  const auto rules = edu::load_rules(cfg.rules, taxonomy);
  const auto schema = load_mapping(cfg);
  std::vector<edu::CuratedRecord> records;
  const rdf::Graph g = build(cfg, schema, &records);
  const auto mined = edu::apply_rules(g, records, rules, schema);
  std::cout << rules.size() << (rules.size() == 1 ? " rule, " : " rules, ") << mined.tags.size()
            << (mined.tags.size() == 1 ? " tag\n" : " tags\n");
  write_atomic(cfg.out / "tagged.ttl", rdf::serialize_turtle(mined.graph));
  emit_report(cfg, edu::report(mined.tags, taxonomy));
}

void cmd_report(const Config& cfg, const std::string& ttl_file) {
  require_file(cfg.taxonomy, "taxonomy");
  const fs::path path = ttl_file.empty() ? cfg.out / "tagged.ttl" : fs::path(ttl_file);
  require_file(path, "tagged graph");
  const auto taxonomy = edu::load_taxonomy_file(cfg.taxonomy);
  const rdf::Graph g = rdf::parse_turtle(read_text(path));
  const std::string ns = cfg.ns.value_or(
      g.prefixes().contains(rdf::kDefaultPrefix) ? g.prefixes().at(rdf::kDefaultPrefix) : rdf::kDefaultNamespace);
  std::vector<edu::Tag> tags;
  for (const auto& [pred, value] : {std::pair{edu::kHasPattern, true}, std::pair{edu::kLacksPattern, false}}) {
    for (const auto& t : g.match(std::nullopt, rdf::Term::iri(ns + pred), std::nullopt)) {
      auto id = edu::student_index(ns, t.subject);
      if (!id || !t.object.is_iri() || !t.object.text().starts_with(ns)) {
        throw Error(ErrorCode::SchemaMismatch, "malformed tag triple " + t.subject.to_string() + " " +
                                                   t.predicate.to_string() + " " + t.object.to_string());
      }
      tags.push_back({*id, t.object.text().substr(ns.size()), value});
    }
  }
  emit_report(cfg, edu::report(tags, taxonomy));
}

void cmd_gen_synthetic(Config cfg) {
  if (!cfg.synthetic) cfg.synthetic = {7, 480};
  const auto table = edu::gen_synthetic(cfg.synthetic->first, cfg.synthetic->second);
  write_atomic(cfg.out / "synthetic.csv", edu::write_csv(table));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Educational knowledge graph pipeline: ingest, build, query, mine, report."};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "JSON pipeline configuration; flags override it");
  app.add_option("--input", flags.input, "xAPI-Edu CSV file");
  app.add_option("--taxonomy", flags.taxonomy, "creativity taxonomy file");
  app.add_option("--rules", flags.rules, "rules file");
  app.add_option("--schema", flags.schema, "feature-to-predicate mapping schema");
  app.add_option("--out", flags.out, "output directory (default: out)");
  app.add_option("--namespace", flags.ns, "namespace IRI for students and categories");
  app.add_option("--synthetic", flags.synthetic, "use generated data instead of --input: <seed>,<n>");

  auto* ingest = app.add_subcommand("ingest", "clean the CSV and write curated records plus a report");
  auto* build_cmd = app.add_subcommand("build", "build the graph and write it as Turtle");
  auto* query = app.add_subcommand("query", "evaluate a query file against the graph");
  std::string query_file, graph_file;
  query->add_option("file", query_file, "query file")->required();
  query->add_option("--graph", graph_file, "query this Turtle file instead of building from the input");
  auto* mine = app.add_subcommand("mine", "apply the rules, write the tagged graph and pattern report");
  auto* report = app.add_subcommand("report", "pattern report from a tagged Turtle file");
  std::string report_file;
  report->add_option("ttl", report_file, "tagged graph (default: <out>/tagged.ttl)");
  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic CSV with the source schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const Config cfg = resolve_config(flags);
    if (*ingest) cmd_ingest(cfg);
    else if (*build_cmd) cmd_build(cfg);
    else if (*query) cmd_query(cfg, query_file, graph_file);
    else if (*mine) cmd_mine(cfg);
    else if (*report) cmd_report(cfg, report_file);
    else if (*gen) cmd_gen_synthetic(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::Config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
