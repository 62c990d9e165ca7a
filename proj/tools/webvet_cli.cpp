// webvet command-line tool: run a pipeline, compare configurations against a
// reference file, score an output file, or serve the HTTP API.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "webvet/evaluation.hpp"
#include "webvet/service.hpp"

namespace {

namespace fs = std::filesystem;
using namespace webvet;

constexpr int kUsageError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

// Flags shared by `run`, `compare` and `serve` that shape a RunConfig.
struct ConfigFlags {
  std::string config_file;
  std::string schema;
  std::string description;
  std::string provider;
  std::string model;
  std::string script;
  std::string endpoint;
  std::string search_fixture;
  std::string search_url;
  std::string pricing;
  std::string rulepack;
  std::string replay;
  std::string mode;
  std::string url_column;
  std::string id_column;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<int> politeness_ms;
  std::vector<std::string> disable;
  std::vector<std::string> host_overrides;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config document")->check(CLI::ExistingFile);
    app->add_option("--schema", schema, "schema annotation, e.g. \"name, date, deaths:int\"");
    app->add_option("--description", description, "natural-language dataset description");
    app->add_option("--provider", provider, "scripted or openai");
    app->add_option("--model", model, "model id");
    app->add_option("--script", script, "scripted provider fixture")->check(CLI::ExistingFile);
    app->add_option("--endpoint", endpoint, "provider base URL");
    app->add_option("--search-fixture", search_fixture, "search results fixture")->check(CLI::ExistingFile);
    app->add_option("--search-url", search_url, "search endpoint template containing {query}");
    app->add_option("--pricing", pricing, "pricing table JSON")->check(CLI::ExistingFile);
    app->add_option("--rulepack", rulepack, "rule pack for --mode rules")->check(CLI::ExistingFile);
    app->add_option("--replay", replay, "replay page snapshots from this directory")->check(CLI::ExistingDirectory);
    app->add_option("--mode", mode, "committee, monolith or rules");
    app->add_option("--url-column", url_column, "input column holding the source URL");
    app->add_option("--id-column", id_column, "input column holding row ids (empty: generated)");
    app->add_option("--seed", seed, "seed for context sampling");
    app->add_option("--parallelism", parallelism, "worker count")->check(CLI::PositiveNumber);
    app->add_option("--politeness-ms", politeness_ms, "minimum gap between requests to one host")->check(CLI::NonNegativeNumber);
    app->add_option("--disable", disable, "agent toggles to switch off");
    app->add_option("--host-override", host_overrides, "host=ip:port");
  }

  RunConfig build() const {
    RunConfig c;
    if (!config_file.empty()) {
      json doc = json::parse(read_file(config_file), nullptr, false);
      if (doc.is_discarded()) throw Error(config_file + " is not valid JSON");
      c = config_from_json(doc, c);
    }
    if (!schema.empty()) c.schema = schema;
    if (!description.empty()) c.description = description;
    if (!provider.empty()) c.provider.kind = provider;
    if (!model.empty()) c.provider.model = model;
    if (!script.empty()) c.provider.script = script;
    if (!endpoint.empty()) c.provider.endpoint = endpoint;
    if (!search_fixture.empty()) c.search = {"fixture", search_fixture, {}};
    if (!search_url.empty()) c.search = {"http", search_url, c.search.credential_env};
    if (!pricing.empty()) c.pricing = pricing;
    if (!rulepack.empty()) c.rulepack = rulepack;
    if (!replay.empty()) c.replay = replay;
    if (!mode.empty()) c.mode = parse_run_mode(mode);
    if (!url_column.empty()) c.url_column = url_column;
    if (!id_column.empty()) c.id_column = id_column == "-" ? std::string() : id_column;
    if (seed) c.seed = *seed;
    if (parallelism) c.parallelism = *parallelism;
    if (politeness_ms) c.politeness_ms = *politeness_ms;
    for (const auto& name : disable) toggle_ref(c.toggles, name) = false;
    for (const auto& o : host_overrides) {
      auto eq = o.find('=');
      if (eq == std::string::npos) throw Error("--host-override expects host=ip:port, got '" + o + "'");
      c.host_overrides[o.substr(0, eq)] = o.substr(eq + 1);
    }
    return config_from_json(json::object(), c);  // re-validates
  }
};

std::string status_line(const RowEvent& e) {
  std::string line = format_timestamp(e.timestamp) + "  " + e.row_id + "  " + std::string(to_string(e.status)) + "  " + e.stage;
  if (e.reason) line += "  " + *e.reason;
  return line;
}

int cmd_run(const ConfigFlags& flags, const std::string& input, const std::string& preset, const std::string& output,
            const std::string& report_path, const std::string& run_dir, bool quiet) {
  RunConfig config = flags.build();
  if (!preset.empty()) config = apply_preset(config, preset);
  std::string csv_text = read_file(input);
  EventLog events;
  if (!quiet) events.set_sink([](const RowEvent& e) { std::cout << status_line(e) << "\n" << std::flush; });
  RunReport report = execute_run(config, csv_text, run_dir, events);
  if (!output.empty()) write_file(output, report.output_csv());
  if (!report_path.empty()) write_file(report_path, to_json(report).dump(2) + "\n");
  const auto& t = report.totals;
  std::cout << "done: " << report.final_records.size() << " records";
  for (const auto& [status, n] : t.status_counts) std::cout << ", " << status << " " << n;
  std::cout << "; " << t.model_calls << " model calls, " << t.pages_fetched << " pages, cost $" << format_cost(t.cost) << "\n";
  return 0;
}

int cmd_compare(const ConfigFlags& flags, const std::string& input, const std::string& gt_path,
                const std::vector<std::string>& presets, const std::string& out_dir) {
  RunConfig base = flags.build();
  std::vector<RunConfig> configs;
  for (const auto& p : presets.empty() ? preset_names() : presets) configs.push_back(apply_preset(base, p));
  std::string csv_text = read_file(input);
  std::string gt_text = read_file(gt_path);
  ComparisonOptions opts;
  if (!out_dir.empty()) opts.run_root = fs::path(out_dir) / "runs";
  auto rep = run_comparison(csv_text, gt_text, configs, opts);
  std::string table = render_comparison_table(rep);
  std::cout << table;
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "comparison.json", to_json(rep).dump(2) + "\n");
    write_file(fs::path(out_dir) / "comparison.txt", table);
    write_file(fs::path(out_dir) / "cost_f1.svg", render_cost_f1_svg(rep));
  }
  for (const auto& e : rep.entries)
    if (!e.ok) return 1;
  return 0;
}

int cmd_score(const std::string& output, const std::string& gt_path, const std::string& schema_text, bool strict) {
  SchemaSpec schema = generate_schema(schema_text, {}, "");
  auto records = load_output_records(read_file(output), schema);
  auto gt = load_ground_truth(read_file(gt_path), schema);
  auto m = score(records, gt, schema, strict ? MatchPolicy::kStrict : MatchPolicy::kLenientDates);
  std::cout << to_json(m).dump(2) << "\n";
  return 0;
}

RunService* g_service = nullptr;

int cmd_serve(const ConfigFlags& flags, const std::string& host, int port, const std::string& root, std::size_t max_mb) {
  ServiceOptions opts;
  opts.root = root;
  opts.max_upload_bytes = max_mb * 1024 * 1024;
  opts.defaults = flags.build();
  RunService service(opts);
  if (!service.bind(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cout << "listening on " << host << ":" << port << ", runs in " << root << "\n" << std::flush;
  service.listen_after_bind();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validate, remediate and augment web-sourced tabular data"};
  app.require_subcommand(1);

  ConfigFlags run_flags, cmp_flags, serve_flags;
  std::string input, preset, output, report_path, run_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "process one dataset");
  run->add_option("input", input, "input CSV")->required();
  run_flags.add(run);
  run->add_option("--preset", preset, "named ablation or baseline configuration");
  run->add_option("-o,--output", output, "final CSV path");
  run->add_option("--report", report_path, "report JSON path");
  run->add_option("--run-dir", run_dir, "write the full run directory here");
  run->add_flag("-q,--quiet", quiet, "no status log");

  std::string cmp_input, gt_path, out_dir;
  std::vector<std::string> presets;
  auto* cmp = app.add_subcommand("compare", "run several configurations and score them against a reference");
  cmp->add_option("input", cmp_input, "input CSV")->required();
  cmp->add_option("--gt", gt_path, "reference CSV")->required();
  cmp_flags.add(cmp);
  cmp->add_option("--presets", presets, "configurations to run; the first is the baseline (default: all)");
  cmp->add_option("--out", out_dir, "directory for comparison.json, comparison.txt and cost_f1.svg");

  std::string score_output, score_gt, score_schema;
  bool strict = false;
  auto* sc = app.add_subcommand("score", "score an output CSV against a reference");
  sc->add_option("output", score_output, "output CSV")->required();
  sc->add_option("--gt", score_gt, "reference CSV")->required();
  sc->add_option("--schema", score_schema, "schema annotation")->required();
  sc->add_flag("--strict-dates", strict, "require exact date equality");

  std::string host = "127.0.0.1", root = "runs";
  int port = 8080;
  std::size_t max_mb = 20;
  auto* serve = app.add_subcommand("serve", "HTTP API for creating and following runs");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port");
  serve->add_option("--root", root, "directory holding run directories");
  serve->add_option("--max-upload-mb", max_mb, "upload size cap");
  serve_flags.add(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (*run && !fs::exists(input)) {
    std::cerr << "input file not found: " << input << "\n" << app.help();
    return kUsageError;
  }
  if (*cmp && (!fs::exists(cmp_input) || !fs::exists(gt_path))) {
    std::cerr << "input or reference file not found\n";
    return kUsageError;
  }
  if (*sc && (!fs::exists(score_output) || !fs::exists(score_gt))) {
    std::cerr << "output or reference file not found\n";
    return kUsageError;
  }

  try {
    if (*run) return cmd_run(run_flags, input, preset, output, report_path, run_dir, quiet);
    if (*cmp) return cmd_compare(cmp_flags, cmp_input, gt_path, presets, out_dir);
    if (*sc) return cmd_score(score_output, score_gt, score_schema, strict);
    if (*serve) return cmd_serve(serve_flags, host, port, root, max_mb);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
