#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "forge/error.hpp"
#include "forge/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string stub;
  std::string workdir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  // crawl
  std::string root;
  std::optional<int> max_depth;
  std::optional<int> max_pages;
  std::string out;
  bool replay = false;
  // coverage / replay
  std::string graph;
  std::string tasks;
  std::string task_id;
};

forge::PipelineConfig build_config(const Options& o) {
  forge::PipelineConfig c;
  std::filesystem::path base = ".";
  if (!o.config.empty()) {
    c = forge::load_config(o.config);
    base = std::filesystem::path(o.config).parent_path();
    if (base.empty()) base = ".";
  } else {
    c.crawl.snapshot_dir.clear();
  }
  for (const auto& s : o.overrides) forge::apply_override(c, s, ".");
  if (!o.stub.empty()) c.stub_script = o.stub;
  if (!o.workdir.empty()) c.paths.workdir = o.workdir;
  if (o.seed) {
    c.generation.rng_seed = *o.seed;
    c.crawl.rng_seed = *o.seed;
    if (c.crawl_b) c.crawl_b->rng_seed = *o.seed;
  }
  if (!o.root.empty()) forge::apply_override(c, "crawl.root=" + o.root, ".");
  if (o.max_depth) c.crawl.max_depth = *o.max_depth;
  if (o.max_pages) c.crawl.max_pages = *o.max_pages;
  if (o.replay) c.crawl.replay = true;
  if (!o.out.empty()) c.paths.graph = std::filesystem::absolute(o.out);
  return c;
}

void print(const forge::StageResult& r) { std::cout << r.stage << ": " << r.message << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: crawl a website and build verified multi-hop web tasks"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config,-c", o.config, "config file");
  app.add_option("--stub", o.stub, "scripted provider file (replaces the HTTP provider)");
  app.add_option("--workdir", o.workdir, "artifact directory");
  app.add_option("--seed", o.seed, "rng seed for every stage");
  app.add_option("--set", o.overrides, "override, section.key=value")->take_all();

  std::string stage;
  auto* crawl = app.add_subcommand("crawl", "crawl the site into a graph");
  crawl->add_option("--root", o.root, "root URL");
  crawl->add_option("--max-depth", o.max_depth);
  crawl->add_option("--max-pages", o.max_pages);
  crawl->add_option("--out", o.out, "graph file");
  crawl->add_flag("--replay", o.replay, "read pages from the snapshot only");
  app.add_subcommand("describe", "write page descriptions into the graph");
  app.add_subcommand("index", "embed page descriptions");
  app.add_subcommand("generate", "sample page pairs and draft tasks");
  app.add_subcommand("verify", "run quality control over drafts");
  auto* coverage = app.add_subcommand("coverage", "page coverage of verified tasks");
  auto* replay = app.add_subcommand("replay", "walk each gold path on the graph");
  for (auto* sub : {coverage, replay}) {
    sub->add_option("--graph", o.graph);
    sub->add_option("--tasks", o.tasks);
  }
  replay->add_option("--task-id", o.task_id);
  app.add_subcommand("export", "write the benchmark file and summary");
  app.add_subcommand("all", "run every stage in order");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  stage = app.get_subcommands().front()->get_name();

  std::unique_ptr<forge::Pipeline> pipeline;
  try {
    pipeline = std::make_unique<forge::Pipeline>(build_config(o));
  } catch (const forge::Error& e) {
    std::cerr << "forge " << stage << ": " << e.what() << "\n";
    return e.code() == forge::Errc::config_error ? 2 : 1;
  }

  auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };
  std::string current = stage;
  try {
    if (stage == "crawl") {
      print(pipeline->crawl());
    } else if (stage == "describe") {
      print(pipeline->describe());
    } else if (stage == "index") {
      print(pipeline->index());
    } else if (stage == "generate") {
      print(pipeline->generate());
    } else if (stage == "verify") {
      print(pipeline->verify());
    } else if (stage == "coverage") {
      print(pipeline->coverage(opt_path(o.graph), opt_path(o.tasks)));
    } else if (stage == "replay") {
      std::optional<std::string> id;
      if (!o.task_id.empty()) id = o.task_id;
      print(pipeline->replay(opt_path(o.graph), opt_path(o.tasks), id));
    } else if (stage == "export") {
      print(pipeline->export_benchmark());
    } else {
      using Step = forge::StageResult (forge::Pipeline::*)();
      std::vector<std::pair<const char*, Step>> steps{
          {"crawl", &forge::Pipeline::crawl},       {"describe", &forge::Pipeline::describe},
          {"index", &forge::Pipeline::index},       {"generate", &forge::Pipeline::generate},
          {"verify", &forge::Pipeline::verify},     {"export", &forge::Pipeline::export_benchmark}};
      for (auto& [name, step] : steps) {
        current = name;
        print(((*pipeline).*step)());
        if (current == std::string("verify")) {
          current = "coverage";
          print(pipeline->coverage());
          current = "replay";
          print(pipeline->replay());
        }
      }
    }
  } catch (const forge::Error& e) {
    std::cerr << "forge " << current << ": " << e.what() << "\n";
    return e.code() == forge::Errc::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "forge " << current << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
