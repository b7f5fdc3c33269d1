#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "forge/audit.hpp"
#include "forge/error.hpp"
#include "forge/pipeline.hpp"
#include "forge/sitegraph/graph.hpp"
#include "forge/taskgen.hpp"
#include "forge/util.hpp"

namespace py = pybind11;
using namespace forge;

namespace {

py::dict node_dict(const SiteGraph& g, NodeId id) {
  const auto& n = g.node(id);
  py::dict d;
  d["id"] = id;
  d["url"] = n.url.str();
  d["depth"] = n.depth;
  d["parent"] = n.parent ? py::object(py::int_(*n.parent)) : py::object(py::none());
  d["title"] = n.title;
  d["description"] = n.description;
  d["language"] = n.language;
  d["flags"] = n.flags;
  return d;
}

py::dict cost_dict(const CostReport& r) {
  py::dict stages;
  for (const auto& [name, s] : r.stages) {
    py::dict d;
    d["calls"] = s.calls;
    d["wire_calls"] = s.wire_calls;
    d["cached"] = s.cached;
    d["input_tokens"] = s.input_tokens;
    d["output_tokens"] = s.output_tokens;
    d["cost_usd"] = s.cost.to_string();
    stages[py::str(name)] = d;
  }
  py::dict d;
  d["stages"] = stages;
  d["verified_tasks"] = r.verified_tasks;
  d["drafts"] = r.drafts;
  d["total_cost_usd"] = r.total_cost.to_string();
  d["chat_calls_per_verified"] = r.chat_calls_per_verified;
  d["call_bound"] = r.call_bound;
  d["within_bound"] = r.within_bound;
  d["text"] = r.to_text();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Site-graph task generation and verification";

  static py::handle forge_error = PyErr_NewException("taskforge._core.ForgeError", PyExc_RuntimeError, nullptr);
  m.attr("ForgeError") = forge_error;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(forge_error)(e.what());
      err.attr("code") = std::string(errc_name(e.code()));
      err.attr("detail") = e.message();
      PyErr_SetObject(forge_error.ptr(), err.ptr());
    }
  });

  py::class_<PipelineConfig>(m, "Config")
      .def_static("load", &load_config, py::arg("path"))
      .def_static("parse", &parse_config, py::arg("text"), py::arg("base_dir") = ".")
      .def(
          "set", [](PipelineConfig& c, const std::string& assignment) { apply_override(c, assignment); },
          py::arg("assignment"), "Apply a section.key=value override.")
      .def_property(
          "workdir", [](const PipelineConfig& c) { return c.paths.workdir; },
          [](PipelineConfig& c, const std::filesystem::path& p) { c.paths.workdir = p; })
      .def_readwrite("stub_script", &PipelineConfig::stub_script)
      .def_property(
          "cache_dir", [](const PipelineConfig& c) { return c.provider.cache_dir; },
          [](PipelineConfig& c, const std::filesystem::path& p) { c.provider.cache_dir = p; })
      .def_property(
          "rng_seed", [](const PipelineConfig& c) { return c.generation.rng_seed; },
          [](PipelineConfig& c, std::uint64_t s) { c.generation.rng_seed = s; })
      .def_property(
          "n_tasks", [](const PipelineConfig& c) { return c.generation.n_tasks; },
          [](PipelineConfig& c, std::size_t n) { c.generation.n_tasks = n; })
      .def_property_readonly("root", [](const PipelineConfig& c) { return c.crawl.root_url.str(); })
      .def_property_readonly("mode", [](const PipelineConfig& c) { return std::string(mode_name(c.generation.mode)); });

  auto stage = [](StageResult (Pipeline::*fn)()) {
    return [fn](Pipeline& p) {
      StageResult r;
      {
        py::gil_scoped_release release;
        r = (p.*fn)();
      }
      return r.message;
    };
  };

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init<PipelineConfig>(), py::arg("config"))
      .def("crawl", stage(&Pipeline::crawl))
      .def("describe", stage(&Pipeline::describe))
      .def("index", stage(&Pipeline::index))
      .def("generate", stage(&Pipeline::generate))
      .def("verify", stage(&Pipeline::verify))
      .def("export", stage(&Pipeline::export_benchmark))
      .def("coverage",
           [](Pipeline& p) {
             py::gil_scoped_release release;
             return p.coverage().message;
           })
      .def(
          "replay",
          [](Pipeline& p, std::optional<std::string> task_id) {
            py::gil_scoped_release release;
            return p.replay({}, {}, task_id).message;
          },
          py::arg("task_id") = py::none())
      .def("all",
           [](Pipeline& p) {
             std::vector<std::pair<std::string, std::string>> out;
             py::gil_scoped_release release;
             for (auto& r : p.all()) out.emplace_back(r.stage, r.message);
             return out;
           })
      .def("costs", [](const Pipeline& p) { return cost_dict(p.costs()); });

  py::class_<SiteGraph>(m, "SiteGraph")
      .def_static("load", &load_graph, py::arg("path"))
      .def("__len__", &SiteGraph::size)
      .def_property_readonly("edge_count", &SiteGraph::edge_count)
      .def_property_readonly("digest", [](const SiteGraph& g) { return graph_digest(g); })
      .def("node", [](const SiteGraph& g, NodeId id) {
        if (!g.contains(id)) throw py::index_error("no node " + std::to_string(id));
        return node_dict(g, id);
      })
      .def("find", [](const SiteGraph& g, const std::string& url) { return g.find(canonicalize_url(url)); })
      .def("successors", &SiteGraph::successors)
      .def("first_level_nodes", [](const SiteGraph& g) { return first_level_nodes(g); })
      .def("shortest_path",
           [](const SiteGraph& g, NodeId a, NodeId b) -> std::optional<std::vector<NodeId>> {
             if (auto p = shortest_path(g, a, b)) return p->nodes;
             return std::nullopt;
           })
      .def("gold_path", [](const SiteGraph& g, const std::vector<NodeId>& evidence) -> std::optional<std::vector<NodeId>> {
        auto p = gold_path(g, evidence);
        if (!p) return std::nullopt;
        std::vector<NodeId> out;
        for (const auto& s : p->steps) out.push_back(s.node);
        return out;
      });

  m.def(
      "parse_response",
      [](const std::string& text) {
        auto t = parse_response(text);
        return py::make_tuple(t.task, t.rationale, t.answer);
      },
      py::arg("text"), "Split a generation reply into (task, rationale, answer).");
  m.def(
      "render_response",
      [](const std::string& task, const std::string& rationale, const std::string& answer) {
        return render_response({task, rationale, answer});
      },
      py::arg("task"), py::arg("rationale"), py::arg("answer"));
  m.def("canonicalize_url", [](const std::string& url) { return canonicalize_url(url).str(); });
  m.def("sha256_hex", [](const py::bytes& data) { return sha256_hex(std::string(data)); });
}
