#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "junctiongen/analysis.hpp"
#include "junctiongen/errors.hpp"
#include "junctiongen/logical_gen.hpp"
#include "junctiongen/pipeline.hpp"
#include "junctiongen/road_model.hpp"
#include "junctiongen/version.hpp"

namespace py = pybind11;
using namespace junctiongen;

namespace {

Polyline polyline_from_pairs(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Vec2> v;
  v.reserve(pts.size());
  for (auto [x, y] : pts) v.push_back({x, y});
  return Polyline(std::move(v));
}

py::dict analyze_result_dict(const AnalyzeResult& r) {
  py::dict d;
  d["runs"] = r.runs;
  d["excluded"] = r.excluded;
  d["report_path"] = r.report_path;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "derives, refines, replays, and scores junction conflict scenarios";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::class_<RoadMap>(m, "RoadMap")
      .def_static("load", &RoadMap::load_file, py::arg("path"))
      .def_property_readonly("name", &RoadMap::name)
      .def("lane_ids", [](const RoadMap& self) {
        std::vector<std::string> out;
        for (const Lane& l : self.lanes()) out.push_back(l.id);
        return out;
      });

  py::class_<ManeuverCatalog>(m, "ManeuverCatalog")
      .def_property_readonly("junction",
                             [](const ManeuverCatalog& c) { return c.junction_id; })
      .def("__len__", [](const ManeuverCatalog& c) { return c.instances.size(); })
      .def("ids",
           [](const ManeuverCatalog& c) {
             std::vector<std::string> out;
             for (const ManeuverInstance& mi : c.instances) out.push_back(mi.id);
             return out;
           })
      .def("maneuver_of", [](const ManeuverCatalog& c, const std::string& id) {
        return std::string(to_string(c.by_id(id).maneuver));
      })
      .def("lanes_of", [](const ManeuverCatalog& c, const std::string& id) {
        const ManeuverInstance& mi = c.by_id(id);
        return std::make_pair(mi.start_lane, mi.end_lane);
      });

  m.def("enumerate_maneuvers", &enumerate_maneuvers, py::arg("map"),
        py::arg("junction") = "main");

  m.def(
      "conflict_area",
      [](const ManeuverCatalog& catalog, const std::string& a, const std::string& b) {
        const ManeuverInstance& ma = catalog.by_id(a);
        const ManeuverInstance& mb = catalog.by_id(b);
        return overlap_area(buffer_centerline(ma.connector_centerline, ma.width / 2.0),
                            buffer_centerline(mb.connector_centerline, mb.width / 2.0));
      },
      py::arg("catalog"), py::arg("a"), py::arg("b"),
      "in-junction corridor overlap of two maneuver instances, in m^2");

  py::class_<LogicalScenarioSet>(m, "LogicalScenarioSet")
      .def_property_readonly("n_actors", [](const LogicalScenarioSet& s) { return s.n_actors; })
      .def_property_readonly("symmetry_reduced",
                             [](const LogicalScenarioSet& s) { return s.symmetry_reduced; })
      .def("__len__", [](const LogicalScenarioSet& s) { return s.scenarios.size(); })
      .def("assignments",
           [](const LogicalScenarioSet& s) {
             std::vector<std::vector<std::string>> out;
             for (const LogicalScenario& sc : s.scenarios) out.push_back(sc.assignment);
             return out;
           })
      .def("to_json", [](const LogicalScenarioSet& s) { return to_json_text(s); });

  m.def(
      "find_logical_scenarios",
      [](const ManeuverCatalog& catalog, int n_actors, double area_threshold) {
        return find_logical_scenarios(catalog, n_actors, area_threshold);
      },
      py::arg("catalog"), py::arg("n_actors") = 2, py::arg("area_threshold") = 0.1);

  m.def("reduce_symmetries", &reduce_symmetries, py::arg("scenarios"));

  m.def("fisher_exact_p", &fisher_exact_p, py::arg("a"), py::arg("b"), py::arg("c"),
        py::arg("d"), "two-sided Fisher exact test on [[a, b], [c, d]]");
  m.def("odds_ratio", &odds_ratio, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));

  m.def(
      "medoid_index",
      [](const std::vector<std::vector<std::pair<double, double>>>& paths, double step) {
        std::vector<Polyline> lines;
        lines.reserve(paths.size());
        for (const auto& p : paths) lines.push_back(polyline_from_pairs(p));
        return medoid_index(lines, step);
      },
      py::arg("paths"), py::arg("step") = 0.5);

  m.def("config_hash",
        [](const std::string& config_json) { return config_hash(config_from_json_text(config_json)); });

  m.def("run_generate", [](const std::string& config_json) {
    GenerateResult r = run_generate(config_from_json_text(config_json));
    py::dict d;
    d["maneuvers"] = r.maneuvers;
    d["enumerated"] = r.enumerated;
    d["kept"] = r.kept;
    d["out_path"] = r.out_path;
    return d;
  });
  m.def("run_concretize", [](const std::string& config_json) {
    ConcretizeResult r = run_concretize(config_from_json_text(config_json));
    py::dict d;
    d["scenarios"] = r.scenarios;
    d["feasible"] = r.feasible;
    d["infeasible"] = r.infeasible;
    return d;
  });
  m.def("run_simulate", [](const std::string& config_json) {
    SimulateResult r = run_simulate(config_from_json_text(config_json));
    py::dict d;
    d["traces"] = r.traces;
    d["skipped"] = r.skipped;
    d["reference_traces"] = r.reference_traces;
    return d;
  });
  m.def("run_analyze", [](const std::string& config_json) {
    return analyze_result_dict(run_analyze(config_from_json_text(config_json)));
  });
  m.def("run_pipeline", [](const std::string& config_json) {
    return analyze_result_dict(run_pipeline(config_from_json_text(config_json)));
  });
}
