#include "junctiongen/logical_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "junctiongen/errors.hpp"

namespace junctiongen {

using nlohmann::json;

OverlapTable::OverlapTable(const ManeuverCatalog& catalog, double area_threshold)
    : n_(catalog.instances.size()), threshold_(area_threshold) {
  if (area_threshold < 0.0) throw ConfigError("area threshold must be non-negative");
  corridors_.reserve(n_);
  for (const ManeuverInstance& mi : catalog.instances)
    corridors_.push_back(buffer_centerline(mi.connector_centerline, mi.width / 2.0));

  cells_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      std::vector<Polygon> comps = i == j ? std::vector<Polygon>{corridors_[i]}
                                          : polygon_intersection(corridors_[i], corridors_[j]);
      double area = 0.0;
      for (const Polygon& c : comps) area += c.area();

      auto entry_along = [&comps](const Polyline& line) {
        double entry = std::numeric_limits<double>::infinity();
        for (const Polygon& c : comps) {
          if (auto s = first_entry_arclength(line, c)) {
            entry = std::min(entry, *s);
            continue;
          }
          // overlap off to the side of the centerline: project its vertices
          for (const Vec2& v : c.outer()) entry = std::min(entry, line.nearest_arclength(v));
        }
        return comps.empty() ? -1.0 : entry;
      };

      Cell cell;
      cell.area = area;
      cell.dangerous = area > threshold_;
      cell.components = comps;
      cell.entry = entry_along(catalog.instances[i].connector_centerline);
      cells_[i * n_ + j] = cell;
      if (i != j) {
        cell.entry = entry_along(catalog.instances[j].connector_centerline);
        cells_[j * n_ + i] = std::move(cell);
      }
    }
  }
}

const OverlapTable::Cell& OverlapTable::cell(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw DataError("overlap table index out of range");
  return cells_[i * n_ + j];
}

double OverlapTable::area(std::size_t i, std::size_t j) const { return cell(i, j).area; }

bool OverlapTable::dangerous(std::size_t i, std::size_t j) const { return cell(i, j).dangerous; }

double OverlapTable::entry_arclength(std::size_t i, std::size_t j) const {
  return cell(i, j).entry;
}

const std::vector<Polygon>& OverlapTable::components(std::size_t i, std::size_t j) const {
  return cell(i, j).components;
}

LogicalScenarioSet find_logical_scenarios(const ManeuverCatalog& catalog,
                                          const OverlapTable& table, int n_actors) {
  if (n_actors < 2) throw ConfigError("a scenario needs at least two actors");
  if (table.size() != catalog.instances.size())
    throw DataError("overlap table does not match the catalog");

  LogicalScenarioSet set;
  set.junction_id = catalog.junction_id;
  set.n_actors = n_actors;
  set.catalog_hash = catalog_hash(catalog);

  const std::size_t m = catalog.instances.size();
  const int k = n_actors - 1;
  for (std::size_t ego = 0; ego < m; ++ego) {
    std::vector<std::size_t> partners;
    for (std::size_t j = 0; j < m; ++j)
      if (table.dangerous(ego, j)) partners.push_back(j);
    if (partners.empty()) continue;

    double count = std::pow(static_cast<double>(partners.size()), k);
    if (count > 1e7) throw ConfigError("scenario space too large; lower the actor count");

    std::vector<std::size_t> digits(k, 0);
    while (true) {
      LogicalScenario sc;
      sc.assignment.push_back(catalog.instances[ego].id);
      for (int d = 0; d < k; ++d) {
        std::size_t ext = partners[digits[d]];
        sc.assignment.push_back(catalog.instances[ext].id);
        sc.overlaps.push_back(
            {d + 1, table.area(ego, ext), table.entry_arclength(ego, ext)});
      }
      set.scenarios.push_back(std::move(sc));

      int pos = k - 1;
      while (pos >= 0 && ++digits[pos] == partners.size()) digits[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return set;
}

LogicalScenarioSet find_logical_scenarios(const ManeuverCatalog& catalog, int n_actors,
                                          double area_threshold) {
  OverlapTable table(catalog, area_threshold);
  return find_logical_scenarios(catalog, table, n_actors);
}

LogicalScenarioSet reduce_symmetries(const LogicalScenarioSet& set) {
  LogicalScenarioSet out;
  out.junction_id = set.junction_id;
  out.n_actors = set.n_actors;
  out.symmetry_reduced = true;
  out.catalog_hash = set.catalog_hash;
  for (const LogicalScenario& sc : set.scenarios) {
    bool sorted = true;
    for (std::size_t i = 2; i < sc.assignment.size(); ++i)
      if (sc.assignment[i] < sc.assignment[i - 1]) {
        sorted = false;
        break;
      }
    if (sorted) out.scenarios.push_back(sc);
  }
  return out;
}

std::string to_json_text(const LogicalScenarioSet& set) {
  json doc;
  doc["junction"] = set.junction_id;
  doc["n_actors"] = set.n_actors;
  doc["symmetry_reduced"] = set.symmetry_reduced;
  doc["catalog_hash"] = set.catalog_hash;
  doc["scenarios"] = json::array();
  for (const LogicalScenario& sc : set.scenarios) {
    json js;
    js["assignment"] = sc.assignment;
    js["overlaps"] = json::array();
    for (const OverlapSummary& ov : sc.overlaps)
      js["overlaps"].push_back({{"ext_index", ov.ext_index},
                                {"area_m2", ov.area_m2},
                                {"ego_entry_arclength_m", ov.ego_entry_arclength_m}});
    doc["scenarios"].push_back(std::move(js));
  }
  return doc.dump(1);
}

LogicalScenarioSet logical_set_from_json_text(const std::string& text) {
  try {
    json doc = json::parse(text);
    LogicalScenarioSet set;
    set.junction_id = doc.at("junction").get<std::string>();
    set.n_actors = doc.at("n_actors").get<int>();
    set.symmetry_reduced = doc.at("symmetry_reduced").get<bool>();
    set.catalog_hash = doc.value("catalog_hash", "");
    for (const auto& js : doc.at("scenarios")) {
      LogicalScenario sc;
      for (const auto& a : js.at("assignment")) sc.assignment.push_back(a.get<std::string>());
      for (const auto& ov : js.at("overlaps"))
        sc.overlaps.push_back({ov.at("ext_index").get<int>(), ov.at("area_m2").get<double>(),
                               ov.at("ego_entry_arclength_m").get<double>()});
      set.scenarios.push_back(std::move(sc));
    }
    return set;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad logical scenario file: ") + e.what());
  }
}

}  // namespace junctiongen
