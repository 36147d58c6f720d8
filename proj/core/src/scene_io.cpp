// Copyright 2026 The driftplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "driftplan/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

using nlohmann::json;

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// Reads typed fields and reports errors as source:line: path. The line is
// that of the first occurrence of the offending key, which is exact for the
// flat, unique keys the schema uses and a close hint otherwise.
class Reader {
 public:
  Reader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    std::string loc = source_;
    // A missing key has no text; fall back to the nearest enclosing key.
    std::string rest = path;
    while (!rest.empty()) {
      const auto dot = rest.find_last_of('.');
      const std::string key = rest.substr(dot == std::string::npos ? 0 : dot + 1);
      const auto pos = text_.find("\"" + key.substr(0, key.find('[')) + "\"");
      if (pos != std::string_view::npos) {
        loc += ":" + std::to_string(line_of_offset(text_, pos));
        break;
      }
      rest = dot == std::string::npos ? "" : rest.substr(0, dot);
    }
    throw ParseError(loc + ": " + path, what);
  }

  void allow(const json& obj, const std::string& path, std::set<std::string> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (!keys.count(k)) fail(path + "." + k, "unknown field");
    }
  }

  double number(const json& obj, const std::string& path, const std::string& key,
                std::optional<double> fallback) const {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (!fallback) fail(path + "." + key, "missing required field");
      return *fallback;
    }
    if (!it->is_number()) fail(path + "." + key, "expected a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) fail(path + "." + key, "expected a finite number");
    return v;
  }

  int integer(const json& obj, const std::string& path, const std::string& key,
              int fallback) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
    return it->get<int>();
  }

  std::string string(const json& obj, const std::string& path, const std::string& key,
                     std::optional<std::string> fallback) const {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (!fallback) fail(path + "." + key, "missing required field");
      return *fallback;
    }
    if (!it->is_string()) fail(path + "." + key, "expected a string");
    return it->get<std::string>();
  }

  Vec2 point(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(path, "expected [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  const json& array(const json& obj, const std::string& path, const std::string& key) const {
    static const json kEmpty = json::array();
    const auto it = obj.find(key);
    if (it == obj.end()) return kEmpty;
    if (!it->is_array()) fail(path + "." + key, "expected an array");
    return *it;
  }

 private:
  std::string_view text_;
  std::string source_;
};

Centerline read_centerline(const Reader& r, const json& j) {
  const std::string path = "centerline";
  const std::string type = r.string(j, path, "type", std::nullopt);
  Vec2 origin = Vec2::Zero();
  if (j.contains("origin")) origin = r.point(j["origin"], path + ".origin");
  const double heading = r.number(j, path, "heading", 0.0);
  try {
    if (type == "straight") {
      r.allow(j, path, {"type", "length", "origin", "heading"});
      return Centerline::straight(r.number(j, path, "length", std::nullopt), origin, heading);
    }
    if (type == "arc") {
      r.allow(j, path, {"type", "radius", "sweep", "segments", "origin", "heading"});
      return Centerline::arc(r.number(j, path, "radius", std::nullopt),
                             r.number(j, path, "sweep", std::nullopt),
                             r.integer(j, path, "segments", 64), origin, heading);
    }
    if (type == "polyline") {
      r.allow(j, path, {"type", "points"});
      const json& pts = r.array(j, path, "points");
      std::vector<Vec2> w;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        w.push_back(r.point(pts[i], path + ".points[" + std::to_string(i) + "]"));
      }
      return Centerline(std::move(w));
    }
  } catch (const InvalidArgument& e) {
    r.fail(path, e.what());
  }
  r.fail(path + ".type", "expected straight, arc or polyline, got '" + type + "'");
}

}  // namespace

Scene parse_scene(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":" + std::to_string(line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)),
                     "malformed JSON");
  }
  const Reader r(text, source);
  r.allow(j, "scene",
          {"schema_version", "name", "centerline", "road_width", "run_length", "v_des", "v_max",
           "a_max", "kappa_max", "planning_margin", "ego", "features", "obstacles", "structures"});
  if (!j.contains("schema_version")) r.fail("schema_version", "missing required field");
  const int version = r.integer(j, "scene", "schema_version", 0);
  if (version != kSceneSchemaVersion) {
    r.fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                 std::to_string(kSceneSchemaVersion) + ")");
  }

  Scene s;
  s.name = r.string(j, "scene", "name", s.name);
  if (j.contains("centerline")) s.centerline = read_centerline(r, j["centerline"]);
  s.road_width = r.number(j, "scene", "road_width", s.road_width);
  s.run_length = r.number(j, "scene", "run_length", s.run_length);
  s.v_des = r.number(j, "scene", "v_des", s.v_des);
  s.v_max = r.number(j, "scene", "v_max", s.v_max);
  s.a_max = r.number(j, "scene", "a_max", s.a_max);
  s.kappa_max = r.number(j, "scene", "kappa_max", s.kappa_max);
  s.planning_margin = r.number(j, "scene", "planning_margin", s.planning_margin);

  if (j.contains("ego")) {
    const json& e = j["ego"];
    r.allow(e, "ego", {"s", "d", "speed", "half_length", "half_width"});
    s.start_s = r.number(e, "ego", "s", s.start_s);
    s.start_d = r.number(e, "ego", "d", s.start_d);
    s.start_speed = r.number(e, "ego", "speed", s.start_speed);
    s.ego_half_length = r.number(e, "ego", "half_length", s.ego_half_length);
    s.ego_half_width = r.number(e, "ego", "half_width", s.ego_half_width);
  }

  const json& feats = r.array(j, "scene", "features");
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const std::string p = "features[" + std::to_string(i) + "]";
    r.allow(feats[i], p, {"s", "d", "weight"});
    s.features.push_back({r.number(feats[i], p, "s", std::nullopt),
                          r.number(feats[i], p, "d", std::nullopt),
                          r.number(feats[i], p, "weight", 1.0)});
  }
  const json& obs = r.array(j, "scene", "obstacles");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string p = "obstacles[" + std::to_string(i) + "]";
    r.allow(obs[i], p, {"x", "y", "vx", "vy", "half_length", "half_width"});
    Obstacle o;
    o.x = r.number(obs[i], p, "x", std::nullopt);
    o.y = r.number(obs[i], p, "y", std::nullopt);
    o.vx = r.number(obs[i], p, "vx", 0.0);
    o.vy = r.number(obs[i], p, "vy", 0.0);
    o.half_length = r.number(obs[i], p, "half_length", o.half_length);
    o.half_width = r.number(obs[i], p, "half_width", o.half_width);
    s.obstacles.push_back(o);
  }
  const json& st = r.array(j, "scene", "structures");
  for (std::size_t i = 0; i < st.size(); ++i) {
    const std::string p = "structures[" + std::to_string(i) + "]";
    r.allow(st[i], p, {"kind", "s", "d", "radius", "half_length", "half_width", "height"});
    Structure x;
    const std::string kind = r.string(st[i], p, "kind", "cylinder");
    if (kind == "cylinder") {
      x.kind = Structure::Kind::kCylinder;
    } else if (kind == "box") {
      x.kind = Structure::Kind::kBox;
    } else {
      r.fail(p + ".kind", "expected cylinder or box, got '" + kind + "'");
    }
    x.s = r.number(st[i], p, "s", std::nullopt);
    x.d = r.number(st[i], p, "d", std::nullopt);
    x.radius = r.number(st[i], p, "radius", x.radius);
    x.half_length = r.number(st[i], p, "half_length", x.half_length);
    x.half_width = r.number(st[i], p, "half_width", x.half_width);
    x.height = r.number(st[i], p, "height", x.height);
    s.structures.push_back(x);
  }

  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, e.what());
  }
  return s;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scene file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path.string());
}

std::string scene_to_json(const Scene& s) {
  json j;
  j["schema_version"] = kSceneSchemaVersion;
  j["name"] = s.name;
  json pts = json::array();
  for (const auto& w : s.centerline.waypoints()) pts.push_back({w.x(), w.y()});
  j["centerline"] = {{"type", "polyline"}, {"points", pts}};
  j["road_width"] = s.road_width;
  j["run_length"] = s.run_length;
  j["v_des"] = s.v_des;
  j["v_max"] = s.v_max;
  j["a_max"] = s.a_max;
  j["kappa_max"] = s.kappa_max;
  j["planning_margin"] = s.planning_margin;
  j["ego"] = {{"s", s.start_s},
              {"d", s.start_d},
              {"speed", s.start_speed},
              {"half_length", s.ego_half_length},
              {"half_width", s.ego_half_width}};
  j["features"] = json::array();
  for (const auto& f : s.features) j["features"].push_back({{"s", f.s}, {"d", f.d}, {"weight", f.weight}});
  j["obstacles"] = json::array();
  for (const auto& o : s.obstacles) {
    j["obstacles"].push_back({{"x", o.x},
                              {"y", o.y},
                              {"vx", o.vx},
                              {"vy", o.vy},
                              {"half_length", o.half_length},
                              {"half_width", o.half_width}});
  }
  j["structures"] = json::array();
  for (const auto& x : s.structures) {
    j["structures"].push_back(
        {{"kind", x.kind == Structure::Kind::kBox ? "box" : "cylinder"},
         {"s", x.s},
         {"d", x.d},
         {"radius", x.radius},
         {"half_length", x.half_length},
         {"half_width", x.half_width},
         {"height", x.height}});
  }
  return j.dump(2) + "\n";
}

std::vector<FeatureAnchor> parse_features_csv(std::istream& is, const std::string& source,
                                              std::vector<std::string>* warnings) {
  std::vector<FeatureAnchor> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      std::string h;
      for (char c : line) {
        if (c != ' ' && c != '\t') h += c;
      }
      if (h != "s,d,weight" && h != "s,d") {
        throw ParseError(source + ":" + std::to_string(lineno), "expected header s,d,weight");
      }
      header = true;
      continue;
    }
    std::vector<double> cols;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos ||
          !std::isfinite(v)) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": column " +
                             std::to_string(cols.size() + 1),
                         "expected a finite number, got '" + cell + "'");
      }
      cols.push_back(v);
    }
    if (cols.size() != 2 && cols.size() != 3) {
      throw ParseError(source + ":" + std::to_string(lineno),
                       "expected 2 or 3 columns, got " + std::to_string(cols.size()));
    }
    const FeatureAnchor f{cols[0], cols[1], cols.size() == 3 ? cols[2] : 1.0};
    if (f.weight < 0.0) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": column 3",
                       "weight must be non-negative");
    }
    out.push_back(f);
  }
  if (out.empty() && warnings) {
    warnings->push_back(source + ": no feature rows; the feature term is inert");
  }
  return out;
}

std::vector<FeatureAnchor> load_features_csv(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file " + path.string());
  return parse_features_csv(in, path.string(), warnings);
}

void write_features_csv(std::span<const FeatureAnchor> features, std::ostream& os) {
  os << "s,d,weight\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& f : features) row << f.s << ',' << f.d << ',' << f.weight << '\n';
  os << row.str();
}

}  // namespace driftplan
