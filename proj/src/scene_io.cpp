#include "owcsim/scene_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace owc {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, Entry>> entries;

  const Entry* find(const std::string& key) const {
    for (const auto& [k, e] : entries) {
      if (k == key) return &e;
    }
    return nullptr;
  }
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void syntax(const std::string& msg, int line) {
  throw SceneSyntaxError("line " + std::to_string(line) + ": " + msg, line);
}

[[noreturn]] void semantic(const std::string& msg, int line) {
  throw SceneSemanticError("line " + std::to_string(line) + ": " + msg, line);
}

std::vector<double> numbers(const Entry& e, size_t count, const std::string& key) {
  std::string s = e.value;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::vector<double> out;
  const char* p = s.c_str();
  while (true) {
    while (*p == ' ' || *p == '\t') ++p;
    if (*p == '\0') break;
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) syntax("'" + key + "' expects numbers, got '" + e.value + "'", e.line);
    out.push_back(v);
    p = end;
  }
  if (out.size() != count) {
    syntax("'" + key + "' expects " + std::to_string(count) + " value(s), got " +
               std::to_string(out.size()),
           e.line);
  }
  return out;
}

const Entry& required(const Section& s, const std::string& key) {
  const Entry* e = s.find(key);
  if (!e) syntax("[" + s.name + "] is missing '" + key + "'", s.line);
  return *e;
}

double number(const Section& s, const std::string& key, double fallback) {
  const Entry* e = s.find(key);
  return e ? numbers(*e, 1, key)[0] : fallback;
}

Vec3 vec3(const Entry& e, const std::string& key) {
  const auto v = numbers(e, 3, key);
  return {v[0], v[1], v[2]};
}

int integer(const Entry& e, const std::string& key) {
  const double v = numbers(e, 1, key)[0];
  if (v != std::floor(v)) syntax("'" + key + "' expects an integer", e.line);
  return static_cast<int>(v);
}

void check_keys(const Section& s, std::initializer_list<const char*> allowed) {
  for (const auto& [k, e] : s.entries) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) syntax("unknown key '" + k + "' in [" + s.name + "]", e.line);
  }
}

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> sections;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string_view body = raw;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    const std::string line = trim(body);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') syntax("unterminated section header", line_no);
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      static const char* kNames[] = {"room", "surface", "occluder", "unit", "receiver", "tones"};
      bool known = false;
      for (const char* n : kNames) known = known || name == n;
      if (!known) syntax("unknown section [" + name + "]", line_no);
      sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) syntax("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) syntax("empty key", line_no);
    if (value.empty()) syntax("empty value for '" + key + "'", line_no);
    if (sections.empty()) syntax("'" + key + "' appears before any section", line_no);
    if (sections.back().find(key)) syntax("duplicate key '" + key + "'", line_no);
    sections.back().entries.push_back({key, {value, line_no}});
  }
  return sections;
}

}  // namespace

SceneDocument parse_scene_document(std::string_view text) {
  const std::vector<Section> sections = split_sections(text);
  if (sections.empty()) syntax("no sections found", 1);

  SceneDocument doc;
  Scene& scene = doc.scene;
  bool have_room = false;
  std::vector<std::pair<int, const Section*>> unit_sections;
  const Section* tones = nullptr;

  for (const Section& s : sections) {
    if (s.name == "room") {
      if (have_room) syntax("duplicate [room] section", s.line);
      have_room = true;
      check_keys(s, {"dims", "comm_floor"});
      const auto d = numbers(required(s, "dims"), 3, "dims");
      scene.room = {d[0], d[1], d[2]};
      scene.comm_floor_z = number(s, "comm_floor", 1.0);
    } else if (s.name == "surface") {
      check_keys(s, {"label", "origin", "edges", "rho"});
      ReflectingSurface surf;
      if (const Entry* l = s.find("label")) surf.label = l->value;
      surf.origin = vec3(required(s, "origin"), "origin");
      const auto e = numbers(required(s, "edges"), 6, "edges");
      surf.edge_u = {e[0], e[1], e[2]};
      surf.edge_v = {e[3], e[4], e[5]};
      const Entry& rho = required(s, "rho");
      surf.rho = numbers(rho, 1, "rho")[0];
      if (!(surf.rho >= 0.0 && surf.rho <= 1.0)) semantic("rho must be in [0, 1]", rho.line);
      if (std::abs(dot(surf.edge_u, surf.edge_v)) >
              1e-9 * surf.edge_u.norm() * surf.edge_v.norm() ||
          surf.area() <= 0.0) {
        semantic("edges must be non-zero and orthogonal", required(s, "edges").line);
      }
      scene.surfaces.push_back(surf);
    } else if (s.name == "occluder") {
      check_keys(s, {"label", "min", "max"});
      Occluder o;
      if (const Entry* l = s.find("label")) o.label = l->value;
      o.lo = vec3(required(s, "min"), "min");
      o.hi = vec3(required(s, "max"), "max");
      if (!(o.lo.x < o.hi.x && o.lo.y < o.hi.y && o.lo.z < o.hi.z)) {
        semantic("occluder min must be below max in every axis", s.line);
      }
      scene.occluders.push_back(o);
    } else if (s.name == "unit") {
      check_keys(s, {"id", "pos", "power_w", "lambert_n", "tone_hz", "tone_amp", "spacing", "grid"});
      LightUnit u;
      u.id = integer(required(s, "id"), "id");
      u.center = vec3(required(s, "pos"), "pos");
      u.emitter_power_w = number(s, "power_w", u.emitter_power_w);
      u.lambert_n = number(s, "lambert_n", u.lambert_n);
      u.tone.frequency_hz = number(s, "tone_hz", default_tone_hz(u.id));
      u.tone.modulation_index = number(s, "tone_amp", u.tone.modulation_index);
      u.emitter_spacing = number(s, "spacing", u.emitter_spacing);
      if (const Entry* g = s.find("grid")) u.grid = integer(*g, "grid");
      scene.units.push_back(u);
      unit_sections.push_back({s.line, &s});
    } else if (s.name == "receiver") {
      if (doc.has_receiver) syntax("duplicate [receiver] section", s.line);
      doc.has_receiver = true;
      check_keys(s, {"pos", "grid", "eps_r", "load_ohm", "responsivity", "fov_deg"});
      ImagingReceiver& rx = doc.receiver;
      if (const Entry* p = s.find("pos")) rx.position = vec3(*p, "pos");
      if (const Entry* g = s.find("grid")) {
        const auto v = numbers(*g, 2, "grid");
        rx.grid.rows = static_cast<int>(v[0]);
        rx.grid.cols = static_cast<int>(v[1]);
        if (rx.grid.rows < 1 || rx.grid.cols < 1 || v[0] != rx.grid.rows || v[1] != rx.grid.cols) {
          semantic("grid must be two positive integers", g->line);
        }
      }
      rx.electrical.eps_r = number(s, "eps_r", rx.electrical.eps_r);
      rx.electrical.load_ohm = number(s, "load_ohm", rx.electrical.load_ohm);
      rx.electrical.responsivity = number(s, "responsivity", rx.electrical.responsivity);
      rx.optics.acceptance_deg = number(s, "fov_deg", rx.optics.acceptance_deg);
      if (!(rx.optics.acceptance_deg > 0 && rx.optics.acceptance_deg < 90)) {
        semantic("fov_deg must lie in (0, 90)", s.line);
      }
      if (!(rx.electrical.eps_r > 0 && rx.electrical.load_ohm > 0 &&
            rx.electrical.responsivity > 0)) {
        semantic("receiver electrical parameters must be positive", s.line);
      }
    } else if (s.name == "tones") {
      if (tones) syntax("duplicate [tones] section", s.line);
      tones = &s;
    }
  }
  if (!have_room) syntax("missing [room] section", 1);

  for (size_t i = 0; i < scene.units.size(); ++i) {
    const LightUnit& u = scene.units[i];
    const int line = unit_sections[i].first;
    if (!scene.room.contains(u.center)) semantic("unit " + std::to_string(u.id) + " lies outside the room", line);
    for (size_t j = 0; j < i; ++j) {
      if (scene.units[j].id == u.id) semantic("duplicate unit id " + std::to_string(u.id), line);
    }
  }
  if (tones) {
    for (const auto& [k, e] : tones->entries) {
      char* end = nullptr;
      const long id = std::strtol(k.c_str(), &end, 10);
      if (*end != '\0' || end == k.c_str()) syntax("tone keys are unit ids", e.line);
      const double f = numbers(e, 1, k)[0];
      bool found = false;
      for (auto& u : scene.units) {
        if (u.id == id) {
          u.tone.frequency_hz = f;
          found = true;
        }
      }
      if (!found) semantic("tone for unknown unit " + k, e.line);
    }
  }
  if (doc.has_receiver && !scene.room.contains(doc.receiver.position)) {
    semantic("receiver lies outside the room", 0);
  }
  scene.validate();
  return doc;
}

Scene parse_scene(std::string_view text) { return parse_scene_document(text).scene; }

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Vec3& v) { return fmt(v.x) + " " + fmt(v.y) + " " + fmt(v.z); }

}  // namespace

std::string serialize_scene(const Scene& scene) {
  std::ostringstream out;
  out << "[room]\n";
  out << "dims = " << fmt(scene.room.width) << " " << fmt(scene.room.length) << " "
      << fmt(scene.room.height) << "\n";
  out << "comm_floor = " << fmt(scene.comm_floor_z) << "\n";
  for (const auto& s : scene.surfaces) {
    out << "\n[surface]\n";
    if (!s.label.empty()) out << "label = " << s.label << "\n";
    out << "origin = " << fmt(s.origin) << "\n";
    out << "edges = " << fmt(s.edge_u) << "  " << fmt(s.edge_v) << "\n";
    out << "rho = " << fmt(s.rho) << "\n";
  }
  for (const auto& o : scene.occluders) {
    out << "\n[occluder]\n";
    if (!o.label.empty()) out << "label = " << o.label << "\n";
    out << "min = " << fmt(o.lo) << "\n";
    out << "max = " << fmt(o.hi) << "\n";
  }
  for (const auto& u : scene.units) {
    out << "\n[unit]\n";
    out << "id = " << u.id << "\n";
    out << "pos = " << fmt(u.center) << "\n";
    out << "power_w = " << fmt(u.emitter_power_w) << "\n";
    out << "lambert_n = " << fmt(u.lambert_n) << "\n";
    out << "tone_hz = " << fmt(u.tone.frequency_hz) << "\n";
    out << "tone_amp = " << fmt(u.tone.modulation_index) << "\n";
    out << "spacing = " << fmt(u.emitter_spacing) << "\n";
    out << "grid = " << u.grid << "\n";
  }
  return out.str();
}

std::string serialize_scene_document(const SceneDocument& doc) {
  std::string out = serialize_scene(doc.scene);
  if (doc.has_receiver) {
    const ImagingReceiver& rx = doc.receiver;
    out += "\n[receiver]\n";
    out += "pos = " + fmt(rx.position) + "\n";
    out += "grid = " + std::to_string(rx.grid.rows) + " " + std::to_string(rx.grid.cols) + "\n";
    out += "eps_r = " + fmt(rx.electrical.eps_r) + "\n";
    out += "load_ohm = " + fmt(rx.electrical.load_ohm) + "\n";
    out += "responsivity = " + fmt(rx.electrical.responsivity) + "\n";
    out += "fov_deg = " + fmt(rx.optics.acceptance_deg) + "\n";
  }
  return out;
}

SceneDocument load_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_document(ss.str());
}

SceneDocument resolve_scene(const std::string& preset_or_path) {
  SceneDocument doc;
  if (preset_or_path == "room-a") {
    doc.scene = build_room_a();
  } else if (preset_or_path == "room-b") {
    doc.scene = build_room_b();
  } else {
    return load_scene_file(preset_or_path);
  }
  return doc;
}

}  // namespace owc
