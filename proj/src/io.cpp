#include "orthosfm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Geometry>

namespace orthosfm {

namespace {

Error parse_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what);
}

double number_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw Error(ErrorKind::kParse, where + ": missing numeric \"" + key + "\"");
  }
  return obj.at(key).get<double>();
}

void check_body(const std::vector<LabeledPoint3>& body) {
  if (body.size() < 3) throw Error(ErrorKind::kInvalidInput, "scene needs at least 3 points");
  double diam_sq = 0.0;
  for (const auto& u : body) {
    for (const auto& v : body) {
      diam_sq = std::max(diam_sq, (u.point.vec() - v.point.vec()).squaredNorm());
    }
  }
  const Eigen::Vector3d p = body[0].point.vec();
  const Eigen::Vector3d normal = (body[1].point.vec() - p).cross(body[2].point.vec() - p);
  if (!(normal.norm() > 1e-12 * diam_sq)) {
    throw Error(ErrorKind::kInvalidInput, "first three scene points are collinear");
  }
  if (body.size() >= 4 &&
      !(std::abs(normal.dot(body[3].point.vec() - p)) > 1e-12 * diam_sq * std::sqrt(diam_sq))) {
    throw Error(ErrorKind::kInvalidInput, "first four scene points are coplanar");
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view field, std::size_t line, const char* name) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw parse_error(line, std::string("bad ") + name + " '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json scene_to_json(const Scene& scene) {
  Json points = Json::array();
  for (const auto& lp : scene.body) {
    points.push_back({{"label", lp.label}, {"x", lp.point.x}, {"y", lp.point.y}, {"z", lp.point.z}});
  }
  Json motions = Json::array();
  for (const auto& m : scene.motions) {
    Json rotation = Json::array();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) rotation.push_back(m.rotation()(i, j));
    }
    motions.push_back(
        {{"rotation", rotation}, {"tx", m.translation().x()}, {"ty", m.translation().y()}});
  }
  return Json{{"points", points}, {"motions", motions}, {"seed", scene.seed}};
}

Scene scene_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "scene: top level must be an object");
  if (!doc.contains("points") || !doc.at("points").is_array()) {
    throw Error(ErrorKind::kParse, "scene: missing \"points\" array");
  }
  if (!doc.contains("motions") || !doc.at("motions").is_array()) {
    throw Error(ErrorKind::kParse, "scene: missing \"motions\" array");
  }
  Scene scene;
  std::size_t i = 0;
  for (const auto& p : doc.at("points")) {
    const std::string where = "scene point " + std::to_string(i++);
    if (!p.is_object() || !p.contains("label") || !p.at("label").is_string()) {
      throw Error(ErrorKind::kParse, where + ": missing \"label\"");
    }
    scene.body.push_back({p.at("label").get<std::string>(),
                          Point3{number_field(p, "x", where), number_field(p, "y", where),
                                 number_field(p, "z", where)}});
  }
  i = 0;
  for (const auto& m : doc.at("motions")) {
    const std::string where = "scene motion " + std::to_string(i++);
    if (!m.is_object() || !m.contains("rotation") || !m.at("rotation").is_array() ||
        m.at("rotation").size() != 9) {
      throw Error(ErrorKind::kParse, where + ": \"rotation\" must hold 9 numbers");
    }
    Eigen::Matrix3d r;
    for (int k = 0; k < 9; ++k) {
      const auto& e = m.at("rotation").at(k);
      if (!e.is_number()) throw Error(ErrorKind::kParse, where + ": non-numeric rotation entry");
      r(k / 3, k % 3) = e.get<double>();
    }
    scene.motions.emplace_back(r, Eigen::Vector2d(number_field(m, "tx", where),
                                                  number_field(m, "ty", where)));
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) {
      throw Error(ErrorKind::kParse, "scene: \"seed\" must be a non-negative integer");
    }
    scene.seed = doc.at("seed").get<std::uint64_t>();
  }

  check_body(scene.body);
  for (std::size_t a = 0; a < scene.body.size(); ++a) {
    for (std::size_t b = a + 1; b < scene.body.size(); ++b) {
      if (scene.body[a].label == scene.body[b].label) {
        throw Error(ErrorKind::kInvalidInput, "duplicate point label " + scene.body[a].label);
      }
    }
  }
  if (scene.motions.empty()) throw Error(ErrorKind::kInvalidInput, "scene has no motions");
  const auto& first = scene.motions.front();
  if (!(first.rotation() - Eigen::Matrix3d::Identity()).isZero(1e-12) ||
      !first.translation().isZero(1e-12)) {
    throw Error(ErrorKind::kInvalidInput, "first motion must be the identity");
  }
  return scene;
}

std::string write_scene(const Scene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

Scene read_scene(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("scene: ") + e.what());
  }
  return scene_from_json(doc);
}

std::string write_frames(std::span<const FrameObservation> frames) {
  std::string out = "frame_index,label,x,y\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& lp : frames[f].points()) {
      if (lp.label.find_first_of(",\r\n") != std::string::npos) {
        throw Error(ErrorKind::kInvalidInput, "label '" + lp.label + "' cannot be written to CSV");
      }
      out += std::to_string(f + 1) + "," + lp.label + "," + format_number(lp.point.x) + "," +
             format_number(lp.point.y) + "\n";
    }
  }
  return out;
}

std::vector<FrameObservation> read_frames(std::string_view text) {
  std::map<long long, std::vector<LabeledPoint2>> by_frame;
  std::map<long long, std::size_t> first_line;
  std::map<long long, std::vector<std::size_t>> row_lines;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim_cr(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "frame_index,label,x,y") {
        throw parse_error(line_no, "expected header 'frame_index,label,x,y'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != 4) {
      throw parse_error(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    long long index = 0;
    const auto [ptr, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), index);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || index < 1) {
      throw parse_error(line_no, "bad frame_index '" + std::string(fields[0]) + "'");
    }
    if (fields[1].empty()) throw parse_error(line_no, "empty label");
    const double x = parse_double(fields[2], line_no, "x");
    const double y = parse_double(fields[3], line_no, "y");
    auto& pts = by_frame[index];
    for (const auto& lp : pts) {
      if (lp.label == fields[1]) {
        throw parse_error(line_no, "label '" + std::string(fields[1]) + "' repeated in frame " +
                                       std::to_string(index));
      }
    }
    first_line.try_emplace(index, line_no);
    row_lines[index].push_back(line_no);
    pts.push_back({std::string(fields[1]), Point2{x, y}});
  }
  if (!header_seen) throw parse_error(1, "empty frames file");
  if (by_frame.empty()) throw parse_error(line_no, "no observations");

  const std::vector<LabeledPoint2> reference = by_frame.begin()->second;
  std::vector<FrameObservation> frames;
  long long expected = 1;
  for (auto& [index, pts] : by_frame) {
    if (index != expected++) {
      throw parse_error(first_line[index], "frame indices must run 1, 2, ... without gaps");
    }
    if (pts.size() != reference.size()) {
      throw parse_error(first_line[index], "frame " + std::to_string(index) + " has " +
                                               std::to_string(pts.size()) + " points, frame 1 has " +
                                               std::to_string(reference.size()));
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& lp = pts[k];
      const bool known = std::any_of(reference.begin(), reference.end(),
                                     [&](const auto& r) { return r.label == lp.label; });
      if (!known) {
        throw parse_error(row_lines[index][k], "label '" + lp.label + "' of frame " +
                                                 std::to_string(index) + " is not in frame 1");
      }
    }
    try {
      frames.emplace_back(std::move(pts));
    } catch (const Error& e) {
      throw parse_error(first_line[index], e.what());
    }
  }
  return frames;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kInvalidInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidInput, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kInvalidInput, "write failed: " + path.string());
}

Json lengths_json(const TriangleDistances& t) {
  return Json{{"a_sq", t.a_sq}, {"b_sq", t.b_sq}, {"c_sq", t.c_sq}};
}

Json lengths_json(const TetraDistances& t) {
  return Json{{"a_sq", t.a_sq}, {"b_sq", t.b_sq}, {"c_sq", t.c_sq},
              {"d_sq", t.d_sq}, {"f_sq", t.f_sq}, {"g_sq", t.g_sq}};
}

Json dof_json(const DofBalance& d) {
  return Json{{"unknowns", d.unknowns}, {"information", d.information},
              {"recoverable", d.recoverable}};
}

}  // namespace orthosfm
