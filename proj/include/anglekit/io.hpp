#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "anglekit/constraints.hpp"
#include "anglekit/errors.hpp"
#include "anglekit/geometry.hpp"

namespace anglekit {

using Json = nlohmann::json;

namespace detail {

inline Json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace detail

// Point-set file: {"d": 2, "n": N, "points": [[x, y], ...]}

inline Json point_set_to_json(const PointSet& p) {
  Json points = Json::array();
  for (const auto& q : p.points) points.push_back(Json::array({q.x(), q.y()}));
  return Json{{"d", 2}, {"n", p.size()}, {"points", points}};
}

inline PointSet point_set_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("n") || !j.contains("points"))
    throw ParseError("point set: expected object with d, n, points");
  if (j["d"] != 2) throw ParseError("point set: only d = 2 is supported");
  if (!j["points"].is_array()) throw ParseError("point set: points must be an array");
  PointSet p;
  for (const auto& entry : j["points"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
      throw ParseError("point set: each point must be [x, y]");
    p.points.emplace_back(entry[0].get<double>(), entry[1].get<double>());
  }
  if (!j["n"].is_number_integer() || j["n"].get<int>() != p.size())
    throw ParseError("point set: n does not match the number of points");
  return p;
}

inline void write_point_set(const std::string& path, const PointSet& p) {
  detail::write_file(path, point_set_to_json(p));
}

inline PointSet read_point_set(const std::string& path) {
  return point_set_from_json(detail::parse_file(path));
}

// Angle file: {"n": N, "order": "canonical", "angles": [theta_0 ... theta_{M-1}]}

inline Json angles_to_json(const AngleVector& v) {
  Json angles = Json::array();
  for (int i = 0; i < v.size(); ++i) angles.push_back(v.values[i]);
  return Json{{"n", v.n_points()}, {"order", "canonical"}, {"angles", angles}};
}

inline AngleVector angles_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("order") || !j.contains("angles"))
    throw ParseError("angle file: expected object with n, order, angles");
  if (j["order"] != "canonical") throw ParseError("angle file: order must be \"canonical\"");
  if (!j["n"].is_number_integer()) throw ParseError("angle file: n must be an integer");
  const int n = j["n"].get<int>();
  if (n < 3) throw ParseError("angle file: n must be at least 3");
  const TripletIndexer idx(n);
  if (!j["angles"].is_array() || static_cast<int>(j["angles"].size()) != idx.count())
    throw ParseError("angle file: expected " + std::to_string(idx.count()) + " angles");
  Eigen::VectorXd values(idx.count());
  int i = 0;
  for (const auto& a : j["angles"]) {
    if (!a.is_number()) throw ParseError("angle file: angles must be numbers");
    values[i++] = a.get<double>();
  }
  return AngleVector{idx, std::move(values)};
}

inline void write_angles(const std::string& path, const AngleVector& v) {
  detail::write_file(path, angles_to_json(v));
}

inline AngleVector read_angles(const std::string& path) {
  return angles_from_json(detail::parse_file(path));
}

// Constraint-system dump: {"L": L, "rows": [{"tag": ..., "coeffs": [[index, value], ...], "b": ...}]}

inline Json linear_system_to_json(const LinearConstraintSystem& sys) {
  Json rows = Json::array();
  for (int r = 0; r < sys.rows(); ++r) {
    Json coeffs = Json::array();
    for (int c = 0; c < sys.n_angles; ++c) {
      const double v = sys.a_matrix(r, c);
      if (v != 0.0) coeffs.push_back(Json::array({c, v}));
    }
    rows.push_back(Json{{"tag", sys.row_tags[static_cast<std::size_t>(r)].to_string()},
                        {"coeffs", coeffs},
                        {"b", sys.b_vector[r]}});
  }
  return Json{{"L", sys.rows()}, {"rows", rows}};
}

inline void write_linear_system(const std::string& path, const LinearConstraintSystem& sys) {
  detail::write_file(path, linear_system_to_json(sys));
}

}  // namespace anglekit
