// Copyright 2026 The catchsim Authors
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

#include "catchsim/json_util.hpp"

#include <fstream>
#include <sstream>

namespace catchsim {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

const json& json_required_node(const json& j, const std::string& key,
                               const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where + ": missing required field '" + key + "'");
  }
  return j.at(key);
}

VecX json_vecx(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(where + ": expected numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Vec3 json_vec3(const json& j, const std::string& where) {
  VecX v = json_vecx(j, where);
  if (v.size() != 3) throw ParseError(where + ": expected 3 entries");
  return v;
}

MatX json_matx(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  MatX m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    VecX row = json_vecx(j[r], where);
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw ParseError(where + ": ragged matrix");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Mat3 json_mat3(const json& j, const std::string& where) {
  MatX m = json_matx(j, where);
  if (m.rows() != 3 || m.cols() != 3) {
    throw ParseError(where + ": expected a 3x3 matrix");
  }
  return m;
}

Quat json_quat_wxyz(const json& j, const std::string& where) {
  VecX v = json_vecx(j, where);
  if (v.size() != 4) throw ParseError(where + ": expected 4 entries");
  Quat q(v[0], v[1], v[2], v[3]);
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw ParseError(where + ": quaternion is not unit length");
  }
  return q.normalized();
}

json vec_to_json(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const MatX& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    a.push_back(vec_to_json(VecX(m.row(r).transpose())));
  }
  return a;
}

}  // namespace catchsim
