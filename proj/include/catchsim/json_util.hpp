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

// Small helpers shared by the text file formats (arm model, scenario,
// stiffness profile). All of them are JSON documents.

#pragma once

#include <string>
#include <vector>

#include "catchsim/common.hpp"
#include "json.hpp"

namespace catchsim {

using json = nlohmann::json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

const json& json_required_node(const json& j, const std::string& key,
                               const std::string& where);

template <typename T>
T json_required(const json& j, const std::string& key,
                const std::string& where) {
  const json& node = json_required_node(j, key, where);
  try {
    return node.get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + "." + key + ": wrong type");
  }
}

Vec3 json_vec3(const json& j, const std::string& where);
VecX json_vecx(const json& j, const std::string& where);
Mat3 json_mat3(const json& j, const std::string& where);
MatX json_matx(const json& j, const std::string& where);
Quat json_quat_wxyz(const json& j, const std::string& where);

json vec_to_json(const VecX& v);
json mat_to_json(const MatX& m);

}  // namespace catchsim
