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

#ifndef DRIFTPLAN_SCENE_IO_HPP_
#define DRIFTPLAN_SCENE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftplan/scene.hpp"

namespace driftplan {

inline constexpr int kSceneSchemaVersion = 1;

/// Parses a JSON scene. Errors are ParseError with "source:line: field" as
/// location. Unknown keys are rejected so typos do not go unnoticed.
Scene parse_scene(std::string_view text, const std::string& source = "<scene>");
Scene load_scene(const std::filesystem::path& path);

/// Serializes with the current schema version. The centerline is written as
/// a polyline.
std::string scene_to_json(const Scene& scene);

/// Feature anchors as CSV with header s,d,weight. A file without rows is
/// valid; a message is appended to `warnings` when it is given.
std::vector<FeatureAnchor> parse_features_csv(std::istream& is, const std::string& source,
                                              std::vector<std::string>* warnings = nullptr);
std::vector<FeatureAnchor> load_features_csv(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings = nullptr);
void write_features_csv(std::span<const FeatureAnchor> features, std::ostream& os);

}  // namespace driftplan

#endif  // DRIFTPLAN_SCENE_IO_HPP_
