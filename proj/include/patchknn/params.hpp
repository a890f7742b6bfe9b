// Copyright 2026 The patchknn Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "patchknn/features.hpp"

namespace patchknn {

using Setting = std::pair<std::string, std::string>;

/// Keys accepted by apply_setting, in the dashed spelling used by CLI flags
/// (underscores are accepted too).
std::vector<std::string_view> feature_setting_keys();
bool is_feature_setting(std::string_view key);

/// Applies one "key = value" override. Throws Error(Errc::invalid_params) on
/// an unknown key or an unparsable value; the combined params are not
/// validated here.
void apply_setting(FeatureParams& params, std::string_view key, std::string_view value);

/// Parses "key = value" lines. Blank lines and lines starting with '#' are
/// skipped.
std::vector<Setting> parse_config(std::string_view text);
std::vector<Setting> read_config(const std::filesystem::path& path);

nlohmann::json to_json(const FeatureParams& params);

}  // namespace patchknn
