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

#include "patchknn/params.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "patchknn/error.hpp"

namespace patchknn {

namespace {

std::string canonical(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(Errc::invalid_params, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

int to_int(std::string_view key, std::string_view value) {
  value = trim(value);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  value = trim(value);
  std::string copy(value);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(copy, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != copy.size()) bad_value(key, value);
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

}  // namespace

std::vector<std::string_view> feature_setting_keys() {
  return {"lbp-points",   "lbp-radius",  "lbp-bins",    "glcm-offset", "glcm-levels",      "glcm-symmetric",
          "gabor-lambda", "gabor-theta", "gabor-sigma", "gabor-gamma", "gabor-psi",        "gabor-half-extent",
          "gabor-bins",   "gabor-remove-dc"};
}

bool is_feature_setting(std::string_view key) {
  const auto keys = feature_setting_keys();
  return std::find(keys.begin(), keys.end(), canonical(key)) != keys.end();
}

void apply_setting(FeatureParams& params, std::string_view raw_key, std::string_view value) {
  const std::string key = canonical(trim(raw_key));
  if (key == "lbp-points") {
    params.lbp.points = to_int(key, value);
  } else if (key == "lbp-radius") {
    params.lbp.radius = to_int(key, value);
  } else if (key == "lbp-bins") {
    params.lbp.bins = to_int(key, value);
  } else if (key == "glcm-offset") {
    const auto comma = value.find(',');
    if (comma == std::string_view::npos) bad_value(key, value);
    params.glcm.row_offset = to_int(key, value.substr(0, comma));
    params.glcm.col_offset = to_int(key, value.substr(comma + 1));
  } else if (key == "glcm-levels") {
    params.glcm.levels = to_int(key, value);
  } else if (key == "glcm-symmetric") {
    params.glcm.symmetric = to_bool(key, value);
  } else if (key == "gabor-lambda") {
    params.gabor.wavelength = to_double(key, value);
  } else if (key == "gabor-theta") {
    params.gabor.theta = to_double(key, value);
  } else if (key == "gabor-sigma") {
    params.gabor.sigma = to_double(key, value);
  } else if (key == "gabor-gamma") {
    params.gabor.gamma = to_double(key, value);
  } else if (key == "gabor-psi") {
    params.gabor.psi = to_double(key, value);
  } else if (key == "gabor-half-extent") {
    params.gabor.half_extent = to_int(key, value);
  } else if (key == "gabor-bins") {
    params.gabor.bins = to_int(key, value);
  } else if (key == "gabor-remove-dc") {
    params.gabor.remove_dc = to_bool(key, value);
  } else {
    throw Error(Errc::invalid_params, "unknown feature setting '" + std::string(raw_key) + "'");
  }
}

std::vector<Setting> parse_config(std::string_view text) {
  std::vector<Setting> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_params, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(Errc::invalid_params, "config line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(canonical(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

std::vector<Setting> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::json to_json(const FeatureParams& p) {
  return {
      {"lbp", {{"points", p.lbp.points}, {"radius", p.lbp.radius}, {"bins", p.lbp.bins}}},
      {"glcm",
       {{"offset", {p.glcm.row_offset, p.glcm.col_offset}},
        {"levels", p.glcm.levels},
        {"symmetric", p.glcm.symmetric},
        {"normalize", p.glcm.normalize}}},
      {"gabor",
       {{"lambda", p.gabor.wavelength},
        {"theta", p.gabor.theta},
        {"psi", p.gabor.psi},
        {"sigma", p.gabor.sigma},
        {"gamma", p.gabor.gamma},
        {"half_extent", p.gabor.resolved_half_extent()},
        {"bins", p.gabor.bins},
        {"remove_dc", p.gabor.remove_dc}}},
  };
}

}  // namespace patchknn
