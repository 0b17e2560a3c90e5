// Copyright 2026 the dsslic authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSSLIC_CONFIG_HPP_
#define DSSLIC_CONFIG_HPP_

// key = value configuration files ('#' starts a comment), plus command-line
// "key=value" overrides.

#include <map>
#include <string>
#include <vector>

namespace dsslic {

class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void apply_overrides(const std::vector<std::string>& key_value_pairs);
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace dsslic

#endif  // DSSLIC_CONFIG_HPP_
