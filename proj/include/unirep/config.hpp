#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "unirep/synthetic.hpp"
#include "unirep/trainer.hpp"

namespace unirep {

// key=value run configuration ('#' comments, blank lines ignored). Unknown
// keys are rejected; path-valued keys must point at existing files when
// fetched.
class RunConfig {
 public:
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::uint64_t> get_seeds(const std::string& key,
                                       std::vector<std::uint64_t> fallback) const;
  // Existing-file path; throws ConfigError when missing unless optional.
  std::filesystem::path get_path(const std::string& key) const;
  bool has_path(const std::string& key) const { return has(key); }

  TrainConfig train_config() const;
  SyntheticSpec synthetic_spec() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void validate_keys() const;
  std::map<std::string, std::string> values_;
};

}  // namespace unirep
