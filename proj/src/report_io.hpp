#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "matern4d/cli_harness.hpp"

namespace matern4d::detail {

using Json = nlohmann::ordered_json;

/// Pretty JSON with every float written by format_double (non-finite -> null).
std::string dump_json(const Json& value);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Header row plus one line per record; fields are written verbatim.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

Json config_json(const RunConfig& config);

std::string ivec_str(const IVec4& k);

}  // namespace matern4d::detail
