#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "snseg/types.hpp"

namespace snseg {

struct CsvTable {
  TimeSeriesMatrix data;
  std::vector<std::string> header;  // empty when the file had none
};

/// Comma-separated numbers, one row per time point. A first row containing
/// any non-numeric cell is taken as the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// 17 significant digits, so values round-trip exactly.
std::string format_csv(const TimeSeriesMatrix& ts, const std::vector<std::string>& header = {});

}  // namespace snseg
