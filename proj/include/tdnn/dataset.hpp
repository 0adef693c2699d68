#pragma once

#include "tdnn/training.hpp"

#include <string>

namespace tdnn {

// Line-oriented record format: one object per line,
//   {"atoms": [{"x": [..D reals..], "w": positive real}, ...], "label": real}
// Readers reject any record violating the measure invariants with a
// line-numbered error.

Record parse_record(const std::string& line, int line_number);
std::string format_record(const Record& record);

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

}  // namespace tdnn
