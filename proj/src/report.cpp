#include "tkp/report.hpp"

#include <cstdio>

namespace tkp {
namespace report {

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += fields[i];
  }
  return line;
}

std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out = csv_join(header) + "\n";
  for (const auto& row : rows) out += csv_join(row) + "\n";
  return out;
}

}  // namespace report
}  // namespace tkp
