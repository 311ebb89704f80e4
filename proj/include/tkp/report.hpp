#pragma once

#include <string>
#include <vector>

namespace tkp {
namespace report {

/// Numbers are printed with 12 significant digits, '.' decimal separator.
std::string format_number(double value);

std::string csv_join(const std::vector<std::string>& fields);

/// Header plus rows, newline-terminated lines.
std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

}  // namespace report
}  // namespace tkp
