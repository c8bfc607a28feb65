#pragma once

// Energy trace CSV: fixed header, one row per recorded time, 17 significant
// digits so that reading back reproduces every double exactly.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "beammem/energy.hpp"
#include "beammem/errors.hpp"

namespace beammem {

inline constexpr const char* kCsvHeader = "t,psi_omega,psi_b,psi,u_tip,v_tip,F,cross,L";

namespace csv_detail {
using Column = double TraceRow::*;
inline constexpr std::array<Column, 9> kColumns{&TraceRow::t,     &TraceRow::psi_omega, &TraceRow::psi_b,
                                                &TraceRow::psi,   &TraceRow::u_tip,     &TraceRow::v_tip,
                                                &TraceRow::F,     &TraceRow::cross,     &TraceRow::L};
}  // namespace csv_detail

inline void write_csv(std::ostream& out, const EnergyTrace& trace) {
  out << kCsvHeader << '\n';
  char buf[32];
  for (const auto& row : trace.rows) {
    for (std::size_t c = 0; c < csv_detail::kColumns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row.*csv_detail::kColumns[c]);
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

inline EnergyTrace read_csv(std::istream& in) {
  EnergyTrace trace;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw InputError(std::string("trace CSV: expected header '") + kCsvHeader + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TraceRow row;
    std::istringstream fields(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(fields, cell, ',')) {
      if (c >= csv_detail::kColumns.size()) throw InputError("trace CSV line " + std::to_string(line_no) + ": too many fields");
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw InputError("trace CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      row.*csv_detail::kColumns[c++] = v;
    }
    if (c != csv_detail::kColumns.size()) throw InputError("trace CSV line " + std::to_string(line_no) + ": expected 9 fields");
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace beammem
