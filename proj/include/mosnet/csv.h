// mosnet/csv.h

// Copyright 2026  mosnet authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MOSNET_CSV_H_
#define MOSNET_CSV_H_

#include <string>
#include <vector>

namespace mosnet {

// Header plus rows of a plain comma-separated file. Fields are split on
// commas with no quoting (none of the formats here embed commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position of `name`; throws if the header lacks it.
  size_t Col(const std::string& name) const;
};

// Reads a CSV file with a required header row. Trailing CR (CRLF files) is
// stripped; blank lines are skipped. Throws std::runtime_error on missing
// files and ragged rows.
CsvTable ReadCsv(const std::string& path);

void WriteCsv(const std::string& path, const CsvTable& table);

std::vector<std::string> SplitCsvLine(const std::string& line);

}  // namespace mosnet

#endif  // MOSNET_CSV_H_
