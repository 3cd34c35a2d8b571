// Copyright 2026 The tcprio Authors
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

#pragma once

// Minimal CSV helpers shared by the loaders. Fields are comma separated with
// no quoting; a trailing '\r' is stripped so CRLF files load unchanged.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tcprio::csv {

std::vector<std::string> split_line(std::string_view line);

// Reads the next non-empty line. Returns false at end of stream.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

// Parses a finite decimal number; throws ParseError naming `where`.
double parse_double(std::string_view field, std::string_view where);

}  // namespace tcprio::csv
