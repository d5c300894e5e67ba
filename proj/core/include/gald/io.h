/*
 * Copyright 2026 The GALDetector Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GALD_IO_H_
#define GALD_IO_H_

#include <string>

namespace gald {

// Writes to a temporary sibling file and renames it over `path`, so readers
// never observe a partial file. Throws DataError on failure.
void WriteFileAtomic(const std::string& path, const std::string& contents);

std::string ReadFile(const std::string& path);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

}  // namespace gald

#endif  // GALD_IO_H_
