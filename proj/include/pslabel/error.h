// Copyright 2026 The pslabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSLABEL_ERROR_H_
#define PSLABEL_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace pslabel {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (bad threshold, bad box, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A cluster whose mean width or height is zero cannot be normalized.
class DegenerateClusterError : public Error {
 public:
  using Error::Error;
};

// A study produced too little data to report on.
class DegenerateStudyError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `record_index` is the offending array index within
// `section`, or npos when the problem is not tied to one record.
class ParseError : public Error {
 public:
  static constexpr std::size_t kNoRecord = static_cast<std::size_t>(-1);

  ParseError(const std::string& message, std::string section = {},
             std::size_t record_index = kNoRecord)
      : Error(Format(message, section, record_index)),
        section_(std::move(section)),
        record_index_(record_index) {}

  const std::string& section() const { return section_; }
  std::size_t record_index() const { return record_index_; }

 private:
  static std::string Format(const std::string& message,
                            const std::string& section, std::size_t index) {
    if (index == kNoRecord) return message;
    return section + "[" + std::to_string(index) + "]: " + message;
  }

  std::string section_;
  std::size_t record_index_;
};

}  // namespace pslabel

#endif  // PSLABEL_ERROR_H_
