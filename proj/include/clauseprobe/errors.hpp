/* Copyright 2026 The clauseprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CLAUSEPROBE_ERRORS_HPP_
#define CLAUSEPROBE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace clauseprobe {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kIo,
  kFormat,
  kDimension,
  kNumeric,
  kNotFound,
};

// Base exception for everything the core library throws. The C API maps the
// code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& sentence, std::size_t line,
             const std::string& message)
      : Error(ErrorCode::kParse, "sentence " + sentence + ", line " +
                                     std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::kFormat,
              "byte offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_ERRORS_HPP_
