// Copyright 2026 The Diachron Authors.
//
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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace diachron {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input supplied by the user: malformed files, missing paths, invalid
// parameters. The CLI maps these to exit code 2.
class UserError : public Error {
 public:
  using Error::Error;
};

// Input bytes that are not valid UTF-8.
class EncodingError : public UserError {
 public:
  EncodingError(const std::string& what, std::uint64_t byte_offset)
      : UserError(what + " at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

// A persisted file failed structural or checksum validation.
class CorruptFileError : public UserError {
 public:
  using UserError::UserError;
};

// A non-finite value appeared during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace diachron
