// Copyright 2026 The fiberlab Authors. All Rights Reserved.
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

#ifndef FIBERLAB_ERRORS_H_
#define FIBERLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fiberlab {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments violate an operation's preconditions.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A generator configuration cannot be satisfied.
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

// Annotation found no usable foreground in an image.
class NoFiberError : public Error {
 public:
  using Error::Error;
};

// A quantity is mathematically undefined for the given inputs.
class UndefinedResultError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid annotation file. The message names the offending
// line or record.
class ParseError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace fiberlab

#endif  // FIBERLAB_ERRORS_H_
