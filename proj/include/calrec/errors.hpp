/*
 * Copyright 2026 The calrec Authors.
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

#ifndef CALREC_ERRORS_HPP_
#define CALREC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace calrec {

// All library failures derive from Error. The C API maps each subclass to a
// distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by a caller-supplied value.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input text. The message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Unknown user, item or genre.
class LookupError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training objective became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Pearson correlation requested on a constant sequence.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

// One or more algorithms in an experiment failed; the others completed.
class ExperimentError : public Error {
 public:
  using Error::Error;
};

}  // namespace calrec

#endif  // CALREC_ERRORS_HPP_
