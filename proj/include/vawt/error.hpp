/*
 * Copyright 2026 The vawtopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <stdexcept>
#include <string>

namespace vawt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define VAWT_DEFINE_ERROR(Name)                        \
    class Name : public Error {                        \
    public:                                            \
        explicit Name(const std::string& what)         \
            : Error(std::string(#Name ": ") + what) {} \
    }

VAWT_DEFINE_ERROR(InvalidArgument);
VAWT_DEFINE_ERROR(NonFiniteInput);
VAWT_DEFINE_ERROR(ExhaustedRejection);
VAWT_DEFINE_ERROR(ConflictingDuplicates);
VAWT_DEFINE_ERROR(SingularKernel);
VAWT_DEFINE_ERROR(ShapeMismatch);
VAWT_DEFINE_ERROR(DatasetTooSmall);
VAWT_DEFINE_ERROR(ZeroWind);
VAWT_DEFINE_ERROR(TooFewSamples);
VAWT_DEFINE_ERROR(RankDeficient);
VAWT_DEFINE_ERROR(GridTooLarge);
VAWT_DEFINE_ERROR(ZeroBaseline);
VAWT_DEFINE_ERROR(NoFeasibleStart);
VAWT_DEFINE_ERROR(IoError);

#undef VAWT_DEFINE_ERROR

// Malformed file content. line is 1-based, 0 when not tied to a line.
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::size_t line = 0)
        : Error("SchemaError: " + (line ? "line " + std::to_string(line) + ": " : std::string()) + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace vawt
