// SPDX-License-Identifier: Apache-2.0
//
// mpcprof: multipath component profiling, tracking and prediction
// Copyright (C) 2026 The mpcprof Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace mpcprof
{

// Exit codes used by the command-line tool.
enum class ExitCode : int
{
    ok = 0,
    usage = 2,
    data = 3,
    numeric = 4,
};

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::data; }
};

// Invalid or inconsistent configuration values.
class ConfigError : public Error
{
public:
    using Error::Error;
};

// Input outside the domain of an operation.
class DomainError : public Error
{
public:
    using Error::Error;
};

// Malformed file or shape mismatch.
class FormatError : public Error
{
public:
    using Error::Error;
};

class GenerationError : public Error
{
public:
    using Error::Error;
};

class NumericError : public Error
{
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::numeric; }
};

// Subspace or least-squares estimation failed (rank deficiency, ...).
class EstimationError : public NumericError
{
public:
    using NumericError::NumericError;
};

// Tracking target carries no usable energy.
class TrackLostError : public NumericError
{
public:
    using NumericError::NumericError;
};

class UsageError : public Error
{
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

} // namespace mpcprof
