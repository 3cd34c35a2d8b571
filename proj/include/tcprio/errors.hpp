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

#include <stdexcept>
#include <string>

namespace tcprio {

// Root of every error the library throws. The three intermediate classes map
// onto the CLI exit codes: ConfigError -> 2, DataError -> 3, InternalError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

#define TCPRIO_DATA_ERROR(Name)   \
  class Name : public DataError { \
   public:                        \
    using DataError::DataError;   \
  }

// Input parsing and validation.
TCPRIO_DATA_ERROR(ParseError);
TCPRIO_DATA_ERROR(DomainError);
TCPRIO_DATA_ERROR(DuplicateIdError);
TCPRIO_DATA_ERROR(IndexError);
TCPRIO_DATA_ERROR(DimensionMismatchError);

// Defect prediction.
TCPRIO_DATA_ERROR(FeatureNameMismatchError);
TCPRIO_DATA_ERROR(InsufficientMinorityError);
TCPRIO_DATA_ERROR(SingleClassError);
TCPRIO_DATA_ERROR(NonFiniteFeatureError);
TCPRIO_DATA_ERROR(UnknownUnitError);

// Clustering and cluster-based prioritization.
TCPRIO_DATA_ERROR(InvalidKError);
TCPRIO_DATA_ERROR(MissingFaultPronenessError);
TCPRIO_DATA_ERROR(InconsistentOrderSetError);

// Evaluation.
TCPRIO_DATA_ERROR(UnknownTestError);
TCPRIO_DATA_ERROR(UndetectedFaultError);
TCPRIO_DATA_ERROR(InsufficientPairsError);
TCPRIO_DATA_ERROR(MissingCellError);

// Pipeline.
TCPRIO_DATA_ERROR(MissingFeatureFileError);
TCPRIO_DATA_ERROR(MissingScoresError);

#undef TCPRIO_DATA_ERROR

// Training data for version i contained labels of version i or later.
class LeakageError : public InternalError {
 public:
  using InternalError::InternalError;
};

}  // namespace tcprio
