// Copyright 2026 The facecut-pipeline Authors
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

#include <stdexcept>
#include <string>

namespace facecut {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FACECUT_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

FACECUT_DEFINE_ERROR(DecodeError);
FACECUT_DEFINE_ERROR(ProviderInitError);
FACECUT_DEFINE_ERROR(AnnotationFormatError);
FACECUT_DEFINE_ERROR(DegeneratePolygonError);
FACECUT_DEFINE_ERROR(ShapeError);
FACECUT_DEFINE_ERROR(EmptyMaskError);
FACECUT_DEFINE_ERROR(NoFaceError);
FACECUT_DEFINE_ERROR(LayoutError);
FACECUT_DEFINE_ERROR(EmptyDatasetError);
FACECUT_DEFINE_ERROR(RatioError);
FACECUT_DEFINE_ERROR(IoError);
FACECUT_DEFINE_ERROR(WeightLoadError);
FACECUT_DEFINE_ERROR(DataError);
FACECUT_DEFINE_ERROR(LabelError);
FACECUT_DEFINE_ERROR(InputError);
FACECUT_DEFINE_ERROR(CapabilityError);
FACECUT_DEFINE_ERROR(ParseError);
FACECUT_DEFINE_ERROR(ConfigError);
FACECUT_DEFINE_ERROR(NumericError);

#undef FACECUT_DEFINE_ERROR

}  // namespace facecut
