#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plidar {

enum class ErrorCode {
  // kitti_io
  MissingKey,
  MalformedNumber,
  WrongArity,
  NotARotation,
  WrongFieldCount,
  NotPng,
  WrongBitDepth,
  WrongChannelCount,
  TruncatedFile,
  // geometry
  NonPositiveDepth,
  SingularTransform,
  DegeneratePolygon,
  FrameMismatch,
  InvalidBox,
  // cloud
  RasterSizeMismatch,
  MissingFeatureRaster,
  EmptyCloud,
  LengthMismatch,
  // fitter
  NoSamplesForClass,
  UnknownClass,
  // plumbing
  InvalidArgument,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace plidar
