#pragma once

#include <stdexcept>
#include <string>

namespace touchsplat {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry
struct DegenerateDirection : Error {
  explicit DegenerateDirection(const std::string& what) : Error(what) {}
};
struct CoincidentCenters : Error {
  explicit CoincidentCenters(const std::string& what) : Error(what) {}
};

// Camera / rendering
struct BehindCamera : Error {
  explicit BehindCamera(const std::string& what) : Error(what) {}
};
struct BufferMismatch : Error {
  explicit BufferMismatch(const std::string& what) : Error(what) {}
};

// Losses
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};
struct EmptyPairSet : Error {
  explicit EmptyPairSet(const std::string& what) : Error(what) {}
};

// Sampling / touch
struct TooFewPrimitives : Error {
  explicit TooFewPrimitives(const std::string& what) : Error(what) {}
};
struct InsufficientPrimitives : Error {
  explicit InsufficientPrimitives(const std::string& what) : Error(what) {}
};
struct InsufficientGroundTruth : Error {
  explicit InsufficientGroundTruth(const std::string& what) : Error(what) {}
};
struct EmptyModel : Error {
  explicit EmptyModel(const std::string& what) : Error(what) {}
};
struct EmptyBoundary : Error {
  explicit EmptyBoundary(const std::string& what) : Error(what) {}
};

// Metrics
struct EmptySet : Error {
  explicit EmptySet(const std::string& what) : Error(what) {}
};

// Scene / trainer
struct UnknownCondition : Error {
  explicit UnknownCondition(const std::string& what) : Error(what) {}
};
struct EmptyInitialization : Error {
  explicit EmptyInitialization(const std::string& what) : Error(what) {}
};

}  // namespace touchsplat
