#pragma once

#include <stdexcept>
#include <string>

namespace posekit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateSixD : Error {
    using Error::Error;
};
struct InvalidBinCount : Error {
    using Error::Error;
};
struct BinIndexOutOfRange : Error {
    using Error::Error;
};
struct InvalidRange : Error {
    using Error::Error;
};
struct MalformedHeader : Error {
    using Error::Error;
};
struct TruncatedRLEPayload : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct DegenerateMesh : Error {
    using Error::Error;
};
struct InvalidParams : Error {
    using Error::Error;
};
struct EmptyDatabase : Error {
    using Error::Error;
};
struct DuplicateId : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ClassOutOfRange : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct EmptyAfterFilter : Error {
    using Error::Error;
};

}  // namespace posekit
