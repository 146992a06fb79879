#pragma once

#include <stdexcept>
#include <string>

namespace ltrnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape construction or element-count mismatch.
class ShapeError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

/// Two sparse tensors were expected to live on the same index set.
class SupportError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written or parsed. The message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ltrnn
