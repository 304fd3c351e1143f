#pragma once

#include <stdexcept>
#include <string>

namespace covi {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Agents coincide, or geometry otherwise breaks a bearing observation.
class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

// The linear system is rank deficient (insufficient excitation).
class DegenerateMotionError : public Error {
public:
    using Error::Error;
};

// Euler extraction at gimbal lock.
class DegenerateOrientationError : public Error {
public:
    using Error::Error;
};

class ProjectionFailureError : public Error {
public:
    using Error::Error;
};

// A sensor stream does not cover the requested interval.
class MissingDataError : public Error {
public:
    using Error::Error;
};

// Dual-camera epochs do not coincide.
class SynchronizationError : public Error {
public:
    using Error::Error;
};

} // namespace covi
