// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_ERROR_HPP
#define MDRNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mdrnet {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed external data (binvox streams, manifests, checkpoints, descriptor files).
class FormatError : public Error {
public:
    using Error::Error;
};

// Tensor / grid / descriptor dimensions that do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid argument or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradient.
class NumericError : public Error {
public:
    using Error::Error;
};

// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mdrnet

#endif // MDRNET_ERROR_HPP
