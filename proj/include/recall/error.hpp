#pragma once

#include <stdexcept>
#include <string>

namespace recall {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed persisted file, config, or model output.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Remote backend gave up after its retry budget.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(what) {}
};

// External environment peer violated the wire protocol.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& what) : Error(what) {}
};

// External environment peer went silent past the deadline.
class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& what) : Error(what) {}
};

}  // namespace recall
