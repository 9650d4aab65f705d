#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eaeval {

// Malformed or inconsistent input data (files, records, matrices).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Network-level failure or an error payload from the completion endpoint.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Every completion attempt failed validation. Carries the text of each
// attempt so the caller can log what the model actually said.
class InvalidResponseError : public std::runtime_error {
public:
    InvalidResponseError(const std::string& what, std::vector<std::string> attempts)
        : std::runtime_error(what), attempts_(std::move(attempts)) {}

    const std::vector<std::string>& attempts() const { return attempts_; }

private:
    std::vector<std::string> attempts_;
};

}  // namespace eaeval
