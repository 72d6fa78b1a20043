#pragma once

#include <stdexcept>
#include <string>

namespace cfh {

enum class ErrorKind {
    InvalidArgument,
    DegenerateMatrix,
    InvalidCF,
    DegenerateState,
    Transversality,
    DeltaTooLarge,
    HorizonExceeded,
    NonCyclicCollision,
    Lemma6Precondition,
    NoSplitting,
    Schema,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace cfh
