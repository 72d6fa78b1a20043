#include "cfhyp/error.hpp"

namespace cfh {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::DegenerateMatrix: return "degenerate-matrix";
        case ErrorKind::InvalidCF: return "invalid-cf";
        case ErrorKind::DegenerateState: return "degenerate-state";
        case ErrorKind::Transversality: return "transversality-error";
        case ErrorKind::DeltaTooLarge: return "delta-too-large";
        case ErrorKind::HorizonExceeded: return "horizon-exceeded";
        case ErrorKind::NonCyclicCollision: return "non-cyclic-collision";
        case ErrorKind::Lemma6Precondition: return "lemma6-precondition-error";
        case ErrorKind::NoSplitting: return "no-splitting";
        case ErrorKind::Schema: return "schema-error";
    }
    return "error";
}

}  // namespace cfh
