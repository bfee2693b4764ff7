#pragma once

#include <stdexcept>
#include <string>

namespace doa {

/// Invalid arguments or malformed configuration.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Parse failures for CSV inputs; message carries the file and line.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// WLS normal equations are singular (too few or degenerate samples).
class RankDeficient : public std::runtime_error {
public:
    explicit RankDeficient(const std::string& msg) : std::runtime_error(msg) {}
};

/// Truncated-normal normalizer underflowed (interval impossibly far from mu).
class NormalizerUnderflow : public std::runtime_error {
public:
    explicit NormalizerUnderflow(const std::string& msg) : std::runtime_error(msg) {}
};

/// A record violates the measurement model (e.g. detected value below threshold).
class MalformedObservation : public std::runtime_error {
public:
    explicit MalformedObservation(const std::string& msg) : std::runtime_error(msg) {}
};

/// Baseline likelihood requested with zero detections.
class NoDetections : public std::runtime_error {
public:
    explicit NoDetections(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace doa
