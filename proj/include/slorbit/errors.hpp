#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slorbit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class StratumError : public Error {
public:
    using Error::Error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// The orbit meets the characteristic curve, so the range theorems do not apply.
class HypothesisError : public Error {
public:
    HypothesisError(const std::string& what, std::vector<double> hits)
        : Error(what), hits_(std::move(hits)) {}
    const std::vector<double>& hits() const { return hits_; }

private:
    std::vector<double> hits_;
};

// Thrown when fewer eigenvalues than requested could be located.
class IncompleteSpectrumError : public Error {
public:
    IncompleteSpectrumError(const std::string& what, std::vector<double> found,
                            std::vector<int> multiplicities)
        : Error(what), found_(std::move(found)), multiplicities_(std::move(multiplicities)) {}
    const std::vector<double>& found() const { return found_; }
    const std::vector<int>& multiplicities() const { return multiplicities_; }

private:
    std::vector<double> found_;
    std::vector<int> multiplicities_;
};

} // namespace slorbit
