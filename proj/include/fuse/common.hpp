#pragma once

#include <stdexcept>
#include <string>

namespace fuse {

inline constexpr const char* kVersion = "0.1.0";

// Error hierarchy. exit_code() maps onto the CLI convention:
// 2 usage/parameter, 3 data ingestion, 4 numerical failure.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 2; }
};

// Violated API precondition (dimension mismatch, missing field, ...).
class contract_error : public error {
public:
    using error::error;
    int exit_code() const override { return 2; }
};

// Invalid user-supplied parameter value (eta <= 0, t outside [0,1], ...).
class parameter_error : public error {
public:
    using error::error;
    int exit_code() const override { return 2; }
};

// Malformed or inconsistent input data (ragged CSV, non-binary labels, ...).
class data_error : public error {
public:
    using error::error;
    int exit_code() const override { return 3; }
};

// Numerical failure (Cholesky breakdown, non-finite intermediate, ...).
class numeric_error : public error {
public:
    using error::error;
    int exit_code() const override { return 4; }
};

// Metric undefined on the given input (constant ranks, single-class labels).
class undefined_metric_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

}  // namespace fuse
