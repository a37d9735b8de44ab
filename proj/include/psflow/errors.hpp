#ifndef PSFLOW_ERRORS_HPP
#define PSFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace psflow {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameter outside its documented domain (e.g. p not in [2, n)).
class parameter_error : public error {
public:
    using error::error;
};

/// Grid/field mismatch or malformed geometry.
class geometry_error : public error {
public:
    using error::error;
};

/// Identically-zero or otherwise unusable initial data.
class degenerate_data_error : public error {
public:
    using error::error;
};

/// Stored data violates a structural invariant (e.g. non-monotone gamma).
class data_integrity_error : public error {
public:
    using error::error;
};

/// Query outside the range covered by a map or store.
class range_error : public error {
public:
    using error::error;
};

/// A runtime check of a mathematical identity or bound failed.
class invariant_failure : public error {
public:
    using error::error;
};

/// Config file rejected; carries line/field context in the message.
class config_error : public error {
public:
    using error::error;
};

/// Two independent computation routes disagreed beyond tolerance.
class integrator_inconsistency : public error {
public:
    using error::error;
};

} // namespace psflow

#endif
